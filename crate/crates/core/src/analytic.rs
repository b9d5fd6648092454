//! Closed-form quantities of the single-taxpayer model.
//!
//! Between two consecutive audits of a taxpayer who evades throughout, the
//! evasion profit changes by exactly `τ - min(k, λτ)` per step. Everything in
//! this module follows from that drift.

use std::fmt;

use crate::error::{check_open_unit, Error, Result};
use crate::taxpayer::TaxpayerParams;

/// A non-negative quantity that may be unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    Finite(f64),
    Infinite,
}

impl Measure {
    pub fn is_finite(&self) -> bool {
        matches!(self, Measure::Finite(_))
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            Measure::Finite(v) => Some(v),
            Measure::Infinite => None,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::Finite(v) => write!(f, "{v}"),
            Measure::Infinite => f.write_str("inf"),
        }
    }
}

/// Which term of `min(k, λτ)` binds at audit time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `λτ <= k`: the audit always collects the full penalty.
    PenaltyBound,
    /// `λτ > k`: the audit takes the whole fortune.
    FortuneBound,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::PenaltyBound => "penalty-bound",
            Regime::FortuneBound => "fortune-bound",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftReport {
    /// Average change in evasion profit per step between audits.
    pub drift: f64,
    pub regime: Regime,
    /// True iff the drift is negative, i.e. `τ < k`.
    pub compliant_eventually: bool,
}

pub fn drift(params: &TaxpayerParams) -> DriftReport {
    let penalty = params.penalty_per_evasion();
    let regime = if penalty <= params.k {
        Regime::PenaltyBound
    } else {
        Regime::FortuneBound
    };
    let drift = params.tau - params.k.min(penalty);
    DriftReport {
        drift,
        regime,
        compliant_eventually: drift < 0.0,
    }
}

/// `-1 / drift`, or infinite when evasion never stops.
pub fn noncompliance_measure(params: &TaxpayerParams) -> Measure {
    let d = drift(params).drift;
    if d < 0.0 {
        Measure::Finite(-1.0 / d)
    } else {
        Measure::Infinite
    }
}

/// Expected time until the evasion profit first drops to zero or below:
/// the deterministic crossing time `-pf(0) / drift` plus the mean wait
/// `1 / p` for the next audit.
pub fn expected_compliance_time(params: &TaxpayerParams) -> Measure {
    let d = drift(params).drift;
    if d < 0.0 {
        Measure::Finite(-params.pf0 / d + 1.0 / params.p)
    } else {
        Measure::Infinite
    }
}

/// The tax rate `k / λ` that minimises [`noncompliance_measure`].
pub fn optimal_tax_rate(k: f64, lambda: f64) -> Result<f64> {
    check_open_unit("k", k)?;
    if !(lambda.is_finite() && lambda > 1.0) {
        return Err(Error::Parameter {
            name: "lambda",
            value: lambda,
            bound: "(1, inf)",
        });
    }
    Ok(k / lambda)
}

/// Crude network compliance time for a group of taxpayers, ignoring audit
/// randomness: the mean initial profit divided by `-drift`.
pub fn naive_network_compliance_time(pf0_values: &[f64], params: &TaxpayerParams) -> Result<f64> {
    let d = drift(params).drift;
    if d >= 0.0 {
        return Err(Error::UndefinedEstimate { drift: d });
    }
    if pf0_values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mean = pf0_values.iter().sum::<f64>() / pf0_values.len() as f64;
    Ok(mean / -d)
}
