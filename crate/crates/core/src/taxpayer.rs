//! The single-taxpayer state machine.
//!
//! Each step the taxpayer decides whether to evade, receives income, saves a
//! fraction `k` of it and may then be audited. An audit collects
//! `min(f, λτn)` where `f` and `n` are the post-income fortune and the number
//! of evasions since the last audit (including the current step). The same
//! amount is removed from both the fortune and the evasion profit.

use crate::error::{check_open_unit, Error, Result};

/// Model parameters for one taxpayer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaxpayerParams {
    /// Tax rate on the unit income.
    pub tau: f64,
    /// Savings rate: fraction of income retained.
    pub k: f64,
    /// Per-step audit probability.
    pub p: f64,
    /// Penalty multiplier applied to evaded tax on audit.
    pub lambda: f64,
    /// Initial perceived profit from evasion.
    pub pf0: f64,
}

impl TaxpayerParams {
    pub fn new(tau: f64, k: f64, p: f64, lambda: f64, pf0: f64) -> Result<Self> {
        let params = Self {
            tau,
            k,
            p,
            lambda,
            pf0,
        };
        params.validate()?;
        Ok(params)
    }

    /// The one-taxpayer example set: `k = 0.4`, `p = 0.01`, `λ = 1.5`,
    /// `pf(0) = 5`, with the given tax rate.
    pub fn reference(tau: f64) -> Self {
        Self {
            tau,
            k: 0.4,
            p: 0.01,
            lambda: 1.5,
            pf0: 5.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_open_unit("tau", self.tau)?;
        check_open_unit("k", self.k)?;
        check_open_unit("p", self.p)?;
        // NaN fails every check below.
        if !(self.lambda.is_finite() && self.lambda > 1.0) {
            return Err(Error::Parameter {
                name: "lambda",
                value: self.lambda,
                bound: "(1, inf)",
            });
        }
        if !(self.pf0.is_finite() && self.pf0 > 0.0) {
            return Err(Error::Parameter {
                name: "pf0",
                value: self.pf0,
                bound: "(0, inf)",
            });
        }
        Ok(())
    }

    pub fn with_tau(self, tau: f64) -> Self {
        Self { tau, ..self }
    }

    pub fn with_k(self, k: f64) -> Self {
        Self { k, ..self }
    }

    pub fn with_pf0(self, pf0: f64) -> Self {
        Self { pf0, ..self }
    }

    /// Maximum repayment per evaded step, `λτ`.
    pub fn penalty_per_evasion(&self) -> f64 {
        self.lambda * self.tau
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaxpayerState {
    /// Fortune (accumulated savings).
    pub f: f64,
    /// Cumulative profit from evasion, net of repayments.
    pub pf: f64,
    /// Evasions since the last audit.
    pub n: u64,
    /// Evasions over the whole run.
    pub n_total: u64,
    /// Steps taken so far.
    pub t: u64,
}

impl TaxpayerState {
    pub fn initial(pf0: f64) -> Self {
        Self {
            f: 0.0,
            pf: pf0,
            n: 0,
            n_total: 0,
            t: 0,
        }
    }
}

/// Record of one step: the decision, the audit draw and the resulting state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub evaded: bool,
    pub audited: bool,
    /// Amount collected by the audit, zero when not audited.
    pub repaid: f64,
    pub state: TaxpayerState,
}

/// Evade iff the profit from evasion so far is strictly positive.
pub fn decide_evade(state: &TaxpayerState) -> bool {
    state.pf > 0.0
}

/// Advance one step with an externally made evasion decision.
///
/// The network engine uses this directly since its decision rule differs;
/// [`step`] applies the single-taxpayer rule.
pub fn advance(
    params: &TaxpayerParams,
    state: &TaxpayerState,
    evade: bool,
    audited: bool,
) -> StepOutcome {
    let d = u64::from(evade);
    let df = d as f64;
    let mut f = state.f + params.k * (1.0 - params.tau) + params.k * params.tau * df;
    let mut pf = state.pf + params.tau * df;
    let mut n = state.n + d;
    let mut repaid = 0.0;
    if audited {
        repaid = f.min(params.penalty_per_evasion() * n as f64);
        f -= repaid;
        pf -= repaid;
        n = 0;
    }
    StepOutcome {
        evaded: evade,
        audited,
        repaid,
        state: TaxpayerState {
            f,
            pf,
            n,
            n_total: state.n_total + d,
            t: state.t + 1,
        },
    }
}

pub fn step(params: &TaxpayerParams, state: &TaxpayerState, audited: bool) -> StepOutcome {
    advance(params, state, decide_evade(state), audited)
}

/// Iterate [`step`] from the initial state for `horizon` steps.
///
/// `audits` supplies the Bernoulli audit draw for each step and must yield at
/// least `horizon` values.
pub fn run_single<I>(params: &TaxpayerParams, horizon: usize, audits: I) -> Result<Vec<StepOutcome>>
where
    I: IntoIterator<Item = bool>,
{
    if horizon == 0 {
        return Err(Error::EmptyRun);
    }
    let mut audits = audits.into_iter();
    let mut out = Vec::with_capacity(horizon);
    let mut state = TaxpayerState::initial(params.pf0);
    for i in 0..horizon {
        let audited = audits.next().ok_or(Error::AuditStreamTooShort {
            needed: horizon,
            got: i,
        })?;
        let outcome = step(params, &state, audited);
        state = outcome.state;
        out.push(outcome);
    }
    Ok(out)
}

/// Index of the last step on which the taxpayer evaded.
pub fn last_evasion_time(trajectory: &[StepOutcome]) -> Option<usize> {
    trajectory.iter().rposition(|o| o.evaded)
}

/// First state time `t` (after the step) at which `pf(t) <= 0`.
pub fn first_compliance_time(trajectory: &[StepOutcome]) -> Option<u64> {
    trajectory
        .iter()
        .find(|o| o.state.pf <= 0.0)
        .map(|o| o.state.t)
}
