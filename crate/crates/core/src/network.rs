//! Taxpayers on a graph.
//!
//! Every taxpayer evolves exactly as in [`crate::taxpayer`], except that the
//! evasion decision looks at the summed evasion profit over the closed
//! neighbourhood. Decisions are synchronous: all of them are taken from the
//! state at time `t` before anyone's income or audit is applied.

use crate::error::{check_open_unit, Error, Result};
use crate::graph::Graph;
use crate::stochastic::{
    bernoulli_stream, uniform_stream, BernoulliStream, Purpose, StreamKey, UniformStream,
};
use crate::taxpayer::{advance, StepOutcome, TaxpayerParams, TaxpayerState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecisionRule {
    /// Evade iff the neighbourhood profit is strictly positive.
    Deterministic,
    /// Evade with probability `min(1, exp(β S / M))`, see [`evasion_probability`].
    Probabilistic { beta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub shared: TaxpayerParams,
    /// Per-taxpayer savings rates, replacing `shared.k`.
    pub k_overrides: Option<Vec<f64>>,
    /// Per-taxpayer initial profits, replacing `shared.pf0`.
    pub pf0_overrides: Option<Vec<f64>>,
    pub rule: DecisionRule,
}

impl NetworkConfig {
    pub fn homogeneous(shared: TaxpayerParams) -> Self {
        Self {
            shared,
            k_overrides: None,
            pf0_overrides: None,
            rule: DecisionRule::Deterministic,
        }
    }

    pub fn with_rule(self, rule: DecisionRule) -> Self {
        Self { rule, ..self }
    }

    pub fn with_k_overrides(self, k: Vec<f64>) -> Self {
        Self {
            k_overrides: Some(k),
            ..self
        }
    }

    pub fn with_pf0_overrides(self, pf0: Vec<f64>) -> Self {
        Self {
            pf0_overrides: Some(pf0),
            ..self
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        self.shared.validate()?;
        if let Some(ks) = &self.k_overrides {
            if ks.len() != n {
                return Err(Error::LengthMismatch {
                    what: "k overrides",
                    expected: n,
                    got: ks.len(),
                });
            }
            for &k in ks {
                check_open_unit("k", k)?;
            }
        }
        if let Some(pf0s) = &self.pf0_overrides {
            if pf0s.len() != n {
                return Err(Error::LengthMismatch {
                    what: "pf0 overrides",
                    expected: n,
                    got: pf0s.len(),
                });
            }
            for &pf0 in pf0s {
                self.shared.with_pf0(pf0).validate()?;
            }
        }
        if let DecisionRule::Probabilistic { beta } = self.rule {
            if !(beta.is_finite() && beta >= 0.0) {
                return Err(Error::Parameter {
                    name: "beta",
                    value: beta,
                    bound: "[0, inf)",
                });
            }
        }
        Ok(())
    }

    pub fn k_of(&self, x: usize) -> f64 {
        self.k_overrides.as_ref().map_or(self.shared.k, |ks| ks[x])
    }

    pub fn pf0_of(&self, x: usize) -> f64 {
        self.pf0_overrides
            .as_ref()
            .map_or(self.shared.pf0, |v| v[x])
    }

    /// The effective single-taxpayer parameters of taxpayer `x`.
    pub fn params_of(&self, x: usize) -> TaxpayerParams {
        self.shared.with_k(self.k_of(x)).with_pf0(self.pf0_of(x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub states: Vec<TaxpayerState>,
    pub t: u64,
}

impl NetworkState {
    pub fn initial(cfg: &NetworkConfig, n: usize) -> Self {
        Self {
            states: (0..n)
                .map(|x| TaxpayerState::initial(cfg.pf0_of(x)))
                .collect(),
            t: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Summed evasion profit over the closed neighbourhood of `x`.
pub fn neighborhood_profit(state: &NetworkState, g: &Graph, x: usize) -> f64 {
    g.closed_neighborhood(x).map(|y| state.states[y].pf).sum()
}

fn neighborhood_evasions(state: &NetworkState, g: &Graph, x: usize) -> u64 {
    g.closed_neighborhood(x)
        .map(|y| state.states[y].n_total)
        .sum()
}

pub fn decide_evade_network(state: &NetworkState, g: &Graph, x: usize) -> bool {
    neighborhood_profit(state, g, x) > 0.0
}

/// Ising-like evasion probability `min(1, exp(β S / M))`, where `S` is the
/// neighbourhood profit and `M` the neighbourhood's lifetime evasion count.
/// Before anyone in the neighbourhood has evaded (`M = 0`) this falls back to
/// the deterministic sign rule.
pub fn evasion_probability(state: &NetworkState, g: &Graph, x: usize, beta: f64) -> f64 {
    let s = neighborhood_profit(state, g, x);
    let m = neighborhood_evasions(state, g, x);
    if m == 0 {
        return if s > 0.0 { 1.0 } else { 0.0 };
    }
    (beta * s / m as f64).exp().min(1.0)
}

/// Mean savings rate over the closed neighbourhood of `x`.
pub fn neighborhood_avg_k(cfg: &NetworkConfig, g: &Graph, x: usize) -> f64 {
    neighborhood_sum_k(cfg, g, x) / (g.degree(x) + 1) as f64
}

/// Summed savings rate over the closed neighbourhood of `x`.
pub fn neighborhood_sum_k(cfg: &NetworkConfig, g: &Graph, x: usize) -> f64 {
    g.closed_neighborhood(x).map(|y| cfg.k_of(y)).sum()
}

fn decide_all(
    cfg: &NetworkConfig,
    g: &Graph,
    state: &NetworkState,
    evasion_draws: &[f64],
    out: &mut Vec<bool>,
) {
    out.clear();
    out.extend((0..state.len()).map(|x| match cfg.rule {
        DecisionRule::Deterministic => decide_evade_network(state, g, x),
        DecisionRule::Probabilistic { beta } => {
            evasion_draws[x] < evasion_probability(state, g, x, beta)
        }
    }));
}

fn apply_all(
    cfg: &NetworkConfig,
    state: &mut NetworkState,
    decisions: &[bool],
    audit_draws: &[bool],
    outcomes: &mut Vec<StepOutcome>,
) {
    outcomes.clear();
    for (x, s) in state.states.iter_mut().enumerate() {
        let outcome = advance(&cfg.params_of(x), s, decisions[x], audit_draws[x]);
        *s = outcome.state;
        outcomes.push(outcome);
    }
    state.t += 1;
}

/// One synchronous step of the whole network.
///
/// `evasion_draws` are uniforms on `[0, 1)` consumed only by the
/// probabilistic rule; they must still have one entry per taxpayer.
pub fn step_network(
    cfg: &NetworkConfig,
    g: &Graph,
    state: &NetworkState,
    audit_draws: &[bool],
    evasion_draws: &[f64],
) -> Result<(NetworkState, Vec<StepOutcome>)> {
    let n = g.node_count();
    for (what, got) in [
        ("network state", state.len()),
        ("audit draws", audit_draws.len()),
        ("evasion draws", evasion_draws.len()),
    ] {
        if got != n {
            return Err(Error::LengthMismatch {
                what,
                expected: n,
                got,
            });
        }
    }
    let mut decisions = Vec::with_capacity(n);
    decide_all(cfg, g, state, evasion_draws, &mut decisions);
    let mut next = state.clone();
    let mut outcomes = Vec::with_capacity(n);
    apply_all(cfg, &mut next, &decisions, audit_draws, &mut outcomes);
    Ok((next, outcomes))
}

/// A seeded network run that owns its random streams.
///
/// Taxpayer `x` of replicate `r` draws audits from the key
/// `(seed, r, x, Audit)` and decision uniforms from `(seed, r, x, Decision)`.
/// Decision uniforms are only consumed under the probabilistic rule.
#[derive(Debug, Clone)]
pub struct NetworkSim<'g> {
    cfg: NetworkConfig,
    graph: &'g Graph,
    state: NetworkState,
    audits: Vec<BernoulliStream>,
    decisions: Vec<UniformStream>,
    audit_buf: Vec<bool>,
    draw_buf: Vec<f64>,
    evade_buf: Vec<bool>,
    outcomes: Vec<StepOutcome>,
}

impl<'g> NetworkSim<'g> {
    pub fn new(cfg: NetworkConfig, graph: &'g Graph, seed: u64, replicate: u64) -> Result<Self> {
        let n = graph.node_count();
        cfg.validate(n)?;
        let audits = (0..n)
            .map(|x| {
                bernoulli_stream(
                    StreamKey::new(seed, replicate, x as u64, Purpose::Audit),
                    cfg.shared.p,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let decisions = (0..n)
            .map(|x| uniform_stream(StreamKey::new(seed, replicate, x as u64, Purpose::Decision)))
            .collect();
        Ok(Self {
            state: NetworkState::initial(&cfg, n),
            cfg,
            graph,
            audits,
            decisions,
            audit_buf: vec![false; n],
            draw_buf: vec![0.0; n],
            evade_buf: Vec::with_capacity(n),
            outcomes: Vec::with_capacity(n),
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.cfg
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn state(&self) -> &NetworkState {
        &self.state
    }

    /// Advance one step and return every taxpayer's outcome.
    pub fn step(&mut self) -> &[StepOutcome] {
        for (slot, stream) in self.audit_buf.iter_mut().zip(&mut self.audits) {
            *slot = stream.next().expect("audit streams are endless");
        }
        if matches!(self.cfg.rule, DecisionRule::Probabilistic { .. }) {
            for (slot, stream) in self.draw_buf.iter_mut().zip(&mut self.decisions) {
                *slot = stream.next().expect("decision streams are endless");
            }
        }
        decide_all(
            &self.cfg,
            self.graph,
            &self.state,
            &self.draw_buf,
            &mut self.evade_buf,
        );
        apply_all(
            &self.cfg,
            &mut self.state,
            &self.evade_buf,
            &self.audit_buf,
            &mut self.outcomes,
        );
        &self.outcomes
    }

    /// True once no taxpayer can evade again. Under the deterministic rule a
    /// state where every neighbourhood profit is non-positive is absorbing,
    /// since profits only rise through evasion.
    pub fn is_settled(&self) -> bool {
        matches!(self.cfg.rule, DecisionRule::Deterministic)
            && (0..self.state.len()).all(|x| !decide_evade_network(&self.state, self.graph, x))
    }
}

/// Run replicate 0 for `horizon` steps and collect each taxpayer's trajectory.
pub fn run_network(
    cfg: &NetworkConfig,
    g: &Graph,
    horizon: usize,
    seed: u64,
) -> Result<Vec<Vec<StepOutcome>>> {
    if horizon == 0 {
        return Err(Error::EmptyRun);
    }
    let mut sim = NetworkSim::new(cfg.clone(), g, seed, 0)?;
    let mut out = vec![Vec::with_capacity(horizon); g.node_count()];
    for _ in 0..horizon {
        for (traj, o) in out.iter_mut().zip(sim.step()) {
            traj.push(*o);
        }
    }
    Ok(out)
}
