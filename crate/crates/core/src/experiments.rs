//! Scenario runners for the single-taxpayer and network experiments.
//!
//! Every runner is a pure function of its configuration and seed.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::analytic::{self, Measure};
use crate::error::{check_open_unit, Error, Result};
use crate::graph::Graph;
use crate::network::{neighborhood_avg_k, NetworkConfig, NetworkSim};
use crate::stochastic::{bernoulli_stream, beta_2_3_sample, Purpose, StreamKey};
use crate::taxpayer::{run_single, StepOutcome, TaxpayerParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub mean: f64,
    /// Sample standard deviation (`n - 1` divisor), zero for a single value.
    pub sd: f64,
    pub count: usize,
}

impl SummaryStats {
    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        self.sd / (self.count as f64).sqrt()
    }
}

pub fn summarize(values: &[f64]) -> Result<SummaryStats> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let count = values.len();
    let mean = values.iter().sum::<f64>() / count as f64;
    let sd = if count > 1 {
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (count - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(SummaryStats { mean, sd, count })
}

/// Spearman rank correlation, ties given their average rank.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut out = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                out[k] = avg;
            }
            i = j + 1;
        }
        out
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx).powi(2);
        vy += (b - my).powi(2);
    }
    cov / (vx * vy).sqrt()
}

/// Network shape for the experiment runners.
///
/// Parses from `star:<n>`, `torus:<w>x<h>` or `edges:<path>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Topology {
    Star(usize),
    Torus { width: usize, height: usize },
    EdgeList(PathBuf),
}

impl Topology {
    pub fn build(&self) -> Result<Graph> {
        match self {
            Topology::Star(n) => Graph::star(*n),
            Topology::Torus { width, height } => Graph::torus(*width, *height),
            Topology::EdgeList(path) => Graph::read_edge_list(path, None),
        }
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = Error::Syntax;
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| bad(format!("topology `{s}` is not of the form kind:arg")))?;
        let num = |t: &str| -> Result<usize> {
            t.trim()
                .parse()
                .map_err(|_| bad(format!("`{t}` is not a size")))
        };
        match kind {
            "star" => Ok(Topology::Star(num(arg)?)),
            "torus" => {
                let (w, h) = arg
                    .split_once('x')
                    .ok_or_else(|| bad(format!("torus size `{arg}` should be WxH")))?;
                Ok(Topology::Torus {
                    width: num(w)?,
                    height: num(h)?,
                })
            }
            "edges" => Ok(Topology::EdgeList(PathBuf::from(arg))),
            other => Err(bad(format!("unknown topology `{other}`"))),
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topology::Star(n) => write!(f, "star:{n}"),
            Topology::Torus { width, height } => write!(f, "torus:{width}x{height}"),
            Topology::EdgeList(p) => write!(f, "edges:{}", p.display()),
        }
    }
}

/// Parse a tax-rate grid, either `start:stop:step` (both ends inclusive
/// within 1e-9) or a comma-separated list.
pub fn parse_tau_grid(s: &str) -> Result<Vec<f64>> {
    let bad = Error::Syntax;
    let num = |t: &str| -> Result<f64> {
        t.trim()
            .parse()
            .map_err(|_| bad(format!("`{t}` is not a number")))
    };
    let grid: Vec<f64> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(bad(format!("grid `{s}` should be start:stop:step")));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(bad(format!("grid `{s}` needs step > 0 and stop >= start")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| start + i as f64 * step).collect()
    } else {
        s.split(',').map(num).collect::<Result<_>>()?
    };
    for &tau in &grid {
        check_open_unit("tau", tau)?;
    }
    Ok(grid)
}

/// One single-taxpayer run with its analytic overlay.
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub params: TaxpayerParams,
    pub outcomes: Vec<StepOutcome>,
    /// `pf(0) + drift * t` for `t = 0..=horizon`.
    pub reference: Vec<f64>,
}

/// Run `horizon` steps for each parameter set. Run `i` draws its audits from
/// the key `(seed, i, 0, Audit)`.
pub fn exp_single_trajectories(
    params: &[TaxpayerParams],
    horizon: usize,
    seed: u64,
) -> Result<Vec<SingleRun>> {
    params
        .iter()
        .enumerate()
        .map(|(i, p)| {
            p.validate()?;
            let audits = bernoulli_stream(StreamKey::new(seed, i as u64, 0, Purpose::Audit), p.p)?;
            let outcomes = run_single(p, horizon, audits)?;
            let slope = analytic::drift(p).drift;
            let reference = (0..=horizon).map(|t| p.pf0 + slope * t as f64).collect();
            Ok(SingleRun {
                params: *p,
                outcomes,
                reference,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftRow {
    pub tau: f64,
    pub drift: f64,
    pub noncompliance: Measure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftCurves {
    pub rows: Vec<DriftRow>,
    /// `k / λ`, where the drift has its minimum.
    pub breakpoint: f64,
    /// Row with the smallest finite non-compliance measure.
    pub argmin: Option<usize>,
}

pub fn exp_drift_curves(k: f64, lambda: f64, tau_grid: &[f64]) -> Result<DriftCurves> {
    let breakpoint = analytic::optimal_tax_rate(k, lambda)?;
    let mut rows = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        check_open_unit("tau", tau)?;
        let params = TaxpayerParams {
            tau,
            k,
            p: 0.5,
            lambda,
            pf0: 1.0,
        };
        rows.push(DriftRow {
            tau,
            drift: analytic::drift(&params).drift,
            noncompliance: analytic::noncompliance_measure(&params),
        });
    }
    let argmin = rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.noncompliance.value().map(|v| (i, v)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i);
    Ok(DriftCurves {
        rows,
        breakpoint,
        argmin,
    })
}

/// Star-network compliance-time experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Config {
    pub nodes: usize,
    pub params: TaxpayerParams,
    pub replicates: usize,
    /// Steps after which an unsettled replicate is an error.
    pub cap: u64,
}

impl Default for Table1Config {
    fn default() -> Self {
        Self {
            nodes: 10,
            params: TaxpayerParams {
                tau: 0.3,
                k: 0.4,
                p: 0.01,
                lambda: 1.5,
                pf0: 1.0,
            },
            replicates: 50,
            cap: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1 {
    /// Last-evasion step per replicate (outer) and node (inner).
    pub last_evasion: Vec<Vec<u64>>,
    pub per_node: Vec<SummaryStats>,
    /// Statistics over every replicate and node together.
    pub grand: SummaryStats,
    /// Naive estimate that ignores audit randomness.
    pub naive_estimate: f64,
}

pub fn exp_table1(seed: u64) -> Result<Table1> {
    table1_with(&Table1Config::default(), seed)
}

/// Run each replicate until no taxpayer can evade again and record the last
/// step on which each node evaded.
pub fn table1_with(cfg: &Table1Config, seed: u64) -> Result<Table1> {
    if cfg.replicates == 0 {
        return Err(Error::InvalidSize {
            what: "replicates",
            min: 1,
            got: 0,
        });
    }
    let graph = Graph::star(cfg.nodes)?;
    let net = NetworkConfig::homogeneous(cfg.params);
    let mut last_evasion = Vec::with_capacity(cfg.replicates);
    for r in 0..cfg.replicates {
        let mut sim = NetworkSim::new(net.clone(), &graph, seed, r as u64)?;
        let mut last = vec![None; cfg.nodes];
        let mut t = 0u64;
        while !sim.is_settled() {
            if t >= cfg.cap {
                return Err(Error::HorizonExhausted { cap: cfg.cap });
            }
            for (slot, o) in last.iter_mut().zip(sim.step()) {
                if o.evaded {
                    *slot = Some(t);
                }
            }
            t += 1;
        }
        // pf(0) > 0 makes everyone evade at step 0.
        last_evasion.push(last.into_iter().map(|l| l.unwrap_or(0)).collect::<Vec<_>>());
    }
    let per_node = (0..cfg.nodes)
        .map(|x| {
            let v: Vec<f64> = last_evasion.iter().map(|row| row[x] as f64).collect();
            summarize(&v)
        })
        .collect::<Result<Vec<_>>>()?;
    let all: Vec<f64> = last_evasion.iter().flatten().map(|&v| v as f64).collect();
    let grand = summarize(&all)?;
    let naive_estimate =
        analytic::naive_network_compliance_time(&vec![cfg.params.pf0; cfg.nodes], &cfg.params)?;
    Ok(Table1 {
        last_evasion,
        per_node,
        grand,
        naive_estimate,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub tau_grid: Vec<f64>,
    pub topology: Topology,
    pub replicates: usize,
    pub horizon: usize,
    /// Everything but the tax rate, which the grid overrides.
    pub base: NetworkConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.tau_grid.is_empty() {
            return Err(Error::EmptyInput);
        }
        for &tau in &self.tau_grid {
            check_open_unit("tau", tau)?;
        }
        if self.replicates == 0 {
            return Err(Error::InvalidSize {
                what: "replicates",
                min: 1,
                got: 0,
            });
        }
        if self.horizon == 0 {
            return Err(Error::EmptyRun);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub tau: f64,
    /// Mean over iterations (and replicates) of the per-iteration evader count.
    pub avg_evaders: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    /// Sorted by tax rate.
    pub rows: Vec<SweepRow>,
    pub nodes: usize,
    /// `k / λ` of the base configuration.
    pub reference_tau: f64,
}

impl Sweep {
    /// Row with the fewest average evaders; the first such row on ties.
    pub fn argmin(&self) -> Option<&SweepRow> {
        self.rows.iter().reduce(|best, r| {
            if r.avg_evaders < best.avg_evaders {
                r
            } else {
                best
            }
        })
    }
}

/// Average evader count against tax rate. Every grid point reuses the same
/// per-replicate random streams, so neighbouring points differ only through
/// the tax rate.
pub fn exp_tau_sweep(spec: &SweepSpec, seed: u64) -> Result<Sweep> {
    spec.validate()?;
    let graph = spec.topology.build()?;
    let mut grid = spec.tau_grid.clone();
    grid.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(grid.len());
    for tau in grid {
        let mut cfg = spec.base.clone();
        cfg.shared = cfg.shared.with_tau(tau);
        let mut total = 0.0;
        for r in 0..spec.replicates {
            let mut sim = NetworkSim::new(cfg.clone(), &graph, seed, r as u64)?;
            let mut evasions = 0u64;
            for _ in 0..spec.horizon {
                evasions += sim.step().iter().filter(|o| o.evaded).count() as u64;
            }
            total += evasions as f64 / spec.horizon as f64;
        }
        rows.push(SweepRow {
            tau,
            avg_evaders: total / spec.replicates as f64,
        });
    }
    Ok(Sweep {
        rows,
        nodes: graph.node_count(),
        reference_tau: analytic::optimal_tax_rate(spec.base.shared.k, spec.base.shared.lambda)?,
    })
}

/// Heterogeneous savings rates on a torus.
#[derive(Debug, Clone, PartialEq)]
pub struct HeteroConfig {
    pub width: usize,
    pub height: usize,
    /// `k` is ignored; each taxpayer draws its own from Beta(2, 3).
    pub params: TaxpayerParams,
    pub iterations: usize,
}

impl Default for HeteroConfig {
    fn default() -> Self {
        Self {
            width: 10,
            height: 10,
            params: TaxpayerParams {
                tau: 0.3,
                k: 0.4,
                p: 0.1,
                lambda: 1.5,
                pf0: 1.0,
            },
            iterations: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeteroRow {
    pub node: usize,
    pub row: usize,
    pub col: usize,
    pub k: f64,
    pub k_avg: f64,
    pub evasions: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hetero {
    pub rows: Vec<HeteroRow>,
    pub width: usize,
    pub height: usize,
    pub tau: f64,
    pub iterations: usize,
}

impl Hetero {
    /// Evasion counts laid out as `height` rows of `width` columns.
    pub fn grid(&self) -> Vec<Vec<u64>> {
        self.rows
            .chunks(self.width)
            .map(|chunk| chunk.iter().map(|r| r.evasions).collect())
            .collect()
    }

    /// Rank correlation between each taxpayer's own `k` and its evasion count.
    pub fn own_k_correlation(&self) -> f64 {
        let k: Vec<f64> = self.rows.iter().map(|r| r.k).collect();
        let e: Vec<f64> = self.rows.iter().map(|r| r.evasions as f64).collect();
        spearman(&k, &e)
    }
}

pub fn exp_heterogeneous_k(seed: u64) -> Result<Hetero> {
    hetero_with(&HeteroConfig::default(), seed)
}

/// Savings rates come from the key `(seed, 0, 0, Parameter)`; the run itself
/// is replicate 0.
pub fn hetero_with(cfg: &HeteroConfig, seed: u64) -> Result<Hetero> {
    let graph = Graph::torus(cfg.width, cfg.height)?;
    let n = graph.node_count();
    if cfg.iterations == 0 {
        return Err(Error::EmptyRun);
    }
    let ks = beta_2_3_sample(StreamKey::new(seed, 0, 0, Purpose::Parameter), n);
    let net = NetworkConfig::homogeneous(cfg.params).with_k_overrides(ks);
    let mut sim = NetworkSim::new(net.clone(), &graph, seed, 0)?;
    for _ in 0..cfg.iterations {
        sim.step();
    }
    let rows = sim
        .state()
        .states
        .iter()
        .enumerate()
        .map(|(x, s)| HeteroRow {
            node: x,
            row: x / cfg.width,
            col: x % cfg.width,
            k: net.k_of(x),
            k_avg: neighborhood_avg_k(&net, &graph, x),
            evasions: s.n_total,
        })
        .collect();
    Ok(Hetero {
        rows,
        width: cfg.width,
        height: cfg.height,
        tau: cfg.params.tau,
        iterations: cfg.iterations,
    })
}
