use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use evadesim::analytic::{self, Measure};
use evadesim::experiments::{
    exp_drift_curves, exp_single_trajectories, exp_tau_sweep, hetero_with, table1_with,
    HeteroConfig, SweepSpec, Table1Config, Topology,
};
use evadesim::network::{run_network, DecisionRule, NetworkConfig};
use evadesim::output::{
    fmt_g, write_drift, write_grid, write_hetero, write_network, write_single, write_sweep,
    write_table1,
};
use evadesim::stochastic::{beta_2_3_sample, Purpose, StreamKey};
use tempfile::NamedTempFile;

use crate::args::{Command, RunConfig};

type Writer<'a> = Box<dyn FnOnce(&mut dyn Write) -> std::io::Result<()> + 'a>;

/// Write every output to a temporary file beside its target, then rename all
/// of them into place. Nothing is left behind if any write fails.
fn write_outputs(outputs: Vec<(PathBuf, Writer<'_>)>) -> Result<()> {
    let mut staged = Vec::with_capacity(outputs.len());
    for (path, write) in outputs {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let tmp = NamedTempFile::new_in(&dir)
            .with_context(|| format!("cannot create a file in {}", dir.display()))?;
        let mut w = BufWriter::new(tmp);
        write(&mut w).with_context(|| format!("writing {}", path.display()))?;
        let tmp = w
            .into_inner()
            .map_err(|e| e.into_error())
            .with_context(|| format!("writing {}", path.display()))?;
        staged.push((path, tmp));
    }
    let mut placed: Vec<PathBuf> = Vec::new();
    for (path, tmp) in staged {
        if let Err(e) = tmp.persist(&path) {
            for p in &placed {
                let _ = std::fs::remove_file(p);
            }
            return Err(e.error).with_context(|| format!("cannot write {}", path.display()));
        }
        placed.push(path);
    }
    Ok(())
}

fn grid_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map_or("hetero".into(), |s| s.to_string_lossy());
    out.with_file_name(format!("{stem}_grid.csv"))
}

fn analytic_summary(cfg: &RunConfig) -> Result<String> {
    let p = &cfg.params;
    let d = analytic::drift(p);
    let comply = match analytic::expected_compliance_time(p) {
        Measure::Finite(t) => fmt_g(t),
        Measure::Infinite => "never complies".into(),
    };
    Ok(format!(
        "drift={} regime={} expected_compliance_time={} optimal_tau={}",
        fmt_g(d.drift),
        d.regime,
        comply,
        fmt_g(analytic::optimal_tax_rate(p.k, p.lambda)?)
    ))
}

fn network_config(cfg: &RunConfig, n: usize) -> NetworkConfig {
    let mut net = NetworkConfig::homogeneous(cfg.params);
    if let Some(beta) = cfg.beta {
        net = net.with_rule(DecisionRule::Probabilistic { beta });
    }
    if cfg.hetero_k {
        net = net.with_k_overrides(beta_2_3_sample(
            StreamKey::new(cfg.seed, 0, 0, Purpose::Parameter),
            n,
        ));
    }
    net
}

fn out_path(cfg: &RunConfig) -> Result<&Path> {
    match &cfg.out {
        Some(p) => Ok(p),
        None => bail!("{} needs an output path", cfg.command.name()),
    }
}

/// Run one command, write its CSV output and return a one-line summary.
pub fn run(cfg: &RunConfig) -> Result<String> {
    let mut summary = analytic_summary(cfg)?;
    match cfg.command {
        Command::Analytic => {
            if let Some(out) = &cfg.out {
                let curves = exp_drift_curves(cfg.params.k, cfg.params.lambda, &cfg.tau_grid)?;
                write_outputs(vec![(out.clone(), Box::new(|w| write_drift(w, &curves)))])?;
                summary += &format!(" wrote={}", out.display());
            }
        }
        Command::Single => {
            let out = out_path(cfg)?;
            let runs = exp_single_trajectories(&[cfg.params], cfg.horizon, cfg.seed)?;
            let run = &runs[0];
            let last = run.outcomes.last().expect("horizon >= 1");
            write_outputs(vec![(
                out.to_path_buf(),
                Box::new(|w| write_single(w, run)),
            )])?;
            summary += &format!(
                " final_pf={} evasions={} wrote={}",
                fmt_g(last.state.pf),
                last.state.n_total,
                out.display()
            );
        }
        Command::Network => {
            let out = out_path(cfg)?;
            let graph = cfg
                .topology
                .build()
                .with_context(|| format!("loading topology {}", cfg.topology))?;
            let net = network_config(cfg, graph.node_count());
            let trajectories = run_network(&net, &graph, cfg.horizon, cfg.seed)?;
            let final_evaders = trajectories
                .iter()
                .filter(|t| t.last().is_some_and(|o| o.evaded))
                .count();
            write_outputs(vec![(
                out.to_path_buf(),
                Box::new(|w| write_network(w, &trajectories)),
            )])?;
            summary += &format!(
                " nodes={} final_evaders={final_evaders} wrote={}",
                graph.node_count(),
                out.display()
            );
        }
        Command::Sweep => {
            let out = out_path(cfg)?;
            let n = match &cfg.topology {
                Topology::EdgeList(_) => cfg
                    .topology
                    .build()
                    .with_context(|| format!("loading topology {}", cfg.topology))?
                    .node_count(),
                Topology::Star(n) => *n,
                Topology::Torus { width, height } => width * height,
            };
            let spec = SweepSpec {
                tau_grid: cfg.tau_grid.clone(),
                topology: cfg.topology.clone(),
                replicates: cfg.replicates,
                horizon: cfg.horizon,
                base: network_config(cfg, n),
            };
            let sweep = exp_tau_sweep(&spec, cfg.seed)?;
            let best = sweep.argmin().expect("non-empty grid");
            summary += &format!(
                " min_avg_evaders={} at_tau={} wrote={}",
                fmt_g(best.avg_evaders),
                fmt_g(best.tau),
                out.display()
            );
            write_outputs(vec![(
                out.to_path_buf(),
                Box::new(|w| write_sweep(w, &sweep)),
            )])?;
        }
        Command::Table1 => {
            let out = out_path(cfg)?;
            let Topology::Star(nodes) = cfg.topology else {
                bail!("table1 needs a star topology");
            };
            let t1 = Table1Config {
                nodes,
                params: cfg.params,
                replicates: cfg.replicates,
                cap: cfg.horizon as u64,
            };
            let table = table1_with(&t1, cfg.seed)?;
            summary += &format!(
                " grand_mean={} grand_sd={} naive_estimate={} wrote={}",
                fmt_g(table.grand.mean),
                fmt_g(table.grand.sd),
                fmt_g(table.naive_estimate),
                out.display()
            );
            write_outputs(vec![(
                out.to_path_buf(),
                Box::new(|w| write_table1(w, &table)),
            )])?;
        }
        Command::Hetero => {
            let out = out_path(cfg)?;
            let Topology::Torus { width, height } = cfg.topology else {
                bail!("hetero needs a torus topology");
            };
            let hc = HeteroConfig {
                width,
                height,
                params: cfg.params,
                iterations: cfg.horizon,
            };
            let hetero = hetero_with(&hc, cfg.seed)?;
            let grid = hetero.grid();
            let grid_out = grid_path(out);
            summary += &format!(
                " own_k_spearman={} wrote={},{}",
                fmt_g(hetero.own_k_correlation()),
                out.display(),
                grid_out.display()
            );
            write_outputs(vec![
                (out.to_path_buf(), Box::new(|w| write_hetero(w, &hetero))),
                (grid_out, Box::new(|w| write_grid(w, &grid))),
            ])?;
        }
    }
    Ok(summary)
}
