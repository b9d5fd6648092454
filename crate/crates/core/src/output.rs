//! CSV writers. Floats use six significant digits in the style of C's `%g`;
//! flags are written as `0`/`1`.

use std::io::{self, Write};

use crate::analytic::Measure;
use crate::experiments::{DriftCurves, Hetero, SingleRun, Sweep, Table1};
use crate::taxpayer::StepOutcome;

pub const SINGLE_HEADER: &str = "t,evaded,audited,repaid,f,pf,n";
pub const NETWORK_HEADER: &str = "t,node,evaded,audited,repaid,f,pf,n";
pub const SWEEP_HEADER: &str = "tau,avg_evaders";
pub const TABLE1_HEADER: &str = "node,mean,sd";
pub const HETERO_HEADER: &str = "node,row,col,k,k_avg,evasions";
pub const DRIFT_HEADER: &str = "tau,drift,noncompliance";

/// Format with six significant digits, switching to exponent notation for
/// magnitudes below 1e-4 or at least 1e6.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn flag(b: bool) -> u8 {
    u8::from(b)
}

fn outcome_fields(o: &StepOutcome) -> String {
    format!(
        "{},{},{},{},{},{}",
        flag(o.evaded),
        flag(o.audited),
        fmt_g(o.repaid),
        fmt_g(o.state.f),
        fmt_g(o.state.pf),
        o.state.n
    )
}

/// One row per step. `t` is the time of the resulting state, so `pf` in row
/// `t` is `pf(t)`; `evaded` and `audited` describe the step from `t - 1`.
pub fn write_single<W: Write>(mut w: W, run: &SingleRun) -> io::Result<()> {
    writeln!(w, "{SINGLE_HEADER}")?;
    for o in &run.outcomes {
        writeln!(w, "{},{}", o.state.t, outcome_fields(o))?;
    }
    Ok(())
}

/// Per-taxpayer trajectories, time-major.
pub fn write_network<W: Write>(mut w: W, trajectories: &[Vec<StepOutcome>]) -> io::Result<()> {
    writeln!(w, "{NETWORK_HEADER}")?;
    let horizon = trajectories.first().map_or(0, Vec::len);
    for step in 0..horizon {
        for (node, traj) in trajectories.iter().enumerate() {
            let o = &traj[step];
            writeln!(w, "{},{node},{}", o.state.t, outcome_fields(o))?;
        }
    }
    Ok(())
}

pub fn write_sweep<W: Write>(mut w: W, sweep: &Sweep) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in &sweep.rows {
        writeln!(w, "{},{}", fmt_g(r.tau), fmt_g(r.avg_evaders))?;
    }
    Ok(())
}

pub fn write_table1<W: Write>(mut w: W, table: &Table1) -> io::Result<()> {
    writeln!(w, "{TABLE1_HEADER}")?;
    for (node, s) in table.per_node.iter().enumerate() {
        writeln!(w, "{node},{},{}", fmt_g(s.mean), fmt_g(s.sd))?;
    }
    Ok(())
}

pub fn write_hetero<W: Write>(mut w: W, hetero: &Hetero) -> io::Result<()> {
    writeln!(w, "{HETERO_HEADER}")?;
    for r in &hetero.rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.node,
            r.row,
            r.col,
            fmt_g(r.k),
            fmt_g(r.k_avg),
            r.evasions
        )?;
    }
    Ok(())
}

/// Evasion counts as a bare integer matrix, one grid row per line.
pub fn write_grid<W: Write>(mut w: W, grid: &[Vec<u64>]) -> io::Result<()> {
    for row in grid {
        let line: Vec<String> = row.iter().map(u64::to_string).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_drift<W: Write>(mut w: W, curves: &DriftCurves) -> io::Result<()> {
    writeln!(w, "{DRIFT_HEADER}")?;
    for r in &curves.rows {
        let nc = match r.noncompliance {
            Measure::Finite(v) => fmt_g(v),
            Measure::Infinite => "inf".into(),
        };
        writeln!(w, "{},{},{nc}", fmt_g(r.tau), fmt_g(r.drift))?;
    }
    Ok(())
}
