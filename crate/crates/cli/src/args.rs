//! Command-line and config-file parsing.
//!
//! Precedence, highest first: command-line flag, config file, per-command
//! default. The seed additionally falls back to `EVADESIM_SEED` before the
//! built-in default.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use evadesim::experiments::{parse_tau_grid, Topology};
use evadesim::TaxpayerParams;
use serde::Deserialize;

pub const DEFAULT_SEED: u64 = 1;
pub const SEED_ENV: &str = "EVADESIM_SEED";

#[derive(Parser, Debug)]
#[command(
    name = "evadesim",
    version,
    about = "Simulate income tax evasion under back-auditing",
    after_help = "Seeds fall back to the EVADESIM_SEED environment variable, then to 1."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    options: Options,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// One taxpayer: per-step trajectory CSV
    Single,
    /// A taxpayer network: per-step, per-taxpayer trajectory CSV
    Network,
    /// Average evader count against tax rate
    Sweep,
    /// Last-evasion times on a star network, summarised per node
    Table1,
    /// Heterogeneous Beta(2,3) savings rates on a torus
    Hetero,
    /// Closed-form drift, compliance time and optimal tax rate
    Analytic,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Single => "single",
            Command::Network => "network",
            Command::Sweep => "sweep",
            Command::Table1 => "table1",
            Command::Hetero => "hetero",
            Command::Analytic => "analytic",
        }
    }
}

/// Every setting, as given on the command line or in a config file.
#[derive(Args, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct Options {
    /// Tax rate, in (0, 1)
    #[arg(long, global = true, value_parser = open_unit)]
    tau: Option<f64>,

    /// Savings rate, in (0, 1)
    #[arg(long, global = true, value_parser = open_unit)]
    k: Option<f64>,

    /// Per-step audit probability, in (0, 1)
    #[arg(long, global = true, value_parser = open_unit)]
    p: Option<f64>,

    /// Penalty multiplier, greater than 1
    #[arg(long, global = true, value_parser = above_one)]
    lambda: Option<f64>,

    /// Initial evasion profit, positive
    #[arg(long, global = true, value_parser = positive)]
    pf0: Option<f64>,

    /// Steps to simulate (for table1: the step cap per replicate)
    #[arg(long, global = true, value_parser = at_least_one)]
    horizon: Option<usize>,

    /// Random seed (decimal 64-bit)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Independent replicates
    #[arg(long, global = true, value_parser = at_least_one)]
    replicates: Option<usize>,

    /// Network: star:<n>, torus:<w>x<h> or edges:<path>
    #[arg(long, global = true, value_parser = topology)]
    #[serde(default, deserialize_with = "de_topology")]
    topology: Option<Topology>,

    /// Tax-rate grid: start:stop:step (inclusive) or a comma list
    #[arg(long, global = true, value_parser = tau_grid)]
    #[serde(default, deserialize_with = "de_tau_grid")]
    tau_grid: Option<TauGrid>,

    /// Use the probabilistic evasion rule with this inverse temperature
    #[arg(long, global = true, value_parser = non_negative)]
    beta: Option<f64>,

    /// Draw each taxpayer's savings rate from Beta(2,3)
    #[arg(long, global = true)]
    #[serde(default)]
    hetero_k: bool,

    /// Output CSV path
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Flat TOML file with any of the settings above, e.g. `tau = 0.3`
    #[arg(long, global = true)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

/// Parsed `--tau-grid` value; a newtype so clap treats it as one argument.
#[derive(Debug, Clone, PartialEq)]
struct TauGrid(Vec<f64>);

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: TaxpayerParams,
    pub topology: Topology,
    pub horizon: usize,
    pub replicates: usize,
    pub seed: u64,
    pub tau_grid: Vec<f64>,
    pub beta: Option<f64>,
    pub hetero_k: bool,
    /// `None` only for `analytic` without `--out`.
    pub out: Option<PathBuf>,
}

struct Defaults {
    params: TaxpayerParams,
    topology: Topology,
    horizon: usize,
    replicates: usize,
    tau_grid: &'static str,
}

fn defaults(command: Command) -> Defaults {
    let single = TaxpayerParams::reference(0.3);
    let network = single.with_pf0(1.0);
    let star = Topology::Star(10);
    let torus = Topology::Torus {
        width: 10,
        height: 10,
    };
    let (params, topology, horizon, replicates) = match command {
        Command::Single | Command::Analytic => (single, star, 2000, 1),
        Command::Network | Command::Sweep => (network, star, 1000, 1),
        Command::Table1 => (network, star, 1_000_000, 50),
        Command::Hetero => (TaxpayerParams { p: 0.1, ..network }, torus, 10_000, 1),
    };
    Defaults {
        params,
        topology,
        horizon,
        replicates,
        tau_grid: match command {
            Command::Analytic => "0.01:0.48:0.01",
            _ => "0.02:0.48:0.02",
        },
    }
}

pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let file = match &cli.options.config {
        Some(path) => read_config(path)?,
        None => Options::default(),
    };
    resolve(cli.command, cli.options, file)
}

fn read_config(path: &Path) -> Result<Options, clap::Error> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        usage_error(
            ErrorKind::Io,
            format!("cannot read config {}: {e}", path.display()),
        )
    })?;
    toml::from_str(&text).map_err(|e| {
        usage_error(
            ErrorKind::ValueValidation,
            format!("invalid config {}: {e}", path.display()),
        )
    })
}

fn resolve(command: Command, flags: Options, file: Options) -> Result<RunConfig, clap::Error> {
    let d = defaults(command);
    let params = TaxpayerParams {
        tau: flags.tau.or(file.tau).unwrap_or(d.params.tau),
        k: flags.k.or(file.k).unwrap_or(d.params.k),
        p: flags.p.or(file.p).unwrap_or(d.params.p),
        lambda: flags.lambda.or(file.lambda).unwrap_or(d.params.lambda),
        pf0: flags.pf0.or(file.pf0).unwrap_or(d.params.pf0),
    };
    // Config-file values bypass the flag parsers.
    params
        .validate()
        .map_err(|e| usage_error(ErrorKind::ValueValidation, e.to_string()))?;

    let env_seed = match std::env::var(SEED_ENV) {
        Ok(s) => Some(s.trim().parse::<u64>().map_err(|_| {
            usage_error(
                ErrorKind::ValueValidation,
                format!("{SEED_ENV}=`{s}` is not a decimal 64-bit seed"),
            )
        })?),
        Err(_) => None,
    };
    let seed = flags
        .seed
        .or(file.seed)
        .or(env_seed)
        .unwrap_or(DEFAULT_SEED);

    let horizon = flags.horizon.or(file.horizon).unwrap_or(d.horizon);
    let replicates = flags.replicates.or(file.replicates).unwrap_or(d.replicates);
    for (name, v) in [("horizon", horizon), ("replicates", replicates)] {
        if v == 0 {
            return Err(usage_error(
                ErrorKind::ValueValidation,
                format!("{name} must be at least 1"),
            ));
        }
    }
    let beta = flags.beta.or(file.beta);
    if let Some(b) = beta {
        non_negative(&b.to_string()).map_err(|e| usage_error(ErrorKind::ValueValidation, e))?;
    }

    let topology = flags.topology.or(file.topology).unwrap_or(d.topology);
    match (command, &topology) {
        (Command::Table1, Topology::Star(_)) | (Command::Hetero, Topology::Torus { .. }) => {}
        (Command::Table1, t) | (Command::Hetero, t) => {
            return Err(usage_error(
                ErrorKind::ValueValidation,
                format!("{} does not support topology {t}", command.name()),
            ))
        }
        _ => {}
    }

    let tau_grid = match flags.tau_grid.or(file.tau_grid) {
        Some(TauGrid(g)) => g,
        None => parse_tau_grid(d.tau_grid).expect("default grid is valid"),
    };

    let out = flags.out.or(file.out).or_else(|| match command {
        Command::Analytic => None,
        c => Some(PathBuf::from(format!("{}.csv", c.name()))),
    });

    Ok(RunConfig {
        command,
        params,
        topology,
        horizon,
        replicates,
        seed,
        tau_grid,
        beta,
        hetero_k: flags.hetero_k || file.hetero_k,
        out,
    })
}

fn usage_error(kind: ErrorKind, msg: impl std::fmt::Display) -> clap::Error {
    Cli::command().error(kind, msg)
}

fn number(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .map_err(|_| format!("`{s}` is not a number"))
}

fn open_unit(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1)"))
    }
}

fn above_one(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v > 1.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be greater than 1"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be positive"))
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be a finite non-negative number"))
    }
}

fn at_least_one(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(format!("`{s}` must be an integer of at least 1")),
    }
}

fn topology(s: &str) -> Result<Topology, String> {
    s.parse().map_err(|e: evadesim::Error| e.to_string())
}

fn tau_grid(s: &str) -> Result<TauGrid, String> {
    parse_tau_grid(s).map(TauGrid).map_err(|e| e.to_string())
}

fn de_topology<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<Topology>, D::Error> {
    let s = String::deserialize(d)?;
    topology(&s).map(Some).map_err(serde::de::Error::custom)
}

fn de_tau_grid<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<TauGrid>, D::Error> {
    let s = String::deserialize(d)?;
    tau_grid(&s).map(Some).map_err(serde::de::Error::custom)
}
