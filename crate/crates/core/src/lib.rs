//! Discrete-time model of income tax evasion under back-auditing.
//!
//! A taxpayer earns a unit income each step, evades whenever the cumulative
//! profit from evasion is positive, and on audit repays every evaded tax since
//! the previous audit times a penalty multiplier, capped by their fortune.
//!
//! The crate is organised bottom-up:
//!
//! - [`taxpayer`]: the single-taxpayer state machine.
//! - [`analytic`]: closed-form drift, compliance time and optimal tax rate.
//! - [`graph`] and [`network`]: taxpayer graphs and the multi-taxpayer engine.
//! - [`stochastic`]: keyed, reproducible random streams.
//! - [`experiments`]: scenario runners and summary statistics.
//! - [`output`]: CSV writers for experiment results.

pub mod analytic;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod network;
pub mod output;
pub mod stochastic;
pub mod taxpayer;

pub use analytic::{DriftReport, Measure, Regime};
pub use error::{Error, Result};
pub use graph::Graph;
pub use network::{DecisionRule, NetworkConfig, NetworkSim, NetworkState};
pub use stochastic::{Purpose, StreamKey};
pub use taxpayer::{StepOutcome, TaxpayerParams, TaxpayerState};
