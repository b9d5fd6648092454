//! Command-line front end for `evadesim`.

mod args;
mod commands;

pub use args::{parse_args, Command, RunConfig, DEFAULT_SEED, SEED_ENV};
pub use commands::run;
