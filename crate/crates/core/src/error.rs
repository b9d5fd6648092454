use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{name}` = {value} is outside {bound}")]
    Parameter {
        name: &'static str,
        value: f64,
        bound: &'static str,
    },

    #[error("a run needs a horizon of at least one step")]
    EmptyRun,

    #[error("audit stream ended after {got} draws, {needed} needed")]
    AuditStreamTooShort { needed: usize, got: usize },

    #[error("{what} must be at least {min}, got {got}")]
    InvalidSize {
        what: &'static str,
        min: usize,
        got: usize,
    },

    #[error("self-loop at node {0}")]
    SelfLoop(usize),

    #[error("node {node} is out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("{what} has length {got}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("naive compliance estimate is undefined for non-negative drift {drift}")]
    UndefinedEstimate { drift: f64 },

    #[error("cannot summarise an empty sample")]
    EmptyInput,

    #[error("{0}")]
    Syntax(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("simulation did not settle within {cap} steps")]
    HorizonExhausted { cap: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter {
            name,
            value,
            bound: "(0, 1)",
        })
    }
}
