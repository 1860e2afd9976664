use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature accuracy failure: achieved {achieved:.3e}, requested {requested:.3e} (estimate {estimate:.6e})")]
    QuadratureAccuracy {
        achieved: f64,
        requested: f64,
        estimate: f64,
    },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("CFL condition violated: dt = {dt:.3e} exceeds {limit:.3e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("solver blow-up at step {step}: value {value:.3e} left the admissible range")]
    BlowUp { step: usize, value: f64 },

    #[error("unknown name: {0}")]
    UnknownName(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}
