use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("calibration failure: {0}")]
    Calibration(String),
    #[error("step size underflow at t = {t:.6e} a.u.: {msg}")]
    Stiffness { t: f64, msg: String },
    #[error("integrator tolerance exceeded: {0}")]
    Tolerance(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of an iterative numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Convergence(_) | Error::Calibration(_) | Error::Stiffness { .. } | Error::Tolerance(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
