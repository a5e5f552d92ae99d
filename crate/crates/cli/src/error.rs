use std::fmt;

use papsim_core::Error;

/// Failure of a CLI run; maps to an exit code and a one-line stderr tag.
#[derive(Debug)]
pub enum CliError {
    Config { tag: &'static str, msg: String },
    Core(Error),
}

impl CliError {
    pub fn config(tag: &'static str, msg: impl Into<String>) -> Self {
        CliError::Config { tag, msg: msg.into() }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            CliError::Config { tag, .. } => tag,
            CliError::Core(e) => match e {
                Error::Domain(_) => "DOMAIN",
                Error::InvalidInput(_) => "INVALID_INPUT",
                Error::Dimension(_) => "UNIT",
                Error::Parse { .. } => "POTENTIAL_PARSE",
                Error::Config(_) => "CONFIG_INVALID",
                Error::Convergence(_) => "NONCONVERGENCE",
                Error::Calibration(_) => "CALIBRATION",
                Error::Stiffness { .. } => "STIFFNESS",
                Error::Tolerance(_) => "TOLERANCE",
                Error::Io(_) => "IO",
            },
        }
    }

    /// 3 for numerical failures, 2 for everything the user can fix in the input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config { msg, .. } => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}
