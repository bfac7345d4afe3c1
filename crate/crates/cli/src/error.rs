use std::fmt;

use erw_core::Error;

/// Command failures with their exit codes.
#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::InvalidParams(_) | Error::Grammar(_) | Error::InconsistentHistory { .. } | Error::Domain(_)) => 2,
            CliError::Core(Error::Unsupported(_) | Error::Capacity(_)) => 3,
            CliError::Core(Error::NoFormula(_)) => 4,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn hint(&self) -> Option<&'static str> {
        match self {
            CliError::Core(Error::NoFormula(_)) => {
                Some("hint: compute the exact law or moments instead with `erw exact --method enum|dp|moments`")
            }
            CliError::Core(Error::Unsupported(_)) => {
                Some("hint: `enum` handles every model up to n = 24; `power` gives moments for full and skipfirst")
            }
            _ => None,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}
