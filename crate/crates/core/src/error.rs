use std::fmt;

/// Errors raised across the crate.
///
/// The variants map onto the exit-code classes of the command line tool:
/// `InvalidParams` and `Grammar` are usage errors, `Unsupported` and
/// `Capacity` are capability refusals, `NoFormula` means the analytic
/// catalog has no entry for the request.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates a type invariant.
    InvalidParams(String),
    /// A model or multiplier string does not parse.
    Grammar(String),
    /// A history does not match the memory rule it is used with.
    InconsistentHistory { expected: usize, found: usize },
    /// The method cannot handle this model or size.
    Unsupported(String),
    /// A request would exceed a resource cap.
    Capacity(String),
    /// No closed form or limit law is known for this request.
    NoFormula(String),
    /// A numerical routine was called outside its domain.
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            Error::Grammar(msg) => write!(f, "parse error: {msg}"),
            Error::InconsistentHistory { expected, found } => write!(
                f,
                "inconsistent history: memory holds {expected} steps but window has {found}"
            ),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::Capacity(msg) => write!(f, "capacity exceeded: {msg}"),
            Error::NoFormula(msg) => write!(f, "no formula in catalog: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}
