use thiserror::Error;

/// Errors produced by the covering-system engines.
///
/// `GuardExceeded` is a recoverable signal: the caller asked for work beyond a
/// configured ceiling and should fall back to a cheaper method (or raise the
/// guard). Every other variant is a genuine failure of the request.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("guard exceeded for {what}: needed {needed}, limit {limit}")]
    GuardExceeded {
        what: &'static str,
        needed: String,
        limit: String,
    },

    #[error("moduli {0} and {1} are not coprime")]
    NotCoprime(u64, u64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("smooth subsystem covers the integers; the bound is inapplicable")]
    SmoothPartCovers,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("scan window {window} is smaller than the largest modulus {needed}")]
    WindowTooSmall { window: u64, needed: u64 },

    #[error("construction depth {requested} exceeds ceiling {ceiling}")]
    CeilingExceeded { requested: u32, ceiling: u32 },

    #[error("prime block for level {level} ran out before all pairs on modulus {modulus} were replaced")]
    XineqViolated { level: u32, modulus: u64 },

    #[error("modulus {0} is not allowed here (pair formula needs every modulus >= 3)")]
    ModulusTooSmall(u64),

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn guard(what: &'static str, needed: impl ToString, limit: impl ToString) -> Self {
        Error::GuardExceeded {
            what,
            needed: needed.to_string(),
            limit: limit.to_string(),
        }
    }

    pub fn is_guard(&self) -> bool {
        matches!(self, Error::GuardExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
