//! Error type shared across the crate.

/// Errors surfaced by constructors, operators, and experiment runners.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A distribution failed validation (support outside [0,1], bad mass, ...).
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// A config value is inconsistent; the message carries the field path.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An operation was evaluated outside its domain (e.g. conditional mean at p = 0).
    #[error("domain error: {0}")]
    Domain(String),

    /// Mechanism or strategy state is inconsistent (e.g. K[t-1] > t-1).
    #[error("state error: {0}")]
    State(String),

    /// Subset enumeration would exceed the configured cap.
    #[error("subset enumeration cap exceeded: n = {n} > cap = {cap}; pass a larger cap explicitly if this is intended")]
    CapExceeded { n: usize, cap: usize },

    /// An internal invariant that should hold by theory failed; report the context.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    /// Filesystem or serialization failure while emitting results.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
