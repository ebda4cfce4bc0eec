use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Inconsistent sizes or out-of-range indices.
    #[error("structural error: {0}")]
    Structural(String),

    /// Lattice construction could not satisfy its parameters.
    #[error("build error: {0}")]
    Build(String),

    /// Exact enumeration refused because the model exceeds a hard limit.
    #[error("{what} = {got} exceeds the enumeration limit of {limit}")]
    SizeGuard { what: &'static str, limit: usize, got: usize },

    /// Invalid run or diagnostics parameters.
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
