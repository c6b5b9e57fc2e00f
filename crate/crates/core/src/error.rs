use alloc::string::String;

/// Errors raised by the core operators and solvers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("grid dimensions must be positive, got {rows}x{cols}")]
    InvalidDims { rows: usize, cols: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("edge anchored at ({row}, {col}) is not an interior edge of a {rows}x{cols} grid")]
    InvalidEdge {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "subdomain {index} is {rows}x{cols} pixels; every subdomain needs at least 2x2 pixels \
         for the interface divergence bound to hold"
    )]
    SubdomainTooSmall {
        index: usize,
        rows: usize,
        cols: usize,
    },

    #[error("field is not conforming: interface jump {jump:e} exceeds tolerance {tol:e}")]
    NonConforming { jump: f64, tol: f64 },

    #[error("non-finite value produced by {context}")]
    NonFinite { context: &'static str },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
