//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by instance validation, oracles, matroids, and solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// An element id is outside the ground set `{0, …, n−1}`.
    #[error("element {id} out of range for ground set of size {n}")]
    InvalidElement { id: usize, n: usize },

    /// An oracle was queried with ids outside its dimensions, or its data is
    /// internally inconsistent.
    #[error("invalid oracle: {0}")]
    InvalidOracle(String),

    /// A document or constructor argument violates a structural invariant.
    #[error("validation failed for `{field}`: {message}")]
    Validation { field: &'static str, message: String },

    /// The input document is not syntactically well formed.
    #[error("parse error: {0}")]
    Parse(String),

    /// A caller violated an operation's precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A matroid implementation failed to deliver an exchange guaranteed by
    /// the matroid axioms; signals a broken independence oracle.
    #[error("matroid contract violation: {0}")]
    MatroidContract(String),

    /// The requested computation exceeds a hard resource cap.
    #[error("resource limit: {0}")]
    Resource(String),

    /// An argument is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
