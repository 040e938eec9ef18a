//! Error type shared by every module.

use thiserror::Error;

/// Failure modes of the library. Variants are grouped by how a caller should react:
/// input problems, fence problems, and internal invariant breaches.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("duplicate cell id `{0}`")]
    DuplicateCell(String),
    #[error("cell `{cell}` lists facet `{facet}` of wrong dimension")]
    WrongFacetDim { cell: String, facet: String },
    #[error("cell `{cell}` of dimension {dim} has {count} facets, expected {expected}")]
    WrongFacetCount { cell: String, dim: usize, count: usize, expected: usize },
    #[error("cell `{cell}` lists dangling facet `{facet}`")]
    DanglingFacet { cell: String, facet: String },
    #[error("face relation is not antisymmetric between `{0}` and `{1}`")]
    NotAntisymmetric(String, String),
    #[error("unknown cell `{0}`")]
    UnknownCell(String),
    #[error("unknown multivector {0}")]
    UnknownMultivector(usize),
    #[error("not a partition: {0}")]
    NotPartition(String),
    #[error("multivector containing `{0}` is not locally closed")]
    NotLocallyClosed(String),
    #[error("fields live on different complexes")]
    DifferentComplexes,
    #[error("not an isolating block: {0}")]
    NotIsolatingBlock(String),
    #[error("set is not closed: {0}")]
    NotClosed(String),
    #[error("inclusion fails: {0}")]
    NotSubset(String),
    #[error("index pair violation: {0}")]
    IndexPair(String),
    #[error("invalid block decomposition: {0}")]
    BlockDecomposition(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("fence violation at lambda {lambda}: fields {lambda} and {} are incomparable", lambda + 1)]
    Fence { lambda: usize },
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("internal invariant breach: {0}")]
    Internal(String),
}

impl Error {
    /// True for errors caused by malformed or inconsistent input data.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Fence { .. } | Error::Internal(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Returns `Error::Internal` unless `cond` holds.
pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Internal(msg()))
    }
}
