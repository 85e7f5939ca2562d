use thiserror::Error;

/// Errors raised while constructing or transforming states and measures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("party dimensions must be a nonempty list with every entry >= 2, got {0:?}")]
    InvalidDims(Vec<usize>),

    #[error("amplitude vector has length {got}, expected {expected} for dims {dims:?}")]
    LengthMismatch {
        dims: Vec<usize>,
        expected: usize,
        got: usize,
    },

    #[error("state norm is {norm}, further than {tol} from 1")]
    NotNormalized { norm: f64, tol: f64 },

    #[error("matrix is not Hermitian: max |M - M^dag| element is {deviation}")]
    NotHermitian { deviation: f64 },

    #[error("matrix trace is {trace}, further than {tol} from 1")]
    TraceNotOne { trace: f64, tol: f64 },

    #[error("matrix is not positive semidefinite: smallest eigenvalue {eigenvalue}")]
    NotPositive { eigenvalue: f64 },

    #[error("matrix must be square with side {expected}, got {rows}x{cols}")]
    NotSquare {
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("party indices {indices:?} invalid for {n_parties} parties")]
    InvalidParties {
        indices: Vec<usize>,
        n_parties: usize,
    },

    #[error("bipartition must leave both sides nonempty (focus {focus:?} of {n_parties} parties)")]
    EmptyBipartition { focus: Vec<usize>, n_parties: usize },

    #[error("operation requires {expected} parties, state has {got}")]
    WrongPartyCount { expected: usize, got: usize },

    #[error("operation requires party dimensions {expected:?}, state has {got:?}")]
    WrongDims {
        expected: Vec<usize>,
        got: Vec<usize>,
    },

    #[error("permutation {perm:?} is not a bijection on {n_parties} parties")]
    InvalidPermutation { perm: Vec<usize>, n_parties: usize },

    #[error("singular value decomposition failed to converge")]
    SvdFailed,

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
