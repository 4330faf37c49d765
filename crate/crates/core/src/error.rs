use std::path::PathBuf;

use crate::c64;

/// Errors produced by the solvers, kernels and problem constructors.
#[derive(Debug, thiserror::Error)]
pub enum NepError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("T(λ) vanishes identically at λ = {0} (zero Frobenius norm)")]
    DegenerateProblem(c64),

    #[error("all singular values were filtered out; no eigenvalues detected inside the contour")]
    EmptySubspace,

    #[error(
        "QR factor is numerically rank deficient at column {column} (|r_ii| = {value:e}); \
         retry with the svd linearization"
    )]
    RankDeficient { column: usize, value: f64 },

    #[error("triangular factor is singular at diagonal entry {0}")]
    SingularTriangular(usize),

    #[error("dense eigensolver failed to converge on a {0}x{0} matrix")]
    EigenNonConvergence(usize),

    #[error("singular value decomposition failed to converge on a {rows}x{cols} matrix")]
    SvdNonConvergence { rows: usize, cols: usize },

    #[error("T(z) is numerically singular at z = {0}")]
    Singular(c64),

    #[error("T(z) is singular at quadrature node {node} (z = {z}); a node sits on or next to an eigenvalue")]
    NodeSingular { node: usize, z: c64 },

    #[error("Ritz value {pair} ({lambda}) lies within {distance:e} of quadrature node {node}")]
    NearPole {
        node: usize,
        pair: usize,
        lambda: c64,
        distance: f64,
    },

    #[error("no candidate eigenpairs survived filtering in the higher-moment pass")]
    DeflationUnderflow,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = NepError> = std::result::Result<T, E>;

impl NepError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        NepError::InvalidParameter(msg.into())
    }
}
