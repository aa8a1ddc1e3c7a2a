use thiserror::Error;

/// Errors raised by the numerical routines and their input validation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {found} is below the minimum {min}")]
    DimensionTooSmall { min: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("vector norm {norm} is not 1")]
    NotNormalized { norm: f64 },

    #[error("vector {index} is numerically dependent on the preceding vectors")]
    RankDeficient { index: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("vectors are not orthonormal (max overlap {overlap:e})")]
    NotOrthonormal { overlap: f64 },

    #[error("wedge norm {wedge_norm:e} is too small; the deficit is not differentiable here")]
    SingularConfiguration { wedge_norm: f64 },

    #[error("entry ({i},{j}) = {value} is negative")]
    NegativeEntry { i: usize, j: usize, value: f64 },

    #[error("entries ({i},{j}) and ({j},{i}) differ")]
    Asymmetric { i: usize, j: usize },

    #[error("diagonal entry ({i},{i}) = {value} is not zero")]
    NonzeroDiagonal { i: usize, value: f64 },

    #[error("{name} = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("pair ({i},{j}) is not a valid pair index for n = {n}")]
    InvalidPair { i: usize, j: usize, n: usize },

    #[error("operator is not carried in diagonal form")]
    NotDiagonalForm,

    #[error("re-evaluated deficit {recomputed:e} disagrees with reported {reported:e}")]
    Verification { reported: f64, recomputed: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
