use num_complex::Complex64;
use thiserror::Error;

use crate::exprfn::ExprError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix has {got} entries, expected {expected}")]
    BadShape { expected: usize, got: usize },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("site {site} out of range for a chain of length {chain_len}")]
    SiteOutOfRange { site: usize, chain_len: usize },

    #[error("matrix is not diagonalizable (projector family residual {residual:.3e})")]
    NotDiagonalizable { residual: f64 },

    #[error("matrix is singular (reciprocal condition {rcond:.3e})")]
    Singular { rcond: f64 },

    #[error("spectral parameter {u} clashes with a pole{}", .context.as_deref().map(|c| format!(" ({c})")).unwrap_or_default())]
    PoleClash {
        u: Complex64,
        context: Option<String>,
    },

    #[error("operator has a pole at u = 0")]
    PoleAtZero,

    #[error("operator has a pole at the braid limit u0 = {0}")]
    PoleAtLimit(Complex64),

    #[error("the u0 = infinity limit needs a caller-supplied scale function")]
    InfinityWithoutScale,

    #[error("expected operator in {expected} form")]
    FormMismatch { expected: &'static str },

    #[error("crossing multiplier for state {state} is zero")]
    BadMultipliers { state: usize },

    #[error("invalid crossing data: {0}")]
    BadCrossingData(String),

    #[error("generator is the zero matrix")]
    ZeroGenerator,

    #[error("fitted parameter {name} is inconsistent (relative residual {residual:.3e})")]
    InconsistentParams { name: &'static str, residual: f64 },

    #[error("expected {expected} distinct eigenvalues, found {found}: {spectrum}")]
    WrongBlockCount {
        expected: usize,
        found: usize,
        spectrum: String,
    },

    #[error("eigenvalue ordering is not a permutation of the spectrum")]
    BadOrdering,

    #[error("zero eigenvalue in the profile")]
    ZeroEigenvalue,

    #[error("leading eigenvalue is zero")]
    ZeroLeadingEigenvalue,

    #[error("middle eigenvalue is zero")]
    ZeroMiddleEigenvalue,

    #[error("BMW parameter m vanishes; E is undefined")]
    ZeroM,

    #[error("loop parameter delta is zero")]
    ZeroDelta,

    #[error("{got} profile functions for {expected} projectors")]
    LengthMismatch { expected: usize, got: usize },

    #[error("y function violates the {convention} convention: {detail}")]
    BadYFunction {
        convention: &'static str,
        detail: String,
    },

    #[error("state space too large: {states} states (limit {limit})")]
    SizeGuard { states: usize, limit: usize },

    #[error("sample grid is empty after pole exclusion")]
    EmptyGrid,

    #[error(transparent)]
    Expr(#[from] ExprError),
}
