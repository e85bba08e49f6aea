//! Exact symbolic computation of the generalized Euler-Poincaré characteristic
//! (ordinary and equivariant) of real algebraic and semi-algebraic sets cut out
//! by polynomials symmetric in blocks of variables.
//!
//! All arithmetic is exact: rationals extended by ordered towers of
//! infinitesimals. No floating point anywhere.

pub mod scalars;
pub mod window;
pub mod polys;
pub mod realroots;
pub mod zerodim;
pub mod equivariant;
pub mod euler;
pub mod veritas;

// re-exports grow as modules land
pub use polys::{BlockSpec, SparsePoly};
pub use scalars::{FieldTowerElement, InfinitesimalTower, Sign};

/// Errors surfaced by the public operations.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("tower mismatch: {0}")]
    TowerMismatch(String),
    #[error("element is unbounded over the subtower (symbol {0})")]
    UnboundedElement(String),
    #[error("variable clash: {0}")]
    VariableClash(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("system is not zero-dimensional")]
    NotZeroDimensional,
    #[error("degenerate Hessian at a sampled critical point")]
    DegenerateHessian,
    #[error("singular adapted matrix (internal error)")]
    SingularMatrix,
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
