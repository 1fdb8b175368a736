//! Algebra on the model coefficients: regimes, homogeneous equilibria,
//! boundedness and stability hypotheses, and the Lyapunov weight matrices.

mod equilibrium;
mod hypothesis;
mod matrix;
mod reduction;
mod regime;
mod stability;

pub use equilibrium::{
    coexistence_equilibrium, semitrivial_equilibrium, Equilibrium, EquilibriumKind,
};
pub use hypothesis::{
    check_boundedness, signed_parts, BoundednessOptions, ConditionRecord, HypothesisReport,
    DEFAULT_C_P,
};
pub use matrix::{is_positive_definite, SymMatrix};
pub use reduction::{reduce_tello_winkler, TelloWinklerPatch};
pub use regime::{classify_regime, Regime, RegimeKind};
pub use stability::{
    build_matrices, check_stability, compute_varpi, delta_interval, DeltaWindow, StabilityCase,
    StabilityCertificate, StabilityCheck, Varpi,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("linear system for the equilibrium is singular")]
    SingularSystem,
    #[error("equilibrium has a nonpositive component (u = {u}, v = {v})")]
    NonpositiveEquilibrium { u: f64, v: f64 },
    #[error("exponent p = {p_exp} must exceed the dimension {dim}")]
    InvalidExponent { p_exp: f64, dim: usize },
    #[error("spatial dimension must be at least 1")]
    InvalidDimension,
    #[error("regularity constant must be positive and finite, got {0}")]
    InvalidConstant(f64),
    #[error("admissible delta window is empty: lo = {lo}, hi = {hi}")]
    EmptyWindow { lo: f64, hi: f64 },
    #[error("delta must be positive and finite, got {0}")]
    InvalidDelta(f64),
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("precondition failed: {0}")]
    RegimeMismatch(String),
}
