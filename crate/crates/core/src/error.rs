use thiserror::Error;

/// Errors raised by the scattering pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is not unitary: |U*U - I| = {residual:e}")]
    NonUnitary { residual: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("eigendecomposition failed: {0}")]
    EigendecompositionFailure(String),

    #[error("ODE integration failed near x = {x}: {reason}")]
    IntegrationFailure { x: f64, reason: String },

    #[error("Jost solution requested at Im k = {im} < 0")]
    UnsupportedK { im: f64 },

    #[error("M_-(k) is numerically singular at k = {k} (condition {condition:e})")]
    SingularMinus { k: f64, condition: f64 },

    #[error("bound-state scan too coarse near kappa = {kappa}")]
    RangeTooCoarse { kappa: f64 },

    #[error("kappa = {kappa} is not a root (residual {residual:e})")]
    NotARoot { kappa: f64, residual: f64 },

    #[error("B_l is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    IndefiniteB { min_eigenvalue: f64 },

    #[error("scattering data does not decay: |S(k_max) - Uhat| = {residual:e}")]
    InsufficientDecay { residual: f64 },

    #[error("Marchenko system is ill-conditioned (estimate {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("grid too coarse to differentiate K(x,x) (roughness {roughness:e})")]
    GridTooCoarse { roughness: f64 },

    #[error("Psi(0) + i Psi_x(0) singular at every probe frequency")]
    SingularDenominator,

    #[error("scattering matrix is not diagonal (relative off-diagonal mass {mass:e})")]
    NotDiagonal { mass: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("inadmissible scattering data: {0}")]
    Inadmissible(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),
}

pub type Result<T> = std::result::Result<T, Error>;
