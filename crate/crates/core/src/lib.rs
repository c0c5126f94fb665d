//! Direct and inverse scattering for the matrix Schrödinger operator
//! `−d²/dx² + Q(x)` on the half-line with selfadjoint boundary conditions
//! `(i/2)(U† − I) f(0) + (1/2)(U† + I) f'(0) = 0`.
//!
//! The direct problem maps `(Q, U)` to scattering data `{S(k); κ_l, C_l}`;
//! the inverse problem solves the Marchenko equation for the transformation
//! kernel `K(x, y)` and recovers both `Q` and `U` from it.

// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod direct;
pub mod error;
pub mod grid;
pub mod inverse;
pub mod linalg;
pub mod ode;
pub mod potential;
pub mod quadrature;
pub mod star;

pub use boundary::{build_boundary, compute_uhat, boundary_residual, BoundaryCondition};
pub use error::{Error, Result};
pub use grid::{KGrid, XGrid};
pub use linalg::{CMat, C64};
pub use potential::{validate_potential, Bump, PotentialForm, PotentialSpec, ValidationReport};
pub use direct::{BoundStateData, ScatteringData};
pub use inverse::{MarchenkoKernel, ReconstructionResult};
pub use star::StarScatteringData;
