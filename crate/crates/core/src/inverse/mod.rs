//! The inverse problem: from scattering data to `(Q, U)`.

pub mod fourier;
pub mod marchenko;
pub mod reconstruct;

pub use fourier::{kernel_G, GFunction};
pub use marchenko::{marchenko_solve, nested_solve, truncation_length, KernelRow, MarchenkoKernel, NestedSolution, NystromRule};
pub use reconstruct::{
    invert_full, probe_indices, recover_boundary, recover_potential, relative_l2_error, screen_data, BoundaryRecovery,
    Diagnostics, InverseOptions, KernelMethod, PotentialRecovery, ReconstructionResult,
};
