//! The direct problem: from `(Q, U)` to scattering data.

pub mod bound;
pub mod jost;
pub mod scattering;

pub use bound::{
    check_no_virtual_levels, find_bound_states, normalization_matrices, pole_profile, BoundState,
    BoundStateData, KappaRange, PoleSample, VirtualLevelReport,
};
pub use jost::{jost_at_origin, jost_identity_residuals, jost_solution, wronskian, JostData, JostSamples};
pub use scattering::{
    compute_scattering_data, free_jost, m_matrices, m_minus_at, scattered_wave, scattering_data_from_table,
    scattering_matrix, standard_solutions, xi_from_jost, JostTable, ScatteredWave, ScatteringData,
    StandardSolutions,
};
