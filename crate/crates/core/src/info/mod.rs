//! Finite-alphabet information measures and the DMC rate expressions.

mod dmc;
mod outer;
mod pmf;
mod search;

pub use dmc::{
    four_phase_rate, proposition1_rate, theorem1_from_joints, theorem1_rate, DmcDims, DmcRateReport, DmcResiduals,
    DmcScheme, PhaseLaw, Stochastic, NAMES_ACTIVE, NAMES_PHASE, NAMES_SILENT, ROW_TOL, SECRECY_TOL,
};
pub use outer::{degradation_residual, dmc_outer_bound, nnls, DmcOuterBound, DEGRADED_TOL, MARKOV_TOL};
pub use pmf::{binary_entropy, conditional_mutual_information, mutual_information, JointPmf, MASS_TOL};
pub use search::{brute_force_best_r2, simplex_grid, BruteForceConfig, BruteForceResult, DmcFamily, X2Search, MAX_ALPHABET, MIN_STEP};
