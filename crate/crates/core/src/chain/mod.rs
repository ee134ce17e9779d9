//! Ion chains along the trap axis: confinement, equilibrium and normal modes.

mod equilibrium;
pub mod jacobi;
mod modes;
mod potential;
mod species;

pub use equilibrium::{find_equilibrium, EquilibriumChain, SolverOptions, SpacingDeviation};
pub use modes::{
    hessian_matrix, lowest_mode_frequency, lowest_mode_scan, normal_modes, power_law_exponent, ModeDecomposition,
    ScanPoint,
};
pub use potential::{PotentialValue, TrapPotential};
pub use species::IonSpecies;
