//! Rabi-frequency averaging over thermal axial motion.
//!
//! An ion displaced along the axis sees the addressing beam at a different
//! amplitude. Averaged over a thermal distribution of mode energies the Rabi
//! frequency becomes `Ω̄ = Ω₀ (1 − Σ_m θ_m u_m)` with `u_m ~ Exp(1)`, which
//! gives the closed-form contrast and phase in [`rabi_trace`] and the sampled
//! estimate in [`rabi_trace_monte_carlo`].

mod beam;
mod monte_carlo;
mod rabi;
mod thermal;

pub use beam::{BeamProfile, TabulatedBeam};
pub use monte_carlo::{rabi_trace_monte_carlo, thermal_energy_samples, McRabiTrace};
pub use rabi::{
    decay_parameters, in_phase_theta, rabi_trace, theta_profile_gaussian, zero_point_spread, DecayParameters, RabiTrace,
};
pub use thermal::{ThermalState, Warning};
