//! Weighted nonlinear least squares and the fit recipes built on it.

mod data;
mod engine;
mod recipes;

pub use data::{DataPoint, DataSeries, FitParameter, FitResult, FitWarning};
pub use engine::{least_squares, FitOptions, ParamSpec};
pub use recipes::{
    beam_profile_model, binomial_sigma, fit_beam_profile, fit_phase_damping, fit_rabi_trace, fit_theta_growth,
    fit_theta_power_law, phase_damping_model, rabi_trace_model,
};
