//! Crosstalk from sympathetic cooling of interspersed coolant ions.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Caveat attached to every crosstalk estimate; no numerical correction is
/// applied for it.
pub const ELASTIC_SCATTERING_NOTE: &str = "upper bound at unity saturation; dark-state cooling with partly \
elastic scattering likely lowers the true rate by an order of magnitude or more (not applied)";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoolingConfig {
    /// Fraction `r` of chain sites holding coolant ions.
    pub coolant_fraction: f64,
    /// Ion spacing `d`, m.
    pub spacing: f64,
    /// Wavelength `λ` of the re-emitted photons, m.
    pub wavelength: f64,
    /// Natural linewidth `Γ` of the emitting state, rad/s.
    pub linewidth: f64,
    /// Isotope splitting `Δ` on the emitting transition, rad/s.
    pub isotope_shift: f64,
}

impl CoolingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.coolant_fraction) {
            return Err(Error::input(format!("coolant fraction must lie in [0, 1], got {}", self.coolant_fraction)));
        }
        for (name, v) in [
            ("spacing", self.spacing),
            ("wavelength", self.wavelength),
            ("linewidth", self.linewidth),
            ("isotope shift", self.isotope_shift),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::input(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Average excitation rate per qubit from coolant fluorescence,
/// `R = r λ² (Γ/2)³ / (16 d² Δ²)`, in 1/s.
pub fn crosstalk_rate(cfg: &CoolingConfig) -> Result<f64> {
    cfg.validate()?;
    let half_gamma = cfg.linewidth / 2.0;
    Ok(cfg.coolant_fraction * cfg.wavelength.powi(2) * half_gamma.powi(3)
        / (16.0 * cfg.spacing.powi(2) * cfg.isotope_shift.powi(2)))
}
