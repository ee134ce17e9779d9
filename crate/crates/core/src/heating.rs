//! Power-law electric-field noise and the growth of decay parameters with
//! wait time.

use serde::{Deserialize, Serialize};

use crate::chain::{IonSpecies, ModeDecomposition};
use crate::decoherence::{zero_point_spread, BeamProfile};
use crate::{Error, Result};

/// Electric-field noise with spectral density `∝ ω^{-α}`, anchored by the
/// single-ion heating rate `nbar_rate_ref` measured at `omega_ref`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub alpha: f64,
    /// Single-ion heating rate at `omega_ref`, quanta/s.
    pub nbar_rate_ref: f64,
    /// rad/s
    pub omega_ref: f64,
    /// Constant offset `B` of the decay-parameter rate, 1/s. Only enters
    /// [`theta_rate_model`]; chain predictions do not include it.
    pub offset: f64,
    /// Empirical multiplier for heating beyond the uniform-field estimate.
    pub inhomogeneity_factor: f64,
}

impl NoiseModel {
    pub fn new(alpha: f64, nbar_rate_ref: f64, omega_ref: f64) -> Result<Self> {
        let n = NoiseModel { alpha, nbar_rate_ref, omega_ref, offset: 0.0, inhomogeneity_factor: 1.0 };
        n.validate()?;
        Ok(n)
    }

    pub fn with_offset(mut self, offset: f64) -> Result<Self> {
        self.offset = offset;
        self.validate()?;
        Ok(self)
    }

    pub fn with_inhomogeneity(mut self, factor: f64) -> Result<Self> {
        self.inhomogeneity_factor = factor;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=2.0).contains(&self.alpha) {
            return Err(Error::input(format!("noise exponent alpha must lie in [0, 2], got {}", self.alpha)));
        }
        if !(self.nbar_rate_ref.is_finite() && self.nbar_rate_ref >= 0.0) {
            return Err(Error::input("reference heating rate must be finite and >= 0"));
        }
        if !(self.omega_ref.is_finite() && self.omega_ref > 0.0) {
            return Err(Error::input("reference frequency must be positive"));
        }
        if !(self.offset.is_finite() && self.offset >= 0.0) {
            return Err(Error::input("offset B must be finite and >= 0"));
        }
        if !(self.inhomogeneity_factor.is_finite() && self.inhomogeneity_factor >= 1.0) {
            return Err(Error::input("inhomogeneity factor must be >= 1"));
        }
        Ok(())
    }

    /// Single-ion heating rate `n̄̇(ω) = n̄̇_ref (ω_ref/ω)^{1+α}`, quanta/s.
    pub fn heating_rate_at(&self, omega: f64) -> Result<f64> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::input(format!("frequency must be positive, got {omega}")));
        }
        Ok(self.nbar_rate_ref * (self.omega_ref / omega).powf(1.0 + self.alpha))
    }

    /// Heating rate of chain mode `m`: the single-ion rate at `ω_m` times the
    /// uniform-field enhancement `(Σ_i b_im)²` and the inhomogeneity factor.
    pub fn mode_heating_rate(&self, modes: &ModeDecomposition, mode: usize) -> Result<f64> {
        if mode >= modes.n_modes() {
            return Err(Error::input(format!("mode index {mode} out of range")));
        }
        Ok(self.heating_rate_at(modes.frequencies[mode])?
            * modes.uniform_field_enhancement(mode)
            * self.inhomogeneity_factor)
    }
}

/// Which modes contribute to [`theta_rate`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSelection {
    /// The in-phase (lowest) mode only.
    #[default]
    Lowest,
    All,
}

/// Per-ion growth rate of the decay parameter, 1/s.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaRateProfile {
    pub rates: Vec<f64>,
}

/// `dθ_i/dt_w = Σ_m −b_im² ξ_m² (Ω''/Ω)(x_i) n̄̇_m` over the selected modes,
/// with `n̄̇_m` from [`NoiseModel::mode_heating_rate`]. Ions without a beam
/// get zero.
pub fn theta_rate(
    noise: &NoiseModel,
    species: &IonSpecies,
    modes: &ModeDecomposition,
    beams: &[Option<BeamProfile>],
    positions: &[f64],
    selection: ModeSelection,
) -> Result<ThetaRateProfile> {
    let n_ions = modes.participation.nrows();
    if beams.len() != n_ions || positions.len() != n_ions {
        return Err(Error::input(format!(
            "expected {n_ions} beams and positions, got {} and {}",
            beams.len(),
            positions.len()
        )));
    }
    let used = match selection {
        ModeSelection::Lowest => 1,
        ModeSelection::All => modes.n_modes(),
    };
    let per_mode: Vec<(f64, f64)> = (0..used)
        .map(|m| {
            let xi = zero_point_spread(species, modes.frequencies[m])?;
            Ok((xi * xi, noise.mode_heating_rate(modes, m)?))
        })
        .collect::<Result<_>>()?;

    let rates = beams
        .iter()
        .enumerate()
        .map(|(i, beam)| {
            let Some(beam) = beam else { return Ok(0.0) };
            let curvature = beam.curvature_ratio(positions[i])?;
            Ok(per_mode
                .iter()
                .enumerate()
                .map(|(m, (xi_sq, rate))| {
                    let b = modes.participation[(i, m)];
                    -b * b * xi_sq * curvature * rate
                })
                .sum())
        })
        .collect::<Result<_>>()?;
    Ok(ThetaRateProfile { rates })
}

/// Single-ion decay-rate model `A ω₀^{-2-α} + B`.
pub fn theta_rate_model(omega0: f64, amplitude: f64, offset: f64, alpha: f64) -> f64 {
    amplitude * omega0.powf(-2.0 - alpha) + offset
}

/// Calibration point for [`gate_error_scaling`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateErrorReference {
    pub n_ions: usize,
    /// s
    pub wait_time: f64,
    pub error: f64,
}

/// Gate error extrapolated as `t_w² N^{4+2α}` from one reference point,
/// which follows from `ω₀ ∝ 1/N`.
pub fn gate_error_scaling(n_ions: usize, wait_time: f64, alpha: f64, reference: &GateErrorReference) -> Result<f64> {
    if n_ions == 0 || reference.n_ions == 0 {
        return Err(Error::input("ion numbers must be >= 1"));
    }
    if !(wait_time.is_finite() && wait_time >= 0.0) {
        return Err(Error::input("wait time must be >= 0"));
    }
    if !(reference.wait_time.is_finite() && reference.wait_time > 0.0) {
        return Err(Error::input("reference wait time must be positive"));
    }
    Ok(reference.error
        * (wait_time / reference.wait_time).powi(2)
        * (n_ions as f64 / reference.n_ions as f64).powf(4.0 + 2.0 * alpha))
}
