//! TOML run configuration. Every key carries its unit in the name; unknown
//! keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chain::{IonSpecies, TrapPotential};
use crate::constants::{khz_to_angular as khz, AMU, HBAR, K_B};
use crate::cooling::CoolingConfig;
use crate::decoherence::{BeamProfile, ThermalState};
use crate::gates::ThetaGrowth;
use crate::heating::NoiseModel;
use crate::{Error, Result};

fn mhz(v: f64) -> f64 {
    khz(1e3 * v)
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub species: Option<SpeciesConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beam: Option<BeamConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thermal: Option<ThermalConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rabi: Option<RabiConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_scan: Option<ThetaScanConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gate: Option<GateConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cooling: Option<CoolingSection>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesConfig {
    /// Tabulated label such as `171Yb+`, or a free label with `mass_amu`.
    pub label: Option<String>,
    pub mass_amu: Option<f64>,
    pub charge: Option<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialConfig {
    Harmonic { n_ions: usize, axial_freq_khz: f64 },
    QuadQuartic { n_ions: usize, a2_j_per_m2: f64, a4_j_per_m4: f64 },
    EquispacedLog { n_ions: usize, spacing_um: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BeamConfig {
    Gaussian {
        /// Ω/2π at the beam center.
        peak_rabi_khz: f64,
        #[serde(default)]
        center_um: f64,
        /// 1/e² intensity radius.
        waist_um: f64,
    },
    Tabulated {
        x_um: Vec<f64>,
        rabi_khz: Vec<f64>,
    },
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalConfig {
    /// Same occupation in every mode.
    pub nbar: Option<f64>,
    pub nbar_per_mode: Option<Vec<f64>>,
    /// Thermal state at temperature T: n̄_m = k_B T / (ħ ω_m).
    pub temperature_uk: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub alpha: f64,
    pub nbar_rate_ref_per_s: f64,
    pub ref_freq_khz: f64,
    #[serde(default)]
    pub offset_per_s: f64,
    #[serde(default = "one")]
    pub inhomogeneity: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RabiConfig {
    pub t_max_us: f64,
    pub n_points: usize,
    /// Ion whose trace is computed; defaults to the middle ion.
    pub ion: Option<usize>,
    /// Overrides the Rabi frequency the beam gives at the ion.
    pub rabi_khz: Option<f64>,
    /// Overrides the per-mode decay parameters computed from the chain.
    pub theta: Option<Vec<f64>>,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
}

fn default_mc_samples() -> usize {
    100_000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaScanConfig {
    pub x_min_um: f64,
    pub x_max_um: f64,
    pub n_points: usize,
    pub ion: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthConfig {
    pub theta0: f64,
    #[serde(default)]
    pub theta0_err: f64,
    pub rate_per_s: f64,
    #[serde(default)]
    pub rate_err_per_s: f64,
}

impl From<&GrowthConfig> for ThetaGrowth {
    fn from(g: &GrowthConfig) -> Self {
        ThetaGrowth { theta0: g.theta0, theta0_err: g.theta0_err, rate: g.rate_per_s, rate_err: g.rate_err_per_s }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpamSource {
    /// The confusion matrix measured on the 15-ion chain.
    #[serde(rename = "measured-15-ion")]
    Measured15Ion,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateConfig {
    pub gate_count: u32,
    /// Pair of ion indices; needed when growth is computed from the chain.
    pub ions: Option<[usize; 2]>,
    /// Mean SPAM error ε; alternatively `spam = "measured-15-ion"`.
    pub spam_error: Option<f64>,
    pub spam: Option<SpamSource>,
    pub growth_i: Option<GrowthConfig>,
    pub growth_j: Option<GrowthConfig>,
    pub tw_list_ms: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub spacing_um: f64,
    pub alpha: f64,
    pub n_list: Option<Vec<usize>>,
    /// Reference chain length; defaults to the first entry of the N list.
    pub reference_n_ions: Option<usize>,
    #[serde(default = "one")]
    pub reference_wait_ms: f64,
    #[serde(default = "one")]
    pub reference_error: f64,
    #[serde(default = "one")]
    pub wait_ms: f64,
    /// Use the idealised ω₀ ∝ 1/N law instead of the computed frequencies.
    #[serde(default)]
    pub inverse_n: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoolingSection {
    pub coolant_fraction: f64,
    pub spacing_um: f64,
    pub wavelength_nm: f64,
    /// Γ/2π.
    pub linewidth_mhz: f64,
    /// Δ/2π.
    pub isotope_shift_mhz: f64,
}

fn missing(section: &str) -> Error {
    Error::Input(format!("config has no [{section}] section"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Input(format!("invalid config: {e}")))
    }

    /// Species, defaulting to ¹⁷¹Yb⁺ when the section is absent.
    pub fn species(&self) -> Result<IonSpecies> {
        let Some(s) = &self.species else { return Ok(IonSpecies::yb171()) };
        match (s.mass_amu, &s.label) {
            (Some(m), label) => {
                IonSpecies::new(label.clone().unwrap_or_else(|| "custom".into()), m * AMU, s.charge.unwrap_or(1))
            }
            (None, Some(label)) => {
                let sp = IonSpecies::from_label(label)?;
                match s.charge {
                    Some(c) if c != sp.charge => IonSpecies::new(sp.label, sp.mass, c),
                    _ => Ok(sp),
                }
            }
            (None, None) => Err(Error::input("[species] needs `label` or `mass_amu`")),
        }
    }

    pub fn potential(&self) -> Result<(TrapPotential, usize)> {
        let p = self.potential.as_ref().ok_or_else(|| missing("potential"))?;
        Ok(match *p {
            PotentialConfig::Harmonic { n_ions, axial_freq_khz } => {
                (TrapPotential::harmonic(khz(axial_freq_khz))?, n_ions)
            }
            PotentialConfig::QuadQuartic { n_ions, a2_j_per_m2, a4_j_per_m4 } => {
                (TrapPotential::quad_quartic(a2_j_per_m2, a4_j_per_m4)?, n_ions)
            }
            PotentialConfig::EquispacedLog { n_ions, spacing_um } => {
                (TrapPotential::equispaced_log(n_ions, spacing_um * 1e-6)?, n_ions)
            }
        })
    }

    pub fn beam(&self) -> Result<BeamProfile> {
        match self.beam.as_ref().ok_or_else(|| missing("beam"))? {
            BeamConfig::Gaussian { peak_rabi_khz, center_um, waist_um } => {
                BeamProfile::gaussian(khz(*peak_rabi_khz), center_um * 1e-6, waist_um * 1e-6)
            }
            BeamConfig::Tabulated { x_um, rabi_khz } => BeamProfile::tabulated(
                x_um.iter().map(|x| x * 1e-6).collect(),
                rabi_khz.iter().map(|r| khz(*r)).collect(),
            ),
        }
    }

    pub fn thermal(&self, frequencies: &[f64]) -> Result<ThermalState> {
        let t = self.thermal.as_ref().ok_or_else(|| missing("thermal"))?;
        let given = [t.nbar.is_some(), t.nbar_per_mode.is_some(), t.temperature_uk.is_some()];
        if given.iter().filter(|g| **g).count() != 1 {
            return Err(Error::input("[thermal] needs exactly one of `nbar`, `nbar_per_mode`, `temperature_uk`"));
        }
        if let Some(n) = t.nbar {
            ThermalState::uniform(frequencies.len(), n)
        } else if let Some(list) = &t.nbar_per_mode {
            ThermalState::new(list.clone())
        } else {
            let kt = K_B * t.temperature_uk.unwrap() * 1e-6;
            ThermalState::new(frequencies.iter().map(|w| kt / (HBAR * w)).collect())
        }
    }

    pub fn noise(&self) -> Result<NoiseModel> {
        let n = self.noise.as_ref().ok_or_else(|| missing("noise"))?;
        NoiseModel::new(n.alpha, n.nbar_rate_ref_per_s, khz(n.ref_freq_khz))?
            .with_offset(n.offset_per_s)?
            .with_inhomogeneity(n.inhomogeneity)
    }

    pub fn cooling(&self) -> Result<CoolingConfig> {
        let c = self.cooling.as_ref().ok_or_else(|| missing("cooling"))?;
        let cfg = CoolingConfig {
            coolant_fraction: c.coolant_fraction,
            spacing: c.spacing_um * 1e-6,
            wavelength: c.wavelength_nm * 1e-9,
            linewidth: mhz(c.linewidth_mhz),
            isotope_shift: mhz(c.isotope_shift_mhz),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn section<'a, T>(&self, value: &'a Option<T>, name: &str) -> Result<&'a T> {
        value.as_ref().ok_or_else(|| missing(name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unknown_keys_rejected() {
        assert!(
            RunConfig::parse("[potential]\nkind = \"harmonic\"\nn_ions = 2\naxial_freq_khz = 100\nfoo = 1\n").is_err()
        );
        assert!(RunConfig::parse("[bogus]\nx = 1\n").is_err());
        assert!(RunConfig::parse("[species]\nlabel = \"171Yb+\"\nmass = 3\n").is_err());
    }

    #[test]
    fn potential_and_species() {
        let cfg = RunConfig::parse(
            "[species]\nlabel = \"40Ca+\"\n[potential]\nkind = \"equispaced-log\"\nn_ions = 15\nspacing_um = 4.4\n",
        )
        .unwrap();
        let (p, n) = cfg.potential().unwrap();
        assert_eq!(n, 15);
        assert_eq!(p, TrapPotential::equispaced_log(15, 4.4e-6).unwrap());
        assert_eq!(cfg.species().unwrap().label, "40Ca+");
        assert_eq!(RunConfig::default().species().unwrap(), IonSpecies::yb171());
    }

    #[test]
    fn thermal_exclusive() {
        let cfg = RunConfig::parse("[thermal]\nnbar = 3\nnbar_per_mode = [1, 2]\n").unwrap();
        assert!(cfg.thermal(&[1.0, 2.0]).is_err());
        let cfg = RunConfig::parse("[thermal]\ntemperature_uk = 500\n").unwrap();
        let st = cfg.thermal(&[2.0 * PI * 100e3]).unwrap();
        assert!((st.nbar[0] - K_B * 5e-4 / (HBAR * 2.0 * PI * 100e3)).abs() < 1e-9);
    }

    #[test]
    fn cooling_requires_every_input() {
        let cfg = RunConfig::parse(
            "[cooling]\ncoolant_fraction = 0.2\nspacing_um = 5\nwavelength_nm = 370\nlinewidth_mhz = 20\n",
        );
        assert!(cfg.is_err());
    }
}
