use nalgebra::DMatrix;
use serde::Serialize;

use super::{BeamProfile, ThermalState, Warning};
use crate::chain::{IonSpecies, ModeDecomposition};
use crate::constants::HBAR;
use crate::{Error, Result};

/// Ground-state position spread `ξ = √(ħ/(2Mω))`, m.
pub fn zero_point_spread(species: &IonSpecies, omega: f64) -> Result<f64> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::input(format!("mode frequency must be positive, got {omega}")));
    }
    Ok((HBAR / (2.0 * species.mass * omega)).sqrt())
}

/// Signed decay parameters `θ_im` (ion `i`, mode `m`).
#[derive(Clone, Debug)]
pub struct DecayParameters {
    pub theta: DMatrix<f64>,
    pub warnings: Vec<Warning>,
}

/// `θ_im = −b_im² ξ_m² (Ω''/Ω)(x_i) n̄_m`.
///
/// `beams[i]` is the beam addressing ion `i`; ions without a beam get a zero
/// row. `positions` are the ion equilibrium positions in m.
pub fn decay_parameters(
    species: &IonSpecies,
    modes: &ModeDecomposition,
    thermal: &ThermalState,
    beams: &[Option<BeamProfile>],
    positions: &[f64],
) -> Result<DecayParameters> {
    let n_ions = modes.participation.nrows();
    let n_modes = modes.n_modes();
    if thermal.nbar.len() != n_modes {
        return Err(Error::input(format!(
            "thermal state has {} modes, decomposition has {n_modes}",
            thermal.nbar.len()
        )));
    }
    if beams.len() != n_ions || positions.len() != n_ions {
        return Err(Error::input(format!(
            "expected {n_ions} beams and positions, got {} and {}",
            beams.len(),
            positions.len()
        )));
    }
    let spread_sq: Vec<f64> =
        modes.frequencies.iter().map(|&w| zero_point_spread(species, w).map(|x| x * x)).collect::<Result<_>>()?;

    let mut theta = DMatrix::zeros(n_ions, n_modes);
    for (i, beam) in beams.iter().enumerate() {
        let Some(beam) = beam else { continue };
        let curvature = beam.curvature_ratio(positions[i])?;
        for m in 0..n_modes {
            let b = modes.participation[(i, m)];
            theta[(i, m)] = -b * b * spread_sq[m] * curvature * thermal.nbar[m];
        }
    }

    let warnings = thermal.warnings();
    for w in &warnings {
        log::warn!("{w:?}: decay parameters assume n̄ ≫ 1");
    }
    Ok(DecayParameters { theta, warnings })
}

/// Decay parameter of a single ion displaced by `x` from the center of a
/// Gaussian beam of waist `w`: `2(ξ₀/w)² (1 − 2x²/w²) n̄₀`.
pub fn theta_profile_gaussian(x: f64, waist: f64, spread: f64, nbar: f64) -> Result<f64> {
    if !(waist.is_finite() && waist > 0.0) {
        return Err(Error::input(format!("beam waist must be positive, got {waist}")));
    }
    Ok(2.0 * (spread / waist).powi(2) * (1.0 - 2.0 * (x / waist).powi(2)) * nbar)
}

/// Thermally averaged Rabi oscillation sampled at `times`.
#[derive(Clone, Debug, Serialize)]
pub struct RabiTrace {
    pub times: Vec<f64>,
    pub p1: Vec<f64>,
    pub contrast: Vec<f64>,
    /// Phase lag φ = Σ_m arctan(Ω₀θ_m t); the oscillation is `cos(Ω₀t − φ)`.
    pub phase: Vec<f64>,
}

pub(crate) fn validate_times(times: &[f64]) -> Result<()> {
    match times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        Some(t) => Err(Error::input(format!("times must be finite and >= 0, got {t}"))),
        None => Ok(()),
    }
}

/// Closed-form thermal average of `sin²(Ω̄t/2)` with
/// `Ω̄ = Ω₀(1 − Σ_m θ_m u_m)`, `u_m ~ Exp(1)`:
///
/// `p₁ = (1 − C cos(Ω₀t − φ))/2`, `C = Π_m (1 + θ_m²Ω₀²t²)^{-1/2}`,
/// `φ = Σ_m arctan(Ω₀θ_m t)`.
pub fn rabi_trace(omega0: f64, thetas: &[f64], times: &[f64]) -> Result<RabiTrace> {
    validate_times(times)?;
    if !omega0.is_finite() || thetas.iter().any(|t| !t.is_finite()) {
        return Err(Error::input("Rabi frequency and decay parameters must be finite"));
    }
    let mut trace = RabiTrace {
        times: times.to_vec(),
        p1: Vec::with_capacity(times.len()),
        contrast: Vec::with_capacity(times.len()),
        phase: Vec::with_capacity(times.len()),
    };
    for &t in times {
        let (contrast, phase) = thetas.iter().fold((1.0, 0.0), |(c, p), &th| {
            let a = omega0 * th * t;
            (c / (1.0 + a * a).sqrt(), p + a.atan())
        });
        let p1 = (0.5 * (1.0 - contrast * (omega0 * t - phase).cos())).clamp(0.0, 1.0);
        trace.p1.push(p1);
        trace.contrast.push(contrast);
        trace.phase.push(phase);
    }
    Ok(trace)
}

/// Per-ion decay parameter from the lowest (in-phase) mode alone:
/// `θ_i = b_i0² (Σ_j b_j0)² θ_single`, where `θ_single` is the decay
/// parameter of a single ion with axial frequency `ω₀`.
pub fn in_phase_theta(modes: &ModeDecomposition, theta_single: f64, addressed: &[usize]) -> Result<Vec<f64>> {
    let n = modes.participation.nrows();
    let enhancement = modes.uniform_field_enhancement(0);
    addressed
        .iter()
        .map(|&i| {
            if i >= n {
                return Err(Error::input(format!("ion index {i} out of range for {n} ions")));
            }
            let b = modes.participation[(i, 0)];
            Ok(b * b * enhancement * theta_single)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{find_equilibrium, normal_modes, TrapPotential};
    use std::f64::consts::PI;

    const W: f64 = 870e-9;

    fn single_ion(omega: f64) -> (IonSpecies, ModeDecomposition) {
        let s = IonSpecies::yb171();
        let chain = find_equilibrium(&s, &TrapPotential::harmonic(omega).unwrap(), 1, Default::default()).unwrap();
        let modes = normal_modes(&chain).unwrap();
        (s, modes)
    }

    #[test]
    fn zero_point_spread_values() {
        let s = IonSpecies::yb171();
        let xi = zero_point_spread(&s, 2.0 * PI * 100e3).unwrap();
        assert!((xi / 17e-9 - 1.0).abs() < 0.03);
        // Hand evaluation: M = (170.9363315 u − m_e) = 2.83845545418668e-25 kg,
        // ξ = sqrt(1.054571817e-34 / (2 M · 2π · 140 kHz)).
        let xi140 = zero_point_spread(&s, 2.0 * PI * 140e3).unwrap();
        assert!((xi140 / 1.4532090341927462e-08 - 1.0).abs() < 1e-9);
        let x4 = zero_point_spread(&s, 4.0 * 2.0 * PI * 100e3).unwrap();
        assert!((x4 / xi - 0.5).abs() < 1e-15);
        assert!(zero_point_spread(&s, 0.0).is_err());
    }

    #[test]
    fn centered_single_ion_theta() {
        let w0 = 2.0 * PI * 140e3;
        let (s, modes) = single_ion(w0);
        let beam = BeamProfile::gaussian(1.0, 0.0, W).unwrap();
        let th = ThermalState::uniform(1, 280.0).unwrap();
        let d = decay_parameters(&s, &modes, &th, &[Some(beam)], &[0.0]).unwrap();
        // 2 (ξ₀/w)² n̄₀ evaluated independently with ξ₀ from the hand value.
        let expected = 2.0 * (1.4532090341927462e-08 / W).powi(2) * 280.0;
        assert!((d.theta[(0, 0)] / expected - 1.0).abs() < 1e-9);
        assert!((expected - 0.15624484586514356).abs() < 1e-12);
        assert!(d.warnings.is_empty());
    }

    #[test]
    fn zero_occupation_gives_zero_theta() {
        let (s, modes) = single_ion(1e6);
        let beam = BeamProfile::gaussian(1.0, 0.0, W).unwrap();
        let th = ThermalState::uniform(1, 0.0).unwrap();
        let d = decay_parameters(&s, &modes, &th, &[Some(beam)], &[0.0]).unwrap();
        assert_eq!(d.theta[(0, 0)], 0.0);
        assert_eq!(d.warnings.len(), 1);
    }

    #[test]
    fn theta_vanishes_at_inflection() {
        let (s, modes) = single_ion(1e6);
        let beam = BeamProfile::gaussian(1.0, W / 2f64.sqrt(), W).unwrap();
        let th = ThermalState::uniform(1, 300.0).unwrap();
        let d = decay_parameters(&s, &modes, &th, &[Some(beam)], &[0.0]).unwrap();
        assert!(d.theta[(0, 0)].abs() < 1e-15);
    }

    #[test]
    fn profile_matches_decay_parameters() {
        let w0 = 2.0 * PI * 140e3;
        let (s, modes) = single_ion(w0);
        let xi = zero_point_spread(&s, w0).unwrap();
        let th = ThermalState::uniform(1, 280.0).unwrap();
        for k in -20..=20 {
            let x = k as f64 * 0.1 * W;
            let beam = BeamProfile::gaussian(1.0, -x, W).unwrap();
            let d = decay_parameters(&s, &modes, &th, &[Some(beam)], &[0.0]).unwrap();
            let p = theta_profile_gaussian(x, W, xi, 280.0).unwrap();
            assert!((d.theta[(0, 0)] - p).abs() <= 1e-12 * p.abs().max(1e-3));
        }
        assert!(theta_profile_gaussian(W / 2f64.sqrt(), W, xi, 280.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn unaddressed_ions_get_zero_rows_and_dimensions_checked() {
        let s = IonSpecies::yb171();
        let chain = find_equilibrium(&s, &TrapPotential::harmonic(1e6).unwrap(), 3, Default::default()).unwrap();
        let modes = normal_modes(&chain).unwrap();
        let th = ThermalState::uniform(3, 100.0).unwrap();
        let beam = BeamProfile::gaussian(1.0, chain.positions[1], W).unwrap();
        let d = decay_parameters(&s, &modes, &th, &[None, Some(beam), None], &chain.positions).unwrap();
        assert!(d.theta.row(0).iter().all(|&t| t == 0.0));
        assert!(d.theta.row(1).iter().all(|&t| t >= 0.0));
        assert!(decay_parameters(&s, &modes, &th, &[None], &chain.positions).is_err());
    }

    #[test]
    fn undamped_rabi() {
        let w = 2.0 * PI * 50e3;
        let times: Vec<f64> = (0..50).map(|k| k as f64 * 1e-6).collect();
        let tr = rabi_trace(w, &[0.0, 0.0], &times).unwrap();
        for (i, &t) in times.iter().enumerate() {
            assert!((tr.p1[i] - (w * t / 2.0).sin().powi(2)).abs() < 1e-15);
            assert_eq!(tr.contrast[i], 1.0);
            assert_eq!(tr.phase[i], 0.0);
        }
    }

    #[test]
    fn single_mode_unit_argument() {
        let w = 2.0;
        let theta = 0.1;
        let t = 1.0 / (w * theta);
        let tr = rabi_trace(w, &[theta], &[0.0, t]).unwrap();
        assert_eq!(tr.p1[0], 0.0);
        assert!((tr.contrast[1] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((tr.phase[1] - PI / 4.0).abs() < 1e-15);
        let expected = 0.5 * (1.0 - 0.5f64.sqrt() * (w * t - PI / 4.0).cos());
        assert!((tr.p1[1] - expected).abs() < 1e-15);
    }

    #[test]
    fn negative_time_rejected() {
        assert!(rabi_trace(1.0, &[0.1], &[-1.0]).is_err());
    }

    #[test]
    fn in_phase_theta_harmonic_identity() {
        let s = IonSpecies::yb171();
        let chain = find_equilibrium(&s, &TrapPotential::harmonic(1e6).unwrap(), 7, Default::default()).unwrap();
        let modes = normal_modes(&chain).unwrap();
        let th = in_phase_theta(&modes, 0.3, &[0, 3, 6]).unwrap();
        for t in th {
            assert!((t - 0.3).abs() < 1e-14);
        }
        assert!(in_phase_theta(&modes, 0.3, &[7]).is_err());
    }
}
