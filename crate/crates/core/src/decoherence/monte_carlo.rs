use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::Exp1;
use serde::Serialize;

use super::rabi::validate_times;
use crate::{Error, Result};

/// Reduced thermal energies `u = E/(k_B T)`, one row per mode.
///
/// Mode `m` draws from ChaCha20 seeded with `seed` on stream `m`, so every
/// mode's samples are independent of how many other modes are drawn and of
/// any later parallel split over samples.
pub fn thermal_energy_samples(n_modes: usize, n_samples: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..n_modes)
        .map(|m| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(m as u64);
            (0..n_samples).map(|_| rng.sample::<f64, _>(Exp1)).collect()
        })
        .collect()
}

/// Sampled estimate of the thermally averaged Rabi trace.
#[derive(Clone, Debug, Serialize)]
pub struct McRabiTrace {
    pub times: Vec<f64>,
    /// Sample mean of `sin²(Ω̄t/2)`.
    pub p1: Vec<f64>,
    /// Standard error of `p1`.
    pub stderr: Vec<f64>,
    /// `|⟨exp(−iΩ₀tΣθu)⟩|`, the sampled contrast.
    pub contrast: Vec<f64>,
    /// `−arg ⟨exp(−iΩ₀tΣθu)⟩`, the sampled phase lag.
    pub phase: Vec<f64>,
}

/// Monte-Carlo thermal average: `u_m ~ Exp(1)` per mode,
/// `Ω̄ = Ω₀(1 − Σ_m θ_m u_m)` (negative values kept), average
/// `sin²(Ω̄t/2)` over the samples. The same samples are reused for every
/// time point.
pub fn rabi_trace_monte_carlo(
    omega0: f64,
    thetas: &[f64],
    times: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<McRabiTrace> {
    validate_times(times)?;
    if n_samples == 0 {
        return Err(Error::input("Monte-Carlo needs at least one sample"));
    }
    let energies = thermal_energy_samples(thetas.len(), n_samples, seed);
    let shifts: Vec<f64> =
        (0..n_samples).map(|k| thetas.iter().zip(&energies).map(|(th, u)| th * u[k]).sum()).collect();

    let n = n_samples as f64;
    let mut out = McRabiTrace {
        times: times.to_vec(),
        p1: Vec::with_capacity(times.len()),
        stderr: Vec::with_capacity(times.len()),
        contrast: Vec::with_capacity(times.len()),
        phase: Vec::with_capacity(times.len()),
    };
    for &t in times {
        // Accumulate about the first sample so identical samples average to
        // exactly that value.
        let pivot = (0.5 * omega0 * (1.0 - shifts[0]) * t).sin().powi(2);
        let (mut sum, mut sum_sq, mut re, mut im) = (0.0, 0.0, 0.0, 0.0);
        for &s in &shifts {
            let rabi = omega0 * (1.0 - s);
            let p = (0.5 * rabi * t).sin().powi(2) - pivot;
            sum += p;
            sum_sq += p * p;
            let arg = omega0 * t * s;
            re += arg.cos();
            im -= arg.sin();
        }
        let mean = sum / n;
        let var = if n_samples > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        out.p1.push(pivot + mean);
        out.stderr.push((var / n).sqrt());
        out.contrast.push((re / n).hypot(im / n));
        out.phase.push(-(im / n).atan2(re / n));
    }
    Ok(out)
}
