//! Two-qubit gate fidelity under thermal axial motion, and SPAM handling.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::decoherence::thermal_energy_samples;
use crate::{Error, Result};

/// Pair of addressed ions and the gate sequence applied to them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GatePlan {
    pub ions: (usize, usize),
    /// Number of successive fully entangling gates `N_g`.
    pub gate_count: u32,
    /// Target angle χ, rad. Defaults to `N_g π/4`.
    pub angle: f64,
    /// Duration of one gate, s.
    pub duration: f64,
}

impl GatePlan {
    pub fn new(ions: (usize, usize), gate_count: u32, duration: f64) -> Result<Self> {
        if ions.0 == ions.1 {
            return Err(Error::input("a two-qubit gate needs two distinct ions"));
        }
        if gate_count < 1 {
            return Err(Error::input("gate count must be >= 1"));
        }
        if !(duration.is_finite() && duration >= 0.0) {
            return Err(Error::input("gate duration must be >= 0"));
        }
        Ok(GatePlan { ions, gate_count, angle: gate_count as f64 * PI / 4.0, duration })
    }
}

fn joint_thetas(theta_i: &[f64], theta_j: &[f64]) -> Result<Vec<f64>> {
    if theta_i.len() != theta_j.len() {
        return Err(Error::input(format!(
            "per-mode decay parameter lists differ in length ({} vs {})",
            theta_i.len(),
            theta_j.len()
        )));
    }
    if theta_i.iter().chain(theta_j).any(|t| !t.is_finite()) {
        return Err(Error::input("decay parameters must be finite"));
    }
    Ok(theta_i.iter().zip(theta_j).map(|(a, b)| a + b).collect())
}

/// `F = ½ + ½ Π_m [1 + (N_g π/2)² (θ_im + θ_jm)²]^{-1/2}`.
///
/// This is the thermal average of `cos²(Ω̄_ij t − χ)` with the mean
/// rotation-angle offset calibrated away; see [`gate_fidelity_monte_carlo`].
pub fn gate_fidelity_bound(theta_i: &[f64], theta_j: &[f64], gate_count: u32) -> Result<f64> {
    if gate_count < 1 {
        return Err(Error::input("gate count must be >= 1"));
    }
    let k = gate_count as f64 * PI / 2.0;
    let product: f64 = joint_thetas(theta_i, theta_j)?.iter().map(|s| 1.0 / (1.0 + (k * s).powi(2)).sqrt()).product();
    Ok(0.5 + 0.5 * product)
}

/// Monte-Carlo thermal average of the gate fidelity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GateMcEstimate {
    /// `⟨cos²(Ω̄t − χ − δ)⟩` maximised over a constant angle offset `δ`.
    pub calibrated: f64,
    pub calibrated_stderr: f64,
    /// `⟨cos²(Ω̄t − χ)⟩` with no offset.
    pub uncalibrated: f64,
    pub uncalibrated_stderr: f64,
}

/// Samples `u_m ~ Exp(1)` per mode (same streams as the Rabi oracle) and
/// averages `cos²(Ω̄_ij t − χ)` with `Ω̄_ij t = χ(1 − Σ_m (θ_im + θ_jm) u_m)`
/// and `χ = N_g π/4`.
pub fn gate_fidelity_monte_carlo(
    theta_i: &[f64],
    theta_j: &[f64],
    gate_count: u32,
    n_samples: usize,
    seed: u64,
) -> Result<GateMcEstimate> {
    if gate_count < 1 {
        return Err(Error::input("gate count must be >= 1"));
    }
    if n_samples < 2 {
        return Err(Error::input("Monte-Carlo needs at least two samples"));
    }
    let joint = joint_thetas(theta_i, theta_j)?;
    let chi = gate_count as f64 * PI / 4.0;
    let energies = thermal_energy_samples(joint.len(), n_samples, seed);
    let angles: Vec<f64> =
        (0..n_samples).map(|k| 2.0 * chi * joint.iter().zip(&energies).map(|(s, u)| s * u[k]).sum::<f64>()).collect();

    let n = n_samples as f64;
    let (re, im) = angles.iter().fold((0.0, 0.0), |(c, s), a| (c + a.cos(), s + a.sin()));
    let (re, im) = (re / n, im / n);
    let offset = im.atan2(re);

    let stats = |values: &mut dyn Iterator<Item = f64>| {
        let (sum, sum_sq) = values.fold((0.0, 0.0), |(s, q), v| (s + v, q + v * v));
        let mean = sum / n;
        let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (mean, (var / n).sqrt())
    };
    // cos²(x/2) = (1 + cos x)/2 with x = 2(Ω̄t − χ − δ).
    let (calibrated, calibrated_stderr) = stats(&mut angles.iter().map(|a| 0.5 * (1.0 + (a - offset).cos())));
    let (uncalibrated, uncalibrated_stderr) = stats(&mut angles.iter().map(|a| 0.5 * (1.0 + a.cos())));
    Ok(GateMcEstimate { calibrated, calibrated_stderr, uncalibrated, uncalibrated_stderr })
}

/// Bell-state fidelity from populations and parity contrast,
/// `F = (p00 + p11 + C)/2`.
pub fn parity_fidelity(p00: f64, p11: f64, contrast: f64) -> Result<f64> {
    let unit = |v: f64| (0.0..=1.0).contains(&v);
    if !(unit(p00) && unit(p11) && unit(contrast)) {
        return Err(Error::input("populations and contrast must lie in [0, 1]"));
    }
    if p00 + p11 > 1.0 + 1e-12 {
        return Err(Error::input(format!("p00 + p11 = {} exceeds 1", p00 + p11)));
    }
    Ok((p00 + p11 + contrast) / 2.0)
}

/// Row-stochastic confusion matrix; rows are prepared states
/// `00, 01, 10, 11` and columns the measured ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpamMatrix {
    pub rows: [[f64; 4]; 4],
}

/// Confusion matrix measured on ions −6 and −5 of a 15-ion chain, in
/// fractions.
pub const MEASURED_15_ION_SPAM: [[f64; 4]; 4] = [
    [0.9976, 0.0017, 0.0007, 0.0000],
    [0.0053, 0.9934, 0.0000, 0.0013],
    [0.0036, 0.0000, 0.9922, 0.0042],
    [0.0002, 0.0045, 0.0048, 0.9905],
];

impl SpamMatrix {
    pub fn new(rows: [[f64; 4]; 4]) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::input(format!("SPAM row {i} has entries outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::input(format!("SPAM row {i} sums to {sum}, not 1")));
            }
        }
        Ok(SpamMatrix { rows })
    }

    pub fn identity() -> Self {
        let mut rows = [[0.0; 4]; 4];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        SpamMatrix { rows }
    }

    /// Measured populations for ideal populations `ideal` (row vector times
    /// matrix).
    pub fn apply(&self, ideal: [f64; 4]) -> Result<[f64; 4]> {
        if ideal.iter().any(|p| !(0.0..=1.0).contains(p)) || (ideal.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::input("ideal populations must be a probability vector"));
        }
        let mut out = [0.0; 4];
        for (p, row) in ideal.iter().zip(&self.rows) {
            for (o, m) in out.iter_mut().zip(row) {
                *o += p * m;
            }
        }
        Ok(out)
    }

    /// Mean probability of measuring a state other than the one prepared.
    pub fn mean_error(&self) -> f64 {
        (0..4).map(|i| 1.0 - self.rows[i][i]).sum::<f64>() / 4.0
    }
}

/// Row-normalised confusion matrix with binomial standard errors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpamEstimate {
    pub matrix: SpamMatrix,
    pub uncertainty: [[f64; 4]; 4],
}

pub fn spam_matrix_from_counts(counts: [[u64; 4]; 4]) -> Result<SpamEstimate> {
    let mut rows = [[0.0; 4]; 4];
    let mut uncertainty = [[0.0; 4]; 4];
    for (i, row) in counts.iter().enumerate() {
        let total: u64 = row.iter().sum();
        if total == 0 {
            return Err(Error::input(format!("prepared state {i} has no trials")));
        }
        let n = total as f64;
        for (j, &c) in row.iter().enumerate() {
            let p = c as f64 / n;
            rows[i][j] = p;
            uncertainty[i][j] = (p * (1.0 - p) / n).sqrt();
        }
    }
    Ok(SpamEstimate { matrix: SpamMatrix::new(rows)?, uncertainty })
}

/// Fidelity lowered by a SPAM error `ε`: `F (1 − ε)`.
pub fn spam_adjust_prediction(fidelity: f64, spam_error: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&spam_error) {
        return Err(Error::input(format!("SPAM error must lie in [0, 1], got {spam_error}")));
    }
    Ok(fidelity * (1.0 - spam_error))
}

/// Gate-fidelity prediction with its inputs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FidelityPrediction {
    pub f_bound: f64,
    pub f_spam_adjusted: f64,
    /// First-order uncertainty of `f_spam_adjusted`.
    pub f_err: f64,
    pub theta_i: Vec<f64>,
    pub theta_j: Vec<f64>,
    pub gate_count: u32,
}

/// Linear growth `θ(t_w) = θ₀ + rate · t_w` with 1σ uncertainties.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ThetaGrowth {
    pub theta0: f64,
    pub theta0_err: f64,
    /// 1/s
    pub rate: f64,
    pub rate_err: f64,
}

impl ThetaGrowth {
    pub fn at(&self, wait_time: f64) -> (f64, f64) {
        let value = self.theta0 + self.rate * wait_time;
        let err = self.theta0_err.hypot(self.rate_err * wait_time);
        (value, err)
    }
}

/// Fidelity after `wait_time` with only the in-phase mode contributing, SPAM
/// adjusted, with the uncertainty propagated to first order from the growth
/// fits (assumed independent).
pub fn predict_fidelity_after_wait(
    growth_i: &ThetaGrowth,
    growth_j: &ThetaGrowth,
    gate_count: u32,
    spam_error: f64,
    wait_time: f64,
) -> Result<FidelityPrediction> {
    if !(wait_time.is_finite() && wait_time >= 0.0) {
        return Err(Error::input("wait time must be >= 0"));
    }
    let (ti, ei) = growth_i.at(wait_time);
    let (tj, ej) = growth_j.at(wait_time);
    let f_bound = gate_fidelity_bound(&[ti], &[tj], gate_count)?;
    let f_spam_adjusted = spam_adjust_prediction(f_bound, spam_error)?;
    let k = gate_count as f64 * PI / 2.0;
    let s = ti + tj;
    let slope = 0.5 * k * k * s.abs() * (1.0 + (k * s).powi(2)).powf(-1.5);
    let f_err = slope * ei.hypot(ej) * (1.0 - spam_error);
    Ok(FidelityPrediction { f_bound, f_spam_adjusted, f_err, theta_i: vec![ti], theta_j: vec![tj], gate_count })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_without_motion() {
        for ng in 1..5 {
            assert_eq!(gate_fidelity_bound(&[0.0, 0.0], &[0.0, 0.0], ng).unwrap(), 1.0);
        }
    }

    #[test]
    fn single_mode_value() {
        let f = gate_fidelity_bound(&[0.12], &[0.08], 1).unwrap();
        let expected = 0.5 + 0.5 / (1.0 + (PI / 2.0).powi(2) * 0.04).sqrt();
        assert!((f - expected).abs() < 1e-15);
    }

    #[test]
    fn more_gates_lower_fidelity() {
        let f1 = gate_fidelity_bound(&[0.05], &[0.05], 1).unwrap();
        let f3 = gate_fidelity_bound(&[0.05], &[0.05], 3).unwrap();
        assert!(f3 < f1);
    }

    #[test]
    fn opposite_signs_cancel() {
        assert_eq!(gate_fidelity_bound(&[0.2, -0.1], &[-0.2, 0.1], 3).unwrap(), 1.0);
    }

    #[test]
    fn mismatched_lengths() {
        assert!(gate_fidelity_bound(&[0.1], &[0.1, 0.2], 1).is_err());
        assert!(gate_fidelity_bound(&[0.1], &[0.1], 0).is_err());
    }

    #[test]
    fn monte_carlo_matches_bound_and_bounds_uncalibrated() {
        let f = gate_fidelity_bound(&[0.1], &[0.1], 1).unwrap();
        let mc = gate_fidelity_monte_carlo(&[0.1], &[0.1], 1, 100_000, 17).unwrap();
        assert!((mc.calibrated - f).abs() < 3.0 * mc.calibrated_stderr + 1e-12);
        assert!(mc.uncalibrated < f);
    }

    #[test]
    fn parity_fidelity_cases() {
        assert_eq!(parity_fidelity(0.5, 0.5, 1.0).unwrap(), 1.0);
        assert_eq!(parity_fidelity(0.25, 0.25, 0.0).unwrap(), 0.25);
        assert!((parity_fidelity(0.48, 0.48, 0.94).unwrap() - 0.95).abs() < 1e-15);
        assert!(parity_fidelity(0.6, 0.6, 0.5).is_err());
        assert!(parity_fidelity(0.5, 0.5, 1.2).is_err());
    }

    #[test]
    fn spam_application() {
        let ideal = [0.2, 0.3, 0.1, 0.4];
        assert_eq!(SpamMatrix::identity().apply(ideal).unwrap(), ideal);
        let m = SpamMatrix::new(MEASURED_15_ION_SPAM).unwrap();
        let out = m.apply([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(out, [0.9976, 0.0017, 0.0007, 0.0]);
        let mixed = m.apply(ideal).unwrap();
        assert!((mixed.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(m.apply([0.5, 0.6, 0.0, 0.0]).is_err());
    }

    #[test]
    fn spam_matrix_validation() {
        let mut bad = MEASURED_15_ION_SPAM;
        bad[0][0] = 0.9;
        assert!(SpamMatrix::new(bad).is_err());
    }

    #[test]
    fn spam_from_counts() {
        let mut counts = [[0u64; 4]; 4];
        for (i, row) in counts.iter_mut().enumerate() {
            row[i] = 20_000;
        }
        assert_eq!(spam_matrix_from_counts(counts).unwrap().matrix, SpamMatrix::identity());

        counts[0] = [19_952, 34, 14, 0];
        let est = spam_matrix_from_counts(counts).unwrap();
        for (a, b) in est.matrix.rows[0].iter().zip(MEASURED_15_ION_SPAM[0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let p: f64 = 19_952.0 / 20_000.0;
        assert!((est.uncertainty[0][0] - (p * (1.0 - p) / 20_000.0).sqrt()).abs() < 1e-15);

        let uniform = spam_matrix_from_counts([[5; 4]; 4]).unwrap();
        assert!(uniform.matrix.rows.iter().flatten().all(|&p| p == 0.25));

        counts[2] = [0; 4];
        assert!(spam_matrix_from_counts(counts).is_err());
    }

    #[test]
    fn spam_adjustment() {
        assert!((spam_adjust_prediction(1.0, 0.009).unwrap() - 0.991).abs() < 1e-15);
        assert!(spam_adjust_prediction(1.0, 1.5).is_err());
    }

    #[test]
    fn wait_time_pipeline() {
        let g = ThetaGrowth { theta0: 0.0, theta0_err: 0.0, rate: 2.0, rate_err: 0.2 };
        let p0 = predict_fidelity_after_wait(&g, &g, 1, 0.009, 0.0).unwrap();
        assert_eq!(p0.f_bound, 1.0);
        assert!((p0.f_spam_adjusted - 0.991).abs() < 1e-15);
        let mut last = p0.f_spam_adjusted;
        for k in 1..10 {
            let p = predict_fidelity_after_wait(&g, &g, 1, 0.009, k as f64 * 1e-3).unwrap();
            assert!(p.f_spam_adjusted < last);
            assert!(p.f_spam_adjusted <= p.f_bound);
            assert!(p.f_err > 0.0);
            last = p.f_spam_adjusted;
        }
    }

    #[test]
    fn fidelity_error_matches_finite_difference() {
        let g = ThetaGrowth { theta0: 0.01, theta0_err: 0.0, rate: 5.0, rate_err: 0.5 };
        let tw = 4e-3;
        let p = predict_fidelity_after_wait(&g, &g, 3, 0.0, tw).unwrap();
        let s = 2.0 * g.at(tw).0;
        let h = 1e-7;
        let f = |s: f64| gate_fidelity_bound(&[s], &[0.0], 3).unwrap();
        let deriv = (f(s + h) - f(s - h)) / (2.0 * h);
        let sigma = (2.0f64).sqrt() * g.rate_err * tw;
        assert!((p.f_err - deriv.abs() * sigma).abs() < 1e-8);
    }
}
