use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2, Vector2};

use super::{least_squares, DataSeries, FitOptions, FitParameter, FitResult, FitWarning, ParamSpec};
use crate::decoherence::rabi_trace;
use crate::{Error, Result};

/// Per-point σ for a fraction `p` estimated from `n_shots` repetitions,
/// floored at `1/(n_shots + 2)` so that `p ∈ {0, 1}` keeps a finite weight.
pub fn binomial_sigma(p: f64, n_shots: u64) -> Result<f64> {
    if n_shots == 0 || !(0.0..=1.0).contains(&p) {
        return Err(Error::input(format!("binomial sigma needs p in [0, 1] and n_shots > 0, got p={p}, n={n_shots}")));
    }
    let n = n_shots as f64;
    Ok((p * (1.0 - p) / n).sqrt().max(1.0 / (n + 2.0)))
}

fn pick_best(a: Result<FitResult>, b: Result<FitResult>) -> Result<FitResult> {
    match (a, b) {
        (Ok(a), Ok(b)) => Ok(if b.chi_squared < a.chi_squared { b } else { a }),
        (Ok(a), Err(_)) => Ok(a),
        (Err(_), Ok(b)) => Ok(b),
        (Err(a), Err(_)) => Err(a),
    }
}

fn sorted_xy(data: &DataSeries) -> (Vec<f64>, Vec<f64>) {
    let mut pts: Vec<(f64, f64)> = data.points.iter().map(|p| (p.x, p.y)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.into_iter().unzip()
}

/// Gaussian beam profile `A exp(−(x − x_c)²/w²)` in the Rabi angle, where
/// `w` is the 1/e² intensity radius.
pub fn beam_profile_model(x: f64, p: &[f64]) -> f64 {
    let s = (x - p[1]) / p[2];
    p[0] * (-s * s).exp()
}

/// Fit `amplitude`, `center` and `waist` of a Gaussian beam scan.
pub fn fit_beam_profile(data: &DataSeries, options: &FitOptions) -> Result<FitResult> {
    if data.len() < 5 {
        return Err(Error::fit(format!("beam profile needs at least 5 points, got {}", data.len())));
    }
    let (xs, ys) = sorted_xy(data);
    let (lo, hi) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &y| (l.min(y), h.max(y)));
    let span = xs[xs.len() - 1] - xs[0];
    if hi - lo <= 1e-9 * hi.abs().max(lo.abs()) || span <= 0.0 {
        return Err(Error::fit("beam profile data are flat"));
    }
    let peak = ys.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(k, _)| k).unwrap();
    let area: f64 = xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum();
    let amplitude = ys[peak];
    let mut waist = area / (amplitude * PI.sqrt());
    if !(waist.is_finite() && waist > 0.0) {
        waist = 0.25 * span;
    }
    let params = [
        ParamSpec::free("amplitude", amplitude),
        ParamSpec::free("center", xs[peak]),
        ParamSpec::bounded("waist", waist, 1e-6 * waist, f64::INFINITY),
    ];
    least_squares(&beam_profile_model, data, &params, options)
}

/// Frequency of the strongest oscillation in `(t, y)`, from a periodogram
/// with parabolic refinement of the peak.
fn dominant_frequency(ts: &[f64], ys: &[f64]) -> Option<f64> {
    let n = ts.len();
    let span = ts[n - 1] - ts[0];
    if n < 4 || span <= 0.0 {
        return None;
    }
    let mean = ys.iter().sum::<f64>() / n as f64;
    let mut dts: Vec<f64> = ts.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).collect();
    dts.sort_by(f64::total_cmp);
    let dt = *dts.get(dts.len() / 2)?;
    let (w_min, w_max) = (PI / span, PI / dt);
    let step = 2.0 * PI / span / 16.0;
    let power = |w: f64| {
        let (c, s) = ts.iter().zip(ys).fold((0.0, 0.0), |(c, s), (&t, &y)| {
            let (sn, cs) = (w * t).sin_cos();
            (c + (y - mean) * cs, s + (y - mean) * sn)
        });
        c * c + s * s
    };
    let count = ((w_max - w_min) / step).ceil() as usize + 1;
    let grid: Vec<f64> = (0..count).map(|k| w_min + k as f64 * step).collect();
    let powers: Vec<f64> = grid.iter().map(|&w| power(w)).collect();
    let k = powers.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?.0;
    if k == 0 || k + 1 == count {
        return Some(grid[k]);
    }
    let (a, b, c) = (powers[k - 1], powers[k], powers[k + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom < 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    Some(grid[k] + shift.clamp(-0.5, 0.5) * step)
}

/// Least-squares `y ≈ m + a cos(ωt) + b sin(ωt)` over a window; returns
/// `(a, b)`.
fn quadrature(ts: &[f64], ys: &[f64], omega: f64) -> Option<(f64, f64)> {
    let rows = ts.len();
    if rows < 3 {
        return None;
    }
    let x = DMatrix::from_fn(rows, 3, |i, j| match j {
        0 => 1.0,
        1 => (omega * ts[i]).cos(),
        _ => (omega * ts[i]).sin(),
    });
    let y = nalgebra::DVector::from_column_slice(ys);
    let sol = (x.transpose() * &x).cholesky()?.solve(&(x.transpose() * y));
    Some((sol[1], sol[2]))
}

struct OscillationGuess {
    omega: f64,
    /// Contrast ratio between the last and the first half of the trace.
    late_contrast: f64,
    late_time: f64,
    initial_phase: f64,
}

fn oscillation_guess(data: &DataSeries) -> Result<OscillationGuess> {
    let (ts, ys) = sorted_xy(data);
    let omega = dominant_frequency(&ts, &ys).ok_or_else(|| Error::fit("trace too short to locate an oscillation"))?;
    let half = ts.len() / 2;
    let early = quadrature(&ts[..half], &ys[..half], omega);
    let late = quadrature(&ts[half..], &ys[half..], omega);
    let (Some(early), Some(late)) = (early, late) else {
        return Err(Error::fit("trace too short to estimate the decay"));
    };
    let amp = |(a, b): (f64, f64)| 2.0 * a.hypot(b);
    // The early window is itself partly decayed; referencing the late
    // amplitude to full contrast keeps the guess conservative.
    let late_contrast = amp(late).clamp(1e-3, 1.0);
    let late_time = ts[half..].iter().sum::<f64>() / (ts.len() - half) as f64;
    // y − ½ ≈ −½ cos(ωt + φ₀)
    let initial_phase = (2.0 * early.1).atan2(-2.0 * early.0);
    Ok(OscillationGuess { omega, late_contrast, late_time, initial_phase })
}

fn warn_short_trace(result: &mut FitResult, data: &DataSeries, omega: f64) {
    let (ts, _) = sorted_xy(data);
    let periods = omega * (ts[ts.len() - 1] - ts[0]) / (2.0 * PI);
    if periods < 2.0 {
        result
            .warnings
            .push(FitWarning::SparseData { reason: format!("trace spans {periods:.2} periods, fewer than 2") });
    }
}

/// Thermally averaged Rabi oscillation as a fit model: `p[0]` is the bare
/// Rabi frequency, `p[1..]` the per-mode decay parameters.
pub fn rabi_trace_model(t: f64, p: &[f64]) -> f64 {
    rabi_trace(p[0], &p[1..], &[t]).map(|tr| tr.p1[0]).unwrap_or(f64::NAN)
}

/// Fit the thermally averaged Rabi oscillation to `p₁(t)` data.
///
/// With `n_modes == 1` the parameters are `rabi_freq` and `theta`; otherwise
/// `theta_0 … theta_{n−1}`, which are usually only jointly identifiable.
pub fn fit_rabi_trace(data: &DataSeries, n_modes: usize, options: &FitOptions) -> Result<FitResult> {
    if n_modes == 0 {
        return Err(Error::input("n_modes must be at least 1"));
    }
    let guess = oscillation_guess(data)?;
    let a = (1.0 / (guess.late_contrast * guess.late_contrast) - 1.0).max(0.0).sqrt();
    let theta = a / (guess.omega * guess.late_time) / (n_modes as f64).sqrt();
    let names: Vec<String> =
        if n_modes == 1 { vec!["theta".into()] } else { (0..n_modes).map(|k| format!("theta_{k}")).collect() };
    let specs = |sign: f64| {
        let mut p = vec![ParamSpec::bounded("rabi_freq", guess.omega, 0.0, f64::INFINITY)];
        p.extend(names.iter().map(|n| ParamSpec::free(n.clone(), sign * theta)));
        p
    };
    let mut result = pick_best(
        least_squares(&rabi_trace_model, data, &specs(1.0), options),
        least_squares(&rabi_trace_model, data, &specs(-1.0), options),
    )?;
    let consistent_with_zero = result.parameters[1..].iter().all(|p| p.value.abs() < 2.0 * p.uncertainty);
    if consistent_with_zero {
        result.warnings.push(FitWarning::ThetaConsistentWithZero);
    }
    let omega = result.parameters[0].value;
    warn_short_trace(&mut result, data, omega);
    Ok(result)
}

/// Two-level oscillation with exponential phase damping,
/// `p₁ = (1 − e^{−γt} cos(Ωt + φ₀))/2`.
pub fn phase_damping_model(t: f64, p: &[f64]) -> f64 {
    0.5 * (1.0 - (-p[1] * t).exp() * (p[0] * t + p[2]).cos())
}

/// Fit `rabi_freq`, `gamma` and `phase` of [`phase_damping_model`].
pub fn fit_phase_damping(data: &DataSeries, options: &FitOptions) -> Result<FitResult> {
    let guess = oscillation_guess(data)?;
    let gamma = -guess.late_contrast.ln() / guess.late_time;
    let params = [
        ParamSpec::bounded("rabi_freq", guess.omega, 0.0, f64::INFINITY),
        ParamSpec::free("gamma", gamma),
        ParamSpec::free("phase", guess.initial_phase),
    ];
    let mut result = pick_best(
        least_squares(&phase_damping_model, data, &params, options),
        least_squares(
            &phase_damping_model,
            data,
            &[params[0].clone(), params[1].clone(), ParamSpec::free("phase", 0.0)],
            options,
        ),
    )?;
    let omega = result.parameters[0].value;
    warn_short_trace(&mut result, data, omega);
    Ok(result)
}

/// Weighted straight line `θ(t_w) = theta0 + rate·t_w`, solved in closed form.
pub fn fit_theta_growth(data: &DataSeries) -> Result<FitResult> {
    let n = data.len();
    if n < 2 {
        return Err(Error::fit(format!("linear growth needs at least 2 wait times, got {n}")));
    }
    let weights: Vec<f64> = data.points.iter().map(|p| p.sigma.map_or(1.0, |s| 1.0 / (s * s))).collect();
    let (mut s, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (p, w) in data.points.iter().zip(&weights) {
        s += w;
        sx += w * p.x;
        sxx += w * p.x * p.x;
        sy += w * p.y;
        sxy += w * p.x * p.y;
    }
    // Centre x for conditioning.
    let xm = sx / s;
    let normal = Matrix2::new(s, sx - s * xm, sx - s * xm, sxx - 2.0 * xm * sx + s * xm * xm);
    let rhs = Vector2::new(sy, sxy - xm * sy);
    if !(normal[(1, 1)] > 1e-14 * sxx.abs().max(f64::MIN_POSITIVE)) {
        return Err(Error::fit("all wait times are equal"));
    }
    let inv = normal.try_inverse().ok_or_else(|| Error::fit("singular normal matrix"))?;
    let sol = inv * rhs;
    let (rate, theta0) = (sol[1], sol[0] - sol[1] * xm);

    let residuals: Vec<f64> = data.points.iter().map(|p| p.y - (theta0 + rate * p.x)).collect();
    let chi2: f64 = residuals.iter().zip(&weights).map(|(r, w)| r * r * w).sum();
    let dof = n - 2;
    let reduced = if dof > 0 { chi2 / dof as f64 } else { f64::NAN };
    let absolute_sigma = data.has_sigma();
    let scale = if absolute_sigma {
        1.0
    } else if dof > 0 {
        reduced
    } else {
        f64::INFINITY
    };
    // Back to the (theta0, rate) basis: theta0 = a − xm·rate.
    let var_rate = inv[(1, 1)] * scale;
    let cov_ab = inv[(0, 1)] * scale;
    let var_theta0 = (inv[(0, 0)] - 2.0 * xm * inv[(0, 1)] + xm * xm * inv[(1, 1)]) * scale;
    let cov_t0_rate = cov_ab - xm * var_rate;
    let fix = |v: f64| if v.is_nan() { f64::INFINITY } else { v };

    let mut warnings = Vec::new();
    if rate < 0.0 {
        warnings.push(FitWarning::NegativeSlope);
    }
    Ok(FitResult {
        parameters: vec![
            FitParameter { name: "theta0".into(), value: theta0, uncertainty: fix(var_theta0.max(0.0).sqrt()) },
            FitParameter { name: "rate".into(), value: rate, uncertainty: fix(var_rate.max(0.0).sqrt()) },
        ],
        covariance: vec![vec![fix(var_theta0), fix(cov_t0_rate)], vec![fix(cov_t0_rate), fix(var_rate)]],
        chi_squared: chi2,
        dof,
        reduced_chi_squared: reduced,
        residuals,
        converged: true,
        iterations: 1,
        absolute_sigma,
        warnings,
    })
}

/// Fit `dθ/dt_w = A ω₀^{−2−α} + B` for `amplitude`, `alpha` and `offset`.
///
/// Internally the amplitude is referenced to the geometric-mean frequency,
/// which decorrelates it from `alpha`; the reported covariance is transformed
/// back to `(A, α, B)`.
pub fn fit_theta_power_law(data: &DataSeries, options: &FitOptions) -> Result<FitResult> {
    let n = data.len();
    if data.points.iter().any(|p| p.x <= 0.0) {
        return Err(Error::input("frequencies must be positive"));
    }
    if n < 3 {
        return Err(Error::fit(format!("power law needs at least 3 points, got {n}")));
    }
    let (ws, ys) = sorted_xy(data);
    let w_ref = (ws.iter().map(|w| w.ln()).sum::<f64>() / n as f64).exp();
    let model = move |w: f64, p: &[f64]| p[0] * (w / w_ref).powf(-2.0 - p[1]) + p[2];

    let start = |offset: f64| -> Vec<ParamSpec> {
        let pts: Vec<(f64, f64)> = ws
            .iter()
            .zip(&ys)
            .filter(|(_, y)| **y - offset > 0.0)
            .map(|(w, y)| ((w / w_ref).ln(), (y - offset).ln()))
            .collect();
        let (slope, intercept) = if pts.len() >= 2 {
            let m = pts.len() as f64;
            let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let slope = if sxx > 0.0 { sxy / sxx } else { -2.0 };
            (slope, my - slope * mx)
        } else {
            (-2.0, ys.iter().sum::<f64>() / n as f64)
        };
        let alpha = (-slope - 2.0).clamp(-1.5, 9.5);
        vec![
            ParamSpec::free("amplitude_ref", intercept.exp()),
            ParamSpec::bounded("alpha", alpha, -2.0, 10.0),
            ParamSpec::free("offset", offset),
        ]
    };
    let min_y = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut fit = pick_best(
        least_squares(&model, data, &start(0.0), options),
        least_squares(&model, data, &start(if min_y > 0.0 { 0.5 * min_y } else { 0.0 }), options),
    )?;

    // (A_ref, α, B) → (A, α, B) with A = A_ref·w_ref^{2+α}.
    let (a_ref, alpha) = (fit.parameters[0].value, fit.parameters[1].value);
    let factor = w_ref.powf(2.0 + alpha);
    let amplitude = a_ref * factor;
    let jac = DMatrix::from_row_slice(3, 3, &[factor, amplitude * w_ref.ln(), 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    if fit.covariance.is_empty() {
        fit.parameters[0].uncertainty = f64::INFINITY;
    } else {
        let cov = DMatrix::from_fn(3, 3, |i, j| fit.covariance[i][j]);
        let cov = &jac * cov * jac.transpose();
        fit.covariance = (0..3).map(|i| (0..3).map(|j| cov[(i, j)]).collect()).collect();
        fit.parameters[0].uncertainty = cov[(0, 0)].max(0.0).sqrt();
    }
    fit.parameters[0].name = "amplitude".into();
    fit.parameters[0].value = amplitude;

    let decades = (ws[n - 1] / ws[0]).log10();
    if n < 4 || decades < 1.0 {
        fit.warnings.push(FitWarning::SparseData {
            reason: format!("{n} frequencies spanning {decades:.2} decades; 4 over one decade recommended"),
        });
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Binomial, Distribution, Normal};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn beam_data(waist: f64, shoulder: f64) -> DataSeries {
        let xs: Vec<f64> = (0..41).map(|k| -3e-6 + k as f64 * 0.15e-6).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| beam_profile_model(x, &[PI, 0.1e-6, waist]) + beam_profile_model(x, &[shoulder, 1.2e-6, 0.5e-6]))
            .collect();
        DataSeries::from_xy(&xs, &ys).unwrap()
    }

    #[test]
    fn beam_round_trip() {
        let fit = fit_beam_profile(&beam_data(870e-9, 0.0), &FitOptions::default()).unwrap();
        assert!(rel(fit.value("waist"), 870e-9) < 1e-6);
        assert!(rel(fit.value("amplitude"), PI) < 1e-6);
        assert!(rel(fit.value("center"), 0.1e-6) < 1e-6);
    }

    #[test]
    fn beam_shoulder_biases_and_flags() {
        let fit = fit_beam_profile(&beam_data(870e-9, 0.4), &FitOptions::default()).unwrap();
        assert!(rel(fit.value("waist"), 870e-9) > 1e-3);
        assert!(fit.has_warning(|w| matches!(w, FitWarning::ResidualStructure { .. })), "{:?}", fit.warnings);
    }

    #[test]
    fn beam_flat_and_short() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let flat = DataSeries::from_xy(&xs, &[1.0; 6]).unwrap();
        assert!(matches!(fit_beam_profile(&flat, &Default::default()), Err(Error::Fit { .. })));
        let short = DataSeries::from_xy(&xs[..4], &[0.0, 1.0, 0.5, 0.1]).unwrap();
        assert!(matches!(fit_beam_profile(&short, &Default::default()), Err(Error::Fit { .. })));
    }

    fn rabi_times() -> Vec<f64> {
        (0..120).map(|k| k as f64 * 1e-6).collect()
    }

    #[test]
    fn rabi_round_trip() {
        let omega = 2.0 * PI * 50e3;
        let ts = rabi_times();
        let ys: Vec<f64> = ts.iter().map(|&t| rabi_trace_model(t, &[omega, 0.08])).collect();
        let fit = fit_rabi_trace(&DataSeries::from_xy(&ts, &ys).unwrap(), 1, &Default::default()).unwrap();
        assert!(rel(fit.value("rabi_freq"), omega) < 1e-6);
        assert!(rel(fit.value("theta"), 0.08) < 1e-6);
    }

    fn binomial_trace(omega: f64, theta: f64, shots: u64, seed: u64) -> DataSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ts = rabi_times();
        let ys: Vec<f64> = ts
            .iter()
            .map(|&t| {
                let p = rabi_trace_model(t, &[omega, theta]);
                Binomial::new(shots, p).unwrap().sample(&mut rng) as f64 / shots as f64
            })
            .collect();
        let sig: Vec<f64> = ys.iter().map(|&p| binomial_sigma(p, shots).unwrap()).collect();
        DataSeries::from_xy_sigma(&ts, &ys, &sig).unwrap()
    }

    #[test]
    fn rabi_noisy_recovery() {
        let omega = 2.0 * PI * 50e3;
        let fit = fit_rabi_trace(&binomial_trace(omega, 0.08, 200, 11), 1, &Default::default()).unwrap();
        let th = fit.get("theta").unwrap();
        assert!((th.value - 0.08).abs() < 3.0 * th.uncertainty, "{th:?}");
        assert!(!fit.has_warning(|w| *w == FitWarning::ThetaConsistentWithZero));
    }

    #[test]
    fn rabi_zero_theta() {
        let omega = 2.0 * PI * 50e3;
        let fit = fit_rabi_trace(&binomial_trace(omega, 0.0, 200, 5), 1, &Default::default()).unwrap();
        let th = fit.get("theta").unwrap();
        assert!(th.value.abs() < 3.0 * th.uncertainty, "{th:?}");
        let om = fit.get("rabi_freq").unwrap();
        assert!((om.value - omega).abs() < 3.0 * om.uncertainty);
    }

    #[test]
    fn rabi_multi_mode_model() {
        let omega = 2.0 * PI * 50e3;
        let ts = rabi_times();
        let ys: Vec<f64> = ts.iter().map(|&t| rabi_trace_model(t, &[omega, 0.05, 0.05])).collect();
        let fit = fit_rabi_trace(&DataSeries::from_xy(&ts, &ys).unwrap(), 2, &Default::default()).unwrap();
        assert_eq!(fit.parameters.len(), 3);
        assert!(fit.chi_squared < 1e-16);
    }

    #[test]
    fn phase_damping_round_trip_and_discrimination() {
        let truth = [2.0 * PI * 50e3, 2.5e4, 0.0];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noise = Normal::new(0.0, 0.02).unwrap();
        let ts = rabi_times();
        let clean: Vec<f64> = ts.iter().map(|&t| phase_damping_model(t, &truth)).collect();
        let fit = fit_phase_damping(&DataSeries::from_xy(&ts, &clean).unwrap(), &Default::default()).unwrap();
        for (p, t) in fit.values().iter().zip(truth) {
            assert!((p - t).abs() <= 1e-6 * t.abs().max(1.0), "{p} vs {t}");
        }

        let noisy: Vec<f64> = clean.iter().map(|y| y + noise.sample(&mut rng)).collect();
        let data = DataSeries::from_xy_sigma(&ts, &noisy, &vec![0.02; ts.len()]).unwrap();
        let matched = fit_phase_damping(&data, &Default::default()).unwrap();
        let thermal = fit_rabi_trace(&data, 1, &Default::default()).unwrap();
        assert!(thermal.chi_squared > matched.chi_squared + 25.0, "{} vs {}", thermal.chi_squared, matched.chi_squared);
    }

    #[test]
    fn growth_exact_and_negative() {
        let two = DataSeries::from_xy(&[0.0, 0.01], &[0.02, 0.05]).unwrap();
        let fit = fit_theta_growth(&two).unwrap();
        assert!((fit.value("theta0") - 0.02).abs() < 1e-15);
        assert!((fit.value("rate") - 3.0).abs() < 1e-12);
        assert!(!fit.has_warning(|w| *w == FitWarning::NegativeSlope));

        let down = DataSeries::from_xy(&[0.0, 1.0, 2.0], &[1.0, 0.9, 0.8]).unwrap();
        assert!(fit_theta_growth(&down).unwrap().has_warning(|w| *w == FitWarning::NegativeSlope));
        assert!(fit_theta_growth(&DataSeries::from_xy(&[1.0], &[1.0]).unwrap()).is_err());
        assert!(fit_theta_growth(&DataSeries::from_xy(&[1.0, 1.0], &[1.0, 2.0]).unwrap()).is_err());
    }

    #[test]
    fn growth_noisy_recovery() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let noise = Normal::new(0.0, 0.003).unwrap();
        let ts: Vec<f64> = (0..8).map(|k| k as f64 * 2e-3).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 0.03 + 2.0 * t + noise.sample(&mut rng)).collect();
        let fit = fit_theta_growth(&DataSeries::from_xy_sigma(&ts, &ys, &[0.003; 8]).unwrap()).unwrap();
        assert!((fit.value("rate") - 2.0).abs() < 3.0 * fit.uncertainty("rate"));
        assert!((fit.value("theta0") - 0.03).abs() < 3.0 * fit.uncertainty("theta0"));
        // Matches the generic engine.
        let line = |x: f64, p: &[f64]| p[0] + p[1] * x;
        let data = DataSeries::from_xy_sigma(&ts, &ys, &[0.003; 8]).unwrap();
        let lm =
            least_squares(&line, &data, &[ParamSpec::free("a", 0.0), ParamSpec::free("b", 0.0)], &Default::default())
                .unwrap();
        assert!((lm.values()[1] - fit.value("rate")).abs() < 1e-8);
        assert!(rel(lm.parameters[1].uncertainty, fit.uncertainty("rate")) < 1e-5);
        assert!(rel(lm.covariance[0][1], fit.covariance[0][1]) < 1e-5);
    }

    fn power_law_data(amplitude: f64, alpha: f64, offset: f64) -> (Vec<f64>, Vec<f64>) {
        let ws: Vec<f64> = (0..10).map(|k| 2.0 * PI * 100e3 * 10f64.powf(k as f64 / 9.0)).collect();
        let ys = ws.iter().map(|&w| crate::heating::theta_rate_model(w, amplitude, offset, alpha)).collect();
        (ws, ys)
    }

    #[test]
    fn power_law_round_trip() {
        let amplitude = 3.0 * (2.0 * PI * 150e3f64).powf(2.8);
        let (ws, ys) = power_law_data(amplitude, 0.8, 0.9);
        let fit = fit_theta_power_law(&DataSeries::from_xy(&ws, &ys).unwrap(), &Default::default()).unwrap();
        assert!(rel(fit.value("amplitude"), amplitude) < 1e-6);
        assert!(rel(fit.value("alpha"), 0.8) < 1e-6);
        assert!(rel(fit.value("offset"), 0.9) < 1e-6);
    }

    #[test]
    fn power_law_noisy_and_zero_offset() {
        let amplitude = 3.0 * (2.0 * PI * 150e3f64).powf(2.8);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (ws, ys) = power_law_data(amplitude, 0.8, 0.0);
        let sig: Vec<f64> = ys.iter().map(|y| 0.02 * y + 0.02).collect();
        let noisy: Vec<f64> =
            ys.iter().zip(&sig).map(|(y, s)| y + Normal::new(0.0, *s).unwrap().sample(&mut rng)).collect();
        let fit =
            fit_theta_power_law(&DataSeries::from_xy_sigma(&ws, &noisy, &sig).unwrap(), &Default::default()).unwrap();
        let alpha = fit.get("alpha").unwrap();
        assert!((alpha.value - 0.8).abs() < 3.0 * alpha.uncertainty && alpha.uncertainty < 0.1, "{alpha:?}");
        let b = fit.get("offset").unwrap();
        assert!(b.value.abs() < 3.0 * b.uncertainty, "{b:?}");
    }

    #[test]
    fn power_law_without_amplitude_is_flagged() {
        let (ws, ys) = power_law_data(0.0, 0.8, 0.9);
        match fit_theta_power_law(&DataSeries::from_xy(&ws, &ys).unwrap(), &Default::default()) {
            Ok(fit) => assert!(fit.has_warning(|w| *w == FitWarning::DegenerateCovariance), "{fit:?}"),
            Err(e) => assert!(matches!(e, Error::Fit { .. })),
        }
    }

    #[test]
    fn binomial_sigma_floor() {
        assert_eq!(binomial_sigma(0.0, 200).unwrap(), 1.0 / 202.0);
        assert!((binomial_sigma(0.5, 100).unwrap() - 0.05).abs() < 1e-15);
        assert!(binomial_sigma(1.5, 10).is_err());
    }
}
