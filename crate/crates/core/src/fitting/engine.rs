use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DataSeries, FitParameter, FitResult, FitWarning};
use crate::chain::jacobi::jacobi_eigen;
use crate::{Error, Result};

/// One model parameter: starting value and box bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub guess: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ParamSpec {
    pub fn free(name: impl Into<String>, guess: f64) -> Self {
        ParamSpec { name: name.into(), guess, lower: f64::NEG_INFINITY, upper: f64::INFINITY }
    }

    pub fn bounded(name: impl Into<String>, guess: f64, lower: f64, upper: f64) -> Self {
        ParamSpec { name: name.into(), guess, lower, upper }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FitOptions {
    /// Seed for the jittered restarts.
    pub seed: u64,
    pub max_iterations: usize,
    /// Number of starts: the guess itself plus `starts − 1` jittered copies.
    pub starts: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { seed: 0, max_iterations: 500, starts: 3 }
    }
}

const FTOL: f64 = 1e-15;
const XTOL: f64 = 1e-13;
const LAMBDA_MAX: f64 = 1e16;

struct Problem<'a> {
    model: &'a dyn Fn(f64, &[f64]) -> f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
    weights: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    typical: Vec<f64>,
}

struct Run {
    params: Vec<f64>,
    chi2: f64,
    converged: bool,
    iterations: usize,
}

impl Problem<'_> {
    fn residuals(&self, p: &[f64]) -> Option<DVector<f64>> {
        let r = DVector::from_iterator(
            self.xs.len(),
            self.xs.iter().zip(&self.ys).zip(&self.weights).map(|((&x, &y), &w)| (y - (self.model)(x, p)) * w),
        );
        r.iter().all(|v| v.is_finite()).then_some(r)
    }

    fn clamp(&self, p: &mut [f64]) {
        for ((v, lo), hi) in p.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*lo, *hi);
        }
    }

    /// Central-difference Jacobian of the weighted model, one-sided at bounds.
    fn jacobian(&self, p: &[f64]) -> DMatrix<f64> {
        let n = self.xs.len();
        let mut jac = DMatrix::zeros(n, p.len());
        let mut q = p.to_vec();
        for j in 0..p.len() {
            let h = 1e-6 * (p[j].abs() + self.typical[j]);
            let hi = (p[j] + h).min(self.upper[j]);
            let lo = (p[j] - h).max(self.lower[j]);
            if hi <= lo {
                continue;
            }
            q[j] = hi;
            let f_hi: Vec<f64> = self.xs.iter().map(|&x| (self.model)(x, &q)).collect();
            q[j] = lo;
            for (k, &x) in self.xs.iter().enumerate() {
                let d = (f_hi[k] - (self.model)(x, &q)) / (hi - lo);
                jac[(k, j)] = if d.is_finite() { d * self.weights[k] } else { 0.0 };
            }
            q[j] = p[j];
        }
        jac
    }

    fn levenberg_marquardt(&self, start: Vec<f64>, max_iterations: usize) -> Option<Run> {
        let mut p = start;
        let mut r = self.residuals(&p)?;
        let mut chi2 = r.norm_squared();
        let mut lambda = -1.0;
        let mut converged = false;
        let mut iterations = 0;

        'outer: while iterations < max_iterations {
            iterations += 1;
            if chi2 == 0.0 {
                converged = true;
                break;
            }
            let jac = self.jacobian(&p);
            let mut a = jac.transpose() * &jac;
            let mut g = jac.transpose() * &r;
            // Parameters pinned at a bound with the descent direction pointing
            // outward are held fixed for this iteration.
            for j in 0..p.len() {
                let pinned = (p[j] <= self.lower[j] && g[j] < 0.0) || (p[j] >= self.upper[j] && g[j] > 0.0);
                if pinned {
                    a.row_mut(j).fill(0.0);
                    a.column_mut(j).fill(0.0);
                    a[(j, j)] = 1.0;
                    g[j] = 0.0;
                }
            }
            let diag: Vec<f64> = a.diagonal().iter().map(|d| d.max(1e-300)).collect();
            if lambda < 0.0 {
                lambda = 1e-3 * diag.iter().cloned().fold(0.0, f64::max);
                lambda = lambda.max(1e-12);
            }
            loop {
                let mut m = a.clone();
                for (j, d) in diag.iter().enumerate() {
                    m[(j, j)] += lambda * d;
                }
                let step = m.cholesky().map(|c| c.solve(&g));
                if let Some(step) = step {
                    let mut trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
                    self.clamp(&mut trial);
                    if let Some(r_new) = self.residuals(&trial) {
                        let chi2_new = r_new.norm_squared();
                        if chi2_new < chi2 {
                            let small_step =
                                p.iter().zip(&trial).all(|(a, b)| (a - b).abs() <= XTOL * (a.abs() + XTOL));
                            let small_gain = (chi2 - chi2_new) <= FTOL * chi2;
                            p = trial;
                            r = r_new;
                            chi2 = chi2_new;
                            lambda = (lambda / 3.0).max(1e-15);
                            if small_step || small_gain {
                                converged = true;
                                break 'outer;
                            }
                            continue 'outer;
                        }
                    }
                }
                lambda *= 4.0;
                if lambda > LAMBDA_MAX {
                    // No downhill step at any damping: a minimum to working
                    // precision.
                    converged = true;
                    break 'outer;
                }
            }
        }
        Some(Run { params: p, chi2, converged, iterations })
    }
}

/// Wald-Wolfowitz z-score of the residual signs, for `n ≥ 10` nonzero
/// residuals with both signs present.
fn runs_z(residuals: &[f64]) -> Option<f64> {
    let signs: Vec<bool> = residuals.iter().filter(|r| **r != 0.0).map(|r| *r > 0.0).collect();
    let n = signs.len() as f64;
    let pos = signs.iter().filter(|s| **s).count() as f64;
    let neg = n - pos;
    if signs.len() < 10 || pos == 0.0 || neg == 0.0 {
        return None;
    }
    let runs = 1.0 + signs.windows(2).filter(|w| w[0] != w[1]).count() as f64;
    let mean = 2.0 * pos * neg / n + 1.0;
    let var = (mean - 1.0) * (mean - 2.0) / (n - 1.0);
    (var > 0.0).then(|| (runs - mean) / var.sqrt())
}

/// Covariance `(JᵀJ)⁻¹` of the weighted problem, or `None` when the
/// correlation-normalised normal matrix is singular or its condition number
/// exceeds 1e14.
fn covariance(jac: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let a = jac.transpose() * jac;
    let k = a.nrows();
    let d: Vec<f64> = a.diagonal().iter().map(|v| v.sqrt()).collect();
    if d.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return None;
    }
    let normalized = DMatrix::from_fn(k, k, |i, j| a[(i, j)] / (d[i] * d[j]));
    let eig = jacobi_eigen(&normalized).ok()?;
    let (lo, hi) = (eig.values[0], eig.values[k - 1]);
    if !(lo > 0.0) || hi / lo > 1e14 {
        return None;
    }
    let inv = normalized.cholesky()?.inverse();
    Some(DMatrix::from_fn(k, k, |i, j| inv[(i, j)] / (d[i] * d[j])))
}

/// Minimise `Σ ((y_k − model(x_k, p)) / σ_k)²` over `p` within the bounds of
/// `params`, by Levenberg-Marquardt with finite-difference Jacobians.
///
/// The fit is started from the guess and from `starts − 1` deterministic
/// jittered copies; the lowest chi-square wins, ties going to the earliest
/// start. Points are processed in sorted order, so the result does not depend
/// on how the data are ordered. Without σ the covariance is scaled by the
/// reduced chi-square.
pub fn least_squares(
    model: &dyn Fn(f64, &[f64]) -> f64,
    data: &DataSeries,
    params: &[ParamSpec],
    options: &FitOptions,
) -> Result<FitResult> {
    let k = params.len();
    if k == 0 {
        return Err(Error::input("a fit needs at least one parameter"));
    }
    if data.len() < k {
        return Err(Error::fit(format!("{} data points cannot determine {k} parameters", data.len())));
    }
    for p in params {
        if !(p.lower <= p.guess && p.guess <= p.upper) || !p.guess.is_finite() {
            return Err(Error::input(format!(
                "guess {} for `{}` is outside [{}, {}]",
                p.guess, p.name, p.lower, p.upper
            )));
        }
    }

    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&data.points[a], &data.points[b]);
        pa.x.total_cmp(&pb.x)
            .then(pa.y.total_cmp(&pb.y))
            .then(pa.sigma.unwrap_or(1.0).total_cmp(&pb.sigma.unwrap_or(1.0)))
    });
    let guess: Vec<f64> = params.iter().map(|p| p.guess).collect();
    let problem = Problem {
        model,
        xs: order.iter().map(|&i| data.points[i].x).collect(),
        ys: order.iter().map(|&i| data.points[i].y).collect(),
        weights: order.iter().map(|&i| 1.0 / data.points[i].sigma.unwrap_or(1.0)).collect(),
        lower: params.iter().map(|p| p.lower).collect(),
        upper: params.iter().map(|p| p.upper).collect(),
        typical: guess.iter().map(|g| if *g != 0.0 { g.abs() } else { 1e-3 }).collect(),
    };
    if problem.residuals(&guess).is_none() {
        return Err(Error::input("model is not finite at the initial guess"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut best: Option<Run> = None;
    for start in 0..options.starts.max(1) {
        let mut p = guess.clone();
        if start > 0 {
            for (j, v) in p.iter_mut().enumerate() {
                let (lo, hi) = (problem.lower[j], problem.upper[j]);
                let scale = if *v != 0.0 {
                    0.1 * v.abs()
                } else if lo.is_finite() && hi.is_finite() {
                    0.01 * (hi - lo)
                } else {
                    0.1
                };
                *v += scale * rng.random_range(-1.0..1.0);
            }
            problem.clamp(&mut p);
        }
        if let Some(run) = problem.levenberg_marquardt(p, options.max_iterations) {
            if best.as_ref().is_none_or(|b| run.chi2 < b.chi2) {
                best = Some(run);
            }
        }
    }
    let best = best.ok_or_else(|| Error::fit("model is not finite at any start"))?;
    if !best.converged {
        return Err(Error::Fit {
            reason: format!("no convergence after {} iterations", best.iterations),
            best: Some(best.params),
        });
    }

    let residuals_sorted = problem.residuals(&best.params).expect("finite at optimum");
    let dof = data.len() - k;
    let reduced = if dof > 0 { best.chi2 / dof as f64 } else { f64::NAN };
    let absolute_sigma = data.has_sigma();
    let scale = if absolute_sigma {
        1.0
    } else if dof > 0 {
        reduced
    } else {
        f64::INFINITY
    };

    let mut warnings = Vec::new();
    let cov = covariance(&problem.jacobian(&best.params));
    let (uncertainties, covariance) = match cov {
        Some(c) => {
            let c = c * scale;
            let u = (0..k).map(|j| c[(j, j)].max(0.0).sqrt()).collect::<Vec<_>>();
            let rows = (0..k).map(|i| (0..k).map(|j| c[(i, j)]).collect()).collect();
            (u, rows)
        }
        None => {
            warnings.push(FitWarning::DegenerateCovariance);
            (vec![f64::INFINITY; k], Vec::new())
        }
    };
    for (j, p) in params.iter().enumerate() {
        let v = best.params[j];
        if (v == p.lower || v == p.upper) && p.lower != p.upper {
            warnings.push(FitWarning::ParameterAtBound { name: p.name.clone() });
        }
    }
    if let Some(z) = runs_z(residuals_sorted.as_slice()) {
        if z < -3.0 {
            warnings.push(FitWarning::ResidualStructure { z });
        }
    }

    let mut residuals = vec![0.0; data.len()];
    for (sorted_pos, &orig) in order.iter().enumerate() {
        residuals[orig] = residuals_sorted[sorted_pos] / problem.weights[sorted_pos];
    }

    Ok(FitResult {
        parameters: params
            .iter()
            .zip(&best.params)
            .zip(&uncertainties)
            .map(|((s, &value), &uncertainty)| FitParameter { name: s.name.clone(), value, uncertainty })
            .collect(),
        covariance,
        chi_squared: best.chi2,
        dof,
        reduced_chi_squared: reduced,
        residuals,
        converged: true,
        iterations: best.iterations,
        absolute_sigma,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn line(x: f64, p: &[f64]) -> f64 {
        p[0] + p[1] * x
    }

    #[test]
    fn exact_line() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.5 - 0.25 * x).collect();
        let data = DataSeries::from_xy(&xs, &ys).unwrap();
        let fit = least_squares(
            &line,
            &data,
            &[ParamSpec::free("a", 0.0), ParamSpec::free("b", 1.0)],
            &FitOptions::default(),
        )
        .unwrap();
        assert!((fit.value("a") - 1.5).abs() < 1e-9);
        assert!((fit.value("b") + 0.25).abs() < 1e-9);
        assert_eq!(fit.residuals.len(), 10);
    }

    #[test]
    fn noisy_quadratic_recovery() {
        let truth = [0.3, -1.2, 0.8];
        let quad = |x: f64, p: &[f64]| p[0] + p[1] * x + p[2] * x * x;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let xs: Vec<f64> = (0..40).map(|k| -1.0 + k as f64 / 20.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| quad(x, &truth) + noise.sample(&mut rng)).collect();
        let data = DataSeries::from_xy_sigma(&xs, &ys, &vec![0.01; xs.len()]).unwrap();
        let specs = [ParamSpec::free("c0", 0.0), ParamSpec::free("c1", 0.0), ParamSpec::free("c2", 0.0)];
        let fit = least_squares(&quad, &data, &specs, &FitOptions::default()).unwrap();
        for (p, t) in fit.parameters.iter().zip(truth) {
            assert!((p.value - t).abs() < 3.0 * p.uncertainty, "{p:?}");
        }
        assert!(fit.absolute_sigma);
    }

    #[test]
    fn too_few_points() {
        let data = DataSeries::from_xy(&[1.0], &[2.0]).unwrap();
        let err =
            least_squares(&line, &data, &[ParamSpec::free("a", 0.0), ParamSpec::free("b", 0.0)], &Default::default());
        assert!(matches!(err, Err(Error::Fit { .. })));
    }

    #[test]
    fn guess_outside_bounds_rejected() {
        let data = DataSeries::from_xy(&[1.0, 2.0], &[2.0, 3.0]).unwrap();
        let specs = [ParamSpec::bounded("a", 5.0, 0.0, 1.0), ParamSpec::free("b", 0.0)];
        assert!(matches!(least_squares(&line, &data, &specs, &Default::default()), Err(Error::Input(_))));
    }

    #[test]
    fn bounds_are_respected() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 + x).collect();
        let data = DataSeries::from_xy(&xs, &ys).unwrap();
        let specs = [ParamSpec::bounded("a", 0.5, 0.0, 1.0), ParamSpec::free("b", 0.0)];
        let fit = least_squares(&line, &data, &specs, &Default::default()).unwrap();
        assert_eq!(fit.value("a"), 1.0);
        assert!(fit.has_warning(|w| matches!(w, FitWarning::ParameterAtBound { .. })));
    }

    #[test]
    fn order_independent() {
        let xs: Vec<f64> = (0..25).map(|k| k as f64 * 0.3).collect();
        let ys: Vec<f64> = xs.iter().map(|&x: &f64| 2.0 * (-0.4 * x).exp() + 0.01 * (7.0 * x).sin()).collect();
        let model = |x: f64, p: &[f64]| p[0] * (-p[1] * x).exp();
        let specs = [ParamSpec::free("a", 1.0), ParamSpec::free("k", 1.0)];
        let a = least_squares(&model, &DataSeries::from_xy(&xs, &ys).unwrap(), &specs, &Default::default()).unwrap();
        let rx: Vec<f64> = xs.iter().rev().copied().collect();
        let ry: Vec<f64> = ys.iter().rev().copied().collect();
        let b = least_squares(&model, &DataSeries::from_xy(&rx, &ry).unwrap(), &specs, &Default::default()).unwrap();
        assert_eq!(a.values(), b.values());
        let rev: Vec<f64> = b.residuals.iter().rev().copied().collect();
        assert_eq!(a.residuals, rev);
    }

    #[test]
    fn runs_test_flags_structure() {
        let structured: Vec<f64> = (0..40).map(|k| if (k / 10) % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(runs_z(&structured).unwrap() < -3.0);
        let alternating: Vec<f64> = (0..40).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(runs_z(&alternating).unwrap() > 0.0);
    }
}
