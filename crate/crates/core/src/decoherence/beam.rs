use serde::Serialize;

use crate::{Error, Result};

/// Rabi frequency of an addressing beam along the trap axis.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BeamProfile {
    /// `Ω(x) = Ω_peak exp(−(x − x_c)²/w²)`, where `w` is the 1/e² intensity
    /// radius (the field amplitude falls as `e^{-x²/w²}`).
    Gaussian {
        peak_rabi: f64,
        center: f64,
        waist: f64,
    },
    Tabulated(TabulatedBeam),
}

/// Natural cubic spline through sampled `(x, Ω)` pairs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TabulatedBeam {
    x: Vec<f64>,
    rabi: Vec<f64>,
    #[serde(skip)]
    second: Vec<f64>,
}

impl TabulatedBeam {
    pub fn new(x: Vec<f64>, rabi: Vec<f64>) -> Result<Self> {
        if x.len() != rabi.len() {
            return Err(Error::input("tabulated beam: x and rabi lengths differ"));
        }
        if x.len() < 4 {
            return Err(Error::input("tabulated beam needs at least 4 samples"));
        }
        if x.iter().chain(&rabi).any(|v| !v.is_finite()) {
            return Err(Error::input("tabulated beam samples must be finite"));
        }
        if !x.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::input("tabulated beam x must be strictly increasing"));
        }
        let second = natural_spline_second_derivatives(&x, &rabi);
        Ok(TabulatedBeam { x, rabi, second })
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.x.iter().copied().zip(self.rabi.iter().copied())
    }

    fn interval(&self, x: f64) -> usize {
        match self.x.partition_point(|&xi| xi <= x) {
            0 => 0,
            k => (k - 1).min(self.x.len() - 2),
        }
    }

    fn value_and_second(&self, x: f64) -> (f64, f64) {
        let k = self.interval(x);
        let h = self.x[k + 1] - self.x[k];
        let a = (self.x[k + 1] - x) / h;
        let b = (x - self.x[k]) / h;
        let (m0, m1) = (self.second[k], self.second[k + 1]);
        let value =
            a * self.rabi[k] + b * self.rabi[k + 1] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        (value, a * m0 + b * m1)
    }
}

/// Second derivatives of the natural cubic spline (zero at both ends), by the
/// Thomas algorithm.
fn natural_spline_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let lower = h0 / 6.0;
        let diag = (h0 + h1) / 3.0;
        let upper = h1 / 6.0;
        let rhs = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        let denom = diag - lower * c_prime[i - 1];
        c_prime[i] = upper / denom;
        d_prime[i] = (rhs - lower * d_prime[i - 1]) / denom;
    }
    for i in (1..n - 1).rev() {
        m[i] = d_prime[i] - c_prime[i] * m[i + 1];
    }
    m
}

impl BeamProfile {
    pub fn gaussian(peak_rabi: f64, center: f64, waist: f64) -> Result<Self> {
        if !(waist.is_finite() && waist > 0.0) {
            return Err(Error::input(format!("beam waist must be positive, got {waist}")));
        }
        if !(peak_rabi.is_finite() && peak_rabi >= 0.0) {
            return Err(Error::input(format!("peak Rabi frequency must be >= 0, got {peak_rabi}")));
        }
        if !center.is_finite() {
            return Err(Error::input("beam center must be finite"));
        }
        Ok(BeamProfile::Gaussian { peak_rabi, center, waist })
    }

    pub fn tabulated(x: Vec<f64>, rabi: Vec<f64>) -> Result<Self> {
        TabulatedBeam::new(x, rabi).map(BeamProfile::Tabulated)
    }

    /// Rabi frequency Ω(x), rad/s.
    pub fn rabi_at(&self, x: f64) -> Result<f64> {
        match self {
            BeamProfile::Gaussian { peak_rabi, center, waist } => {
                let s = (x - center) / waist;
                Ok(peak_rabi * (-s * s).exp())
            }
            BeamProfile::Tabulated(t) => {
                let (lo, hi) = (t.x[0], t.x[t.x.len() - 1]);
                if !(x >= lo && x <= hi) {
                    return Err(Error::domain(format!("x = {x:e} outside tabulated range [{lo:e}, {hi:e}]")));
                }
                Ok(t.value_and_second(x).0)
            }
        }
    }

    /// Relative curvature Ω''(x)/Ω(x), m⁻². For tabulated beams the outermost
    /// sample on each side is excluded from the valid range.
    pub fn curvature_ratio(&self, x: f64) -> Result<f64> {
        match self {
            BeamProfile::Gaussian { center, waist, .. } => {
                let s2 = ((x - center) / waist).powi(2);
                Ok((4.0 * s2 - 2.0) / (waist * waist))
            }
            BeamProfile::Tabulated(t) => {
                let n = t.x.len();
                let (lo, hi) = (t.x[1], t.x[n - 2]);
                if !(x >= lo && x <= hi) {
                    return Err(Error::domain(format!(
                        "curvature query x = {x:e} outside interior range [{lo:e}, {hi:e}]"
                    )));
                }
                let (value, second) = t.value_and_second(x);
                if value == 0.0 {
                    return Err(Error::domain(format!("beam amplitude vanishes at x = {x:e}")));
                }
                Ok(second / value)
            }
        }
    }
}
