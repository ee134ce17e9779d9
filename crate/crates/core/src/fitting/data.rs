use serde::Serialize;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DataPoint {
    pub x: f64,
    pub y: f64,
    /// One-sigma uncertainty of `y`, when known.
    pub sigma: Option<f64>,
}

/// Measured `(x, y[, σ_y])` points. Either every point carries a σ or none
/// does.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DataSeries {
    pub points: Vec<DataPoint>,
    pub x_label: String,
    pub y_label: String,
}

impl DataSeries {
    pub fn new(points: Vec<DataPoint>) -> Result<Self> {
        for (k, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::input(format!("data point {k} is not finite")));
            }
            if let Some(s) = p.sigma {
                if !(s.is_finite() && s > 0.0) {
                    return Err(Error::input(format!("data point {k} has non-positive sigma {s}")));
                }
            }
        }
        let with_sigma = points.iter().filter(|p| p.sigma.is_some()).count();
        if with_sigma != 0 && with_sigma != points.len() {
            return Err(Error::input("either all data points or none must carry sigma"));
        }
        Ok(DataSeries { points, x_label: "x".into(), y_label: "y".into() })
    }

    pub fn from_xy(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::input("x and y lengths differ"));
        }
        Self::new(x.iter().zip(y).map(|(&x, &y)| DataPoint { x, y, sigma: None }).collect())
    }

    pub fn from_xy_sigma(x: &[f64], y: &[f64], sigma: &[f64]) -> Result<Self> {
        if x.len() != y.len() || x.len() != sigma.len() {
            return Err(Error::input("x, y and sigma lengths differ"));
        }
        Self::new(x.iter().zip(y).zip(sigma).map(|((&x, &y), &s)| DataPoint { x, y, sigma: Some(s) }).collect())
    }

    pub fn with_labels(mut self, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        self.x_label = x_label.into();
        self.y_label = y_label.into();
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn has_sigma(&self) -> bool {
        self.points.first().is_some_and(|p| p.sigma.is_some())
    }

    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.y).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitParameter {
    pub name: String,
    pub value: f64,
    /// One-sigma uncertainty; infinite when the covariance is degenerate.
    pub uncertainty: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FitWarning {
    /// The normal matrix is singular or nearly so; some parameters are not
    /// identifiable from the data.
    DegenerateCovariance,
    /// Residual signs cluster (Wald-Wolfowitz runs test, `z` below −3),
    /// pointing at model mismatch.
    ResidualStructure {
        z: f64,
    },
    ParameterAtBound {
        name: String,
    },
    /// Fitted decay parameter is within two sigma of zero.
    ThetaConsistentWithZero,
    /// A decreasing decay parameter is unphysical for heating.
    NegativeSlope,
    /// Fewer points or a narrower range than the model comfortably needs.
    SparseData {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub parameters: Vec<FitParameter>,
    pub covariance: Vec<Vec<f64>>,
    pub chi_squared: f64,
    pub dof: usize,
    /// `chi_squared / dof`, NaN when `dof == 0`.
    pub reduced_chi_squared: f64,
    /// `y − model`, in the order the data were given.
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// True when uncertainties come from the supplied σ without rescaling by
    /// the reduced chi-square.
    pub absolute_sigma: bool,
    pub warnings: Vec<FitWarning>,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<&FitParameter> {
        self.parameters.iter().find(|p| p.name == name)
    }

    /// Value of the named parameter. Panics if the fit has no such parameter.
    pub fn value(&self, name: &str) -> f64 {
        self.get(name).unwrap_or_else(|| panic!("no fit parameter `{name}`")).value
    }

    pub fn uncertainty(&self, name: &str) -> f64 {
        self.get(name).unwrap_or_else(|| panic!("no fit parameter `{name}`")).uncertainty
    }

    pub fn values(&self) -> Vec<f64> {
        self.parameters.iter().map(|p| p.value).collect()
    }

    pub fn has_warning(&self, pred: impl Fn(&FitWarning) -> bool) -> bool {
        self.warnings.iter().any(pred)
    }
}
