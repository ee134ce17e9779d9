use serde::{Deserialize, Serialize};

use super::IonSpecies;
use crate::constants::coulomb_constant;
use crate::{Error, Result};

/// Axial confinement.
///
/// * `Harmonic` – `½ M ω₀² x²`.
/// * `QuadQuartic` – `a2 x² + a4 x⁴`, with `a2` in J/m² and `a4` in J/m⁴.
///   `a2` may be negative (double well) provided `a4 > 0`.
/// * `EquispacedLog` – `q²/(4πε₀d) · ln[(N/2)² / ((N/2)² − (x/d)²)]`, the
///   potential cancelling the field of a uniform line charge `q/d` of length
///   `N d`. Defined only for `|x| < N d / 2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrapPotential {
    Harmonic { omega0: f64 },
    QuadQuartic { a2: f64, a4: f64 },
    EquispacedLog { n_ions: usize, spacing: f64 },
}

/// Potential energy and its first two derivatives at one point (SI).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialValue {
    pub value: f64,
    pub grad: f64,
    pub hess: f64,
}

impl TrapPotential {
    pub fn harmonic(omega0: f64) -> Result<Self> {
        let p = TrapPotential::Harmonic { omega0 };
        p.validate()?;
        Ok(p)
    }

    pub fn quad_quartic(a2: f64, a4: f64) -> Result<Self> {
        let p = TrapPotential::QuadQuartic { a2, a4 };
        p.validate()?;
        Ok(p)
    }

    pub fn equispaced_log(n_ions: usize, spacing: f64) -> Result<Self> {
        let p = TrapPotential::EquispacedLog { n_ions, spacing };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TrapPotential::Harmonic { omega0 } => {
                if !(omega0.is_finite() && omega0 > 0.0) {
                    return Err(Error::input(format!("harmonic omega0 must be positive, got {omega0}")));
                }
            }
            TrapPotential::QuadQuartic { a2, a4 } => {
                if !(a2.is_finite() && a4.is_finite()) {
                    return Err(Error::input("quad-quartic coefficients must be finite"));
                }
                if a4 < 0.0 || !(a2 > 0.0 || a4 > 0.0) {
                    return Err(Error::input(format!(
                        "quad-quartic potential is not confining (a2={a2:e}, a4={a4:e})"
                    )));
                }
            }
            TrapPotential::EquispacedLog { n_ions, spacing } => {
                if n_ions < 2 {
                    return Err(Error::input("equispaced-log potential needs n_ions >= 2"));
                }
                if !(spacing.is_finite() && spacing > 0.0) {
                    return Err(Error::input(format!("spacing must be positive, got {spacing}")));
                }
            }
        }
        Ok(())
    }

    /// Value, gradient and curvature at `x` (m) for an ion of `species`.
    pub fn eval(&self, species: &IonSpecies, x: f64) -> Result<PotentialValue> {
        Ok(match *self {
            TrapPotential::Harmonic { omega0 } => {
                let k = species.mass * omega0 * omega0;
                PotentialValue { value: 0.5 * k * x * x, grad: k * x, hess: k }
            }
            TrapPotential::QuadQuartic { a2, a4 } => {
                let x2 = x * x;
                PotentialValue {
                    value: a2 * x2 + a4 * x2 * x2,
                    grad: 2.0 * a2 * x + 4.0 * a4 * x2 * x,
                    hess: 2.0 * a2 + 12.0 * a4 * x2,
                }
            }
            TrapPotential::EquispacedLog { n_ions, spacing } => {
                let q = species.charge_coulomb();
                let scale = coulomb_constant() * q * q / spacing;
                let half_sq = (n_ions as f64 / 2.0).powi(2);
                let u = x / spacing;
                let gap = half_sq - u * u;
                if !(gap > 0.0) {
                    return Err(Error::domain(format!(
                        "x = {x:e} m lies outside the equispaced-log domain |x| < {:e} m",
                        n_ions as f64 * spacing / 2.0
                    )));
                }
                PotentialValue {
                    value: scale * (half_sq / gap).ln(),
                    grad: scale * 2.0 * u / (gap * spacing),
                    hess: scale * (2.0 * half_sq + 2.0 * u * u) / (gap * gap * spacing * spacing),
                }
            }
        })
    }

    /// Length `ℓ` used to nondimensionalise the chain: the ion spacing for
    /// `EquispacedLog`, and for the polynomial traps the length at which the
    /// trap curvature equals `q²/(4πε₀ℓ³)`, so that `ω_u = ω₀` for a harmonic
    /// trap.
    pub fn length_scale(&self, species: &IonSpecies) -> f64 {
        let q = species.charge_coulomb();
        let kq2 = coulomb_constant() * q * q;
        match *self {
            TrapPotential::Harmonic { omega0 } => (kq2 / (species.mass * omega0 * omega0)).cbrt(),
            TrapPotential::QuadQuartic { a2, a4 } => {
                if a2 > 0.0 {
                    (kq2 / (2.0 * a2)).cbrt()
                } else {
                    (kq2 / (12.0 * a4)).powf(0.2)
                }
            }
            TrapPotential::EquispacedLog { spacing, .. } => spacing,
        }
    }

    /// Energy scale `q²/(4πε₀ℓ)` matching [`length_scale`](Self::length_scale).
    pub fn energy_scale(&self, species: &IonSpecies) -> f64 {
        let q = species.charge_coulomb();
        coulomb_constant() * q * q / self.length_scale(species)
    }

    /// Dimensionless potential `v(u) = V(ℓu) / E₀` with its derivatives in `u`.
    pub(crate) fn reduced(&self, species: &IonSpecies, length: f64, energy: f64, u: f64) -> Result<PotentialValue> {
        let p = self.eval(species, u * length)?;
        Ok(PotentialValue {
            value: p.value / energy,
            grad: p.grad * length / energy,
            hess: p.hess * length * length / energy,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite_diff(p: &TrapPotential, s: &IonSpecies, x: f64, h: f64) -> (f64, f64) {
        let f = |x: f64| p.eval(s, x).unwrap().value;
        let g = |x: f64| p.eval(s, x).unwrap().grad;
        ((f(x + h) - f(x - h)) / (2.0 * h), (g(x + h) - g(x - h)) / (2.0 * h))
    }

    #[test]
    fn equispaced_log_vanishes_at_center() {
        let s = IonSpecies::yb171();
        let p = TrapPotential::equispaced_log(15, 4.4e-6).unwrap();
        let v = p.eval(&s, 0.0).unwrap();
        assert_eq!(v.value, 0.0);
        assert_eq!(v.grad, 0.0);
        assert!(v.hess > 0.0);
    }

    #[test]
    fn harmonic_curvature_is_constant() {
        let s = IonSpecies::yb171();
        let w = 2.0 * std::f64::consts::PI * 140e3;
        let p = TrapPotential::harmonic(w).unwrap();
        for x in [-3e-6, 0.0, 1e-6, 7e-6] {
            let v = p.eval(&s, x).unwrap();
            assert!((v.hess - s.mass * w * w).abs() <= 1e-15 * v.hess);
        }
    }

    #[test]
    fn equispaced_log_matches_finite_differences() {
        let s = IonSpecies::yb171();
        let d = 4.4e-6;
        let p = TrapPotential::equispaced_log(15, d).unwrap();
        let x = 2.2e-6;
        let v = p.eval(&s, x).unwrap();
        let (grad_fd, hess_fd) = finite_diff(&p, &s, x, 1e-4 * d);
        assert!(((v.grad - grad_fd) / v.grad).abs() < 1e-6);
        assert!(((v.hess - hess_fd) / v.hess).abs() < 1e-6);
    }

    #[test]
    fn quad_quartic_matches_finite_differences() {
        let s = IonSpecies::yb171();
        let p = TrapPotential::quad_quartic(-1e-15, 3e-4).unwrap();
        let x = 5e-6;
        let v = p.eval(&s, x).unwrap();
        let (grad_fd, hess_fd) = finite_diff(&p, &s, x, 1e-9);
        assert!(((v.grad - grad_fd) / v.grad).abs() < 1e-6);
        assert!(((v.hess - hess_fd) / v.hess).abs() < 1e-6);
    }

    #[test]
    fn equispaced_log_domain_error() {
        let s = IonSpecies::yb171();
        let p = TrapPotential::equispaced_log(4, 1e-6).unwrap();
        assert!(matches!(p.eval(&s, 2e-6), Err(Error::Domain(_))));
        assert!(matches!(p.eval(&s, -2.5e-6), Err(Error::Domain(_))));
        assert!(p.eval(&s, 1.99e-6).is_ok());
    }

    #[test]
    fn invariants_enforced() {
        assert!(TrapPotential::harmonic(0.0).is_err());
        assert!(TrapPotential::equispaced_log(1, 1e-6).is_err());
        assert!(TrapPotential::equispaced_log(5, 0.0).is_err());
        assert!(TrapPotential::quad_quartic(0.0, 0.0).is_err());
        assert!(TrapPotential::quad_quartic(1.0, -1.0).is_err());
        assert!(TrapPotential::quad_quartic(-1.0, 1.0).is_ok());
    }

    #[test]
    fn harmonic_length_scale_gives_unit_curvature() {
        let s = IonSpecies::yb171();
        let p = TrapPotential::harmonic(1e6).unwrap();
        let l = p.length_scale(&s);
        let e = p.energy_scale(&s);
        let r = p.reduced(&s, l, e, 0.3).unwrap();
        assert!((r.hess - 1.0).abs() < 1e-12);
    }
}
