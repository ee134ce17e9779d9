use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::jacobi::jacobi_eigen;
use super::{find_equilibrium, EquilibriumChain, IonSpecies, SolverOptions, TrapPotential};
use crate::{Error, Result};

/// Axial normal modes of an equilibrium chain.
#[derive(Clone, Debug)]
pub struct ModeDecomposition {
    /// Mode angular frequencies ω_m (rad/s), ascending.
    pub frequencies: Vec<f64>,
    /// Eigenvalues λ_m of the reduced Hessian, `ω_m = ω_u √λ_m`.
    pub eigenvalues: Vec<f64>,
    /// Participation `b_im`: row `i` is the ion, column `m` the mode.
    pub participation: DMatrix<f64>,
    /// ω_u = sqrt(q²/(4πε₀ M ℓ³)), rad/s.
    pub unit_frequency: f64,
}

impl ModeDecomposition {
    pub fn n_modes(&self) -> usize {
        self.frequencies.len()
    }

    pub fn participation_sum(&self, mode: usize) -> f64 {
        self.participation.column(mode).sum()
    }

    /// `(Σ_i b_im)²`, the work a uniform field does on mode `m` relative to a
    /// single ion.
    pub fn uniform_field_enhancement(&self, mode: usize) -> f64 {
        self.participation_sum(mode).powi(2)
    }

    pub fn lowest_frequency(&self) -> f64 {
        self.frequencies[0]
    }
}

/// Reduced Hessian `Q` of the chain energy at equilibrium. The energy near
/// equilibrium is `(E₀/2) Σ δu_i Q_ij δu_j` with `E₀ = q²/(4πε₀ℓ)` and
/// `δu = δx/ℓ`.
pub fn hessian_matrix(chain: &EquilibriumChain) -> Result<DMatrix<f64>> {
    chain.reduced_system().hessian(&chain.reduced_positions())
}

/// Flip each column so that its entries sum to a non-negative number; ties
/// are broken by making the first non-negligible entry positive.
fn fix_signs(vectors: &mut DMatrix<f64>) {
    for mut col in vectors.column_iter_mut() {
        let sum: f64 = col.sum();
        let flip =
            if sum.abs() > 1e-12 { sum < 0.0 } else { col.iter().find(|x| x.abs() > 1e-12).is_some_and(|x| *x < 0.0) };
        if flip {
            col.neg_mut();
        }
    }
}

fn unit_frequency(chain: &EquilibriumChain) -> f64 {
    let charge = chain.species.charge_coulomb();
    (crate::constants::coulomb_constant() * charge * charge / (chain.species.mass * chain.length_scale.powi(3))).sqrt()
}

/// Lowest mode frequency alone, by inverse iteration on the reduced Hessian.
/// Much cheaper than [`normal_modes`] for long chains.
pub fn lowest_mode_frequency(chain: &EquilibriumChain) -> Result<f64> {
    let q = hessian_matrix(chain)?;
    let Some(chol) = q.clone().cholesky() else {
        // Not positive definite; let the full solver name the unstable mode.
        return normal_modes(chain).map(|m| m.lowest_frequency());
    };
    let n = q.nrows();
    let mut x = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lambda = f64::INFINITY;
    for _ in 0..1000 {
        let mut y = chol.solve(&x);
        y /= y.norm();
        let next = y.dot(&(&q * &y));
        x = y;
        let converged = (next - lambda).abs() <= 1e-14 * next;
        lambda = next;
        if converged {
            return Ok(unit_frequency(chain) * lambda.sqrt());
        }
    }
    Err(Error::Solver { iterations: 1000, residual: (&q * &x - &x * lambda).norm() })
}

pub fn normal_modes(chain: &EquilibriumChain) -> Result<ModeDecomposition> {
    let q = hessian_matrix(chain)?;
    let eig = jacobi_eigen(&q)?;
    if let Some((mode, &eigenvalue)) = eig.values.iter().enumerate().find(|(_, &l)| !(l > 0.0)) {
        return Err(Error::UnstableChain { mode, eigenvalue });
    }
    let mut participation = eig.vectors;
    fix_signs(&mut participation);
    let unit_frequency = unit_frequency(chain);
    Ok(ModeDecomposition {
        frequencies: eig.values.iter().map(|l| unit_frequency * l.sqrt()).collect(),
        eigenvalues: eig.values,
        participation,
        unit_frequency,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanPoint {
    pub n_ions: usize,
    /// Lowest axial angular frequency, rad/s.
    pub omega0: f64,
}

/// Lowest axial mode frequency of equispaced-log chains with spacing `spacing`
/// for each ion number in `n_list`.
pub fn lowest_mode_scan(species: &IonSpecies, spacing: f64, n_list: &[usize]) -> Result<Vec<ScanPoint>> {
    n_list
        .iter()
        .map(|&n| {
            if n < 2 {
                return Err(Error::input(format!("scan needs N >= 2, got {n}")));
            }
            let potential = TrapPotential::equispaced_log(n, spacing)?;
            let chain = find_equilibrium(species, &potential, n, SolverOptions::default())?;
            Ok(ScanPoint { n_ions: n, omega0: lowest_mode_frequency(&chain)? })
        })
        .collect()
}

/// Least-squares slope and intercept of `ln y` against `ln x`, i.e. the
/// exponent `k` and prefactor `c` of `y ≈ c x^k`.
pub fn power_law_exponent(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::input("power-law fit needs at least two points"));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::input("power-law fit needs positive data"));
    }
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| {
        let dx = x.ln() - mx;
        (a + dx * (y.ln() - my), b + dx * dx)
    });
    if sxx == 0.0 {
        return Err(Error::input("power-law fit needs distinct x values"));
    }
    let k = sxy / sxx;
    Ok((k, (my - k * mx).exp()))
}
