use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{IonSpecies, TrapPotential};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Convergence threshold on the largest gradient component, in units of
    /// the characteristic Coulomb force `q²/(4πε₀ℓ²)`.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tolerance: 1e-12, max_iterations: 200 }
    }
}

/// Ions at a stationary point of trap plus Coulomb energy.
#[derive(Clone, Debug, Serialize)]
pub struct EquilibriumChain {
    pub species: IonSpecies,
    pub potential: TrapPotential,
    /// Equilibrium positions in m, strictly increasing.
    pub positions: Vec<f64>,
    /// Length unit ℓ of the reduced problem, m.
    pub length_scale: f64,
    /// Energy unit `q²/(4πε₀ℓ)`, J.
    pub energy_scale: f64,
    /// Largest reduced gradient component at `positions`.
    pub residual: f64,
    pub iterations: usize,
}

/// Worst-case departure of a chain from an exactly equispaced one, in units
/// of the nominal spacing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpacingDeviation {
    /// `max_i |x_i − (i − (N−1)/2) d| / d`.
    pub position: f64,
    /// `max_i |x_{i+1} − x_i − d| / d`.
    pub spacing: f64,
}

impl EquilibriumChain {
    pub fn n_ions(&self) -> usize {
        self.positions.len()
    }

    /// Positions in units of [`length_scale`](Self::length_scale).
    pub fn reduced_positions(&self) -> Vec<f64> {
        self.positions.iter().map(|x| x / self.length_scale).collect()
    }

    pub fn deviation_from_equal_spacing(&self, spacing: f64) -> SpacingDeviation {
        let n = self.positions.len();
        let mid = (n as f64 - 1.0) / 2.0;
        let position =
            self.positions.iter().enumerate().map(|(i, x)| (x / spacing - (i as f64 - mid)).abs()).fold(0.0, f64::max);
        let spacing_dev = self.positions.windows(2).map(|w| ((w[1] - w[0]) / spacing - 1.0).abs()).fold(0.0, f64::max);
        SpacingDeviation { position, spacing: spacing_dev }
    }

    pub(crate) fn reduced_system(&self) -> ReducedChain<'_> {
        ReducedChain {
            potential: &self.potential,
            species: &self.species,
            length: self.length_scale,
            energy: self.energy_scale,
        }
    }
}

/// Chain energy in reduced units: `Σ v(u_i) + Σ_{i<j} 1/|u_i − u_j|`.
pub(crate) struct ReducedChain<'a> {
    potential: &'a TrapPotential,
    species: &'a IonSpecies,
    length: f64,
    energy: f64,
}

impl ReducedChain<'_> {
    fn trap(&self, u: f64) -> Result<super::PotentialValue> {
        self.potential.reduced(self.species, self.length, self.energy, u)
    }

    pub(crate) fn energy(&self, u: &[f64]) -> Result<f64> {
        let mut e = 0.0;
        for (i, &ui) in u.iter().enumerate() {
            e += self.trap(ui)?.value;
            for &uj in &u[i + 1..] {
                e += 1.0 / (uj - ui).abs();
            }
        }
        Ok(e)
    }

    pub(crate) fn gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut g = Vec::with_capacity(u.len());
        for (i, &ui) in u.iter().enumerate() {
            let mut gi = self.trap(ui)?.grad;
            for (j, &uj) in u.iter().enumerate() {
                if j != i {
                    let r = ui - uj;
                    gi -= r.signum() / (r * r);
                }
            }
            g.push(gi);
        }
        Ok(g)
    }

    /// Reduced Hessian: trap curvature on the diagonal plus the Coulomb
    /// terms `±2/|u_i − u_j|³`.
    pub(crate) fn hessian(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        let n = u.len();
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut diag = self.trap(u[i])?.hess;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let r = (u[i] - u[j]).abs();
                if r == 0.0 {
                    return Err(Error::DegenerateChain(format!("ions {i} and {j} coincide")));
                }
                let c = 2.0 / (r * r * r);
                h[(i, j)] = -c;
                diag += c;
            }
            h[(i, i)] = diag;
        }
        Ok(h)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn strictly_increasing(u: &[f64]) -> bool {
    u.windows(2).all(|w| w[1] > w[0])
}

fn centered(n: usize, step: f64) -> Vec<f64> {
    let mid = (n as f64 - 1.0) / 2.0;
    (0..n).map(|i| step * (i as f64 - mid)).collect()
}

fn initial_guess(system: &ReducedChain<'_>, n: usize) -> Vec<f64> {
    match system.potential {
        TrapPotential::EquispacedLog { .. } => centered(n, 1.0),
        // Minimum spacing of a harmonic chain, 2.018 N^-0.559 in units of ℓ.
        TrapPotential::Harmonic { .. } => centered(n, 2.018 * (n as f64).powf(-0.559)),
        TrapPotential::QuadQuartic { .. } => {
            // Best uniform spacing on a logarithmic grid.
            let mut best = (f64::INFINITY, 1.0);
            for k in -60..=60 {
                let s = 10f64.powf(k as f64 / 30.0);
                if let Ok(e) = system.energy(&centered(n, s)) {
                    if e < best.0 {
                        best = (e, s);
                    }
                }
            }
            centered(n, best.1)
        }
    }
}

/// Equilibrium positions of `n_ions` ions in `potential`, by damped Newton on
/// the reduced energy gradient with a gradient-descent fallback.
pub fn find_equilibrium(
    species: &IonSpecies,
    potential: &TrapPotential,
    n_ions: usize,
    options: SolverOptions,
) -> Result<EquilibriumChain> {
    potential.validate()?;
    if n_ions == 0 {
        return Err(Error::input("n_ions must be at least 1"));
    }
    let length = potential.length_scale(species);
    let energy = potential.energy_scale(species);
    let system = ReducedChain { potential, species, length, energy };

    let mut u = initial_guess(&system, n_ions);
    let mut e = system.energy(&u)?;
    let mut g = system.gradient(&u)?;
    let mut residual = max_abs(&g);
    let mut iterations = 0;

    while residual >= options.tolerance {
        if iterations >= options.max_iterations {
            return Err(Error::Solver { iterations, residual });
        }
        iterations += 1;

        let grad = DVector::from_column_slice(&g);
        let newton = system.hessian(&u)?.cholesky().map(|c| -c.solve(&grad)).filter(|d| d.dot(&grad) < 0.0);
        let directions = match newton {
            Some(d) => vec![d, -grad.clone()],
            None => vec![-grad.clone()],
        };

        let mut accepted = None;
        'search: for dir in &directions {
            let slope = dir.dot(&grad);
            let mut t = 1.0;
            for _ in 0..60 {
                let trial: Vec<f64> = u.iter().zip(dir.iter()).map(|(a, b)| a + t * b).collect();
                if strictly_increasing(&trial) {
                    if let (Ok(e_new), Ok(g_new)) = (system.energy(&trial), system.gradient(&trial)) {
                        let r_new = max_abs(&g_new);
                        if e_new <= e + 1e-4 * t * slope || r_new < residual {
                            accepted = Some((trial, e_new, g_new, r_new));
                            break 'search;
                        }
                    }
                }
                t *= 0.5;
            }
        }
        match accepted {
            Some((trial, e_new, g_new, r_new)) => {
                u = trial;
                e = e_new;
                g = g_new;
                residual = r_new;
            }
            None => return Err(Error::Solver { iterations, residual }),
        }
    }

    Ok(EquilibriumChain {
        species: species.clone(),
        potential: potential.clone(),
        positions: u.iter().map(|x| x * length).collect(),
        length_scale: length,
        energy_scale: energy,
        residual,
        iterations,
    })
}
