//! CODATA 2018 physical constants. These are the only copies used anywhere in
//! the crate.

use std::f64::consts::PI;

/// Reduced Planck constant ħ, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant k_B, J/K (exact).
pub const K_B: f64 = 1.380_649e-23;
/// Elementary charge e, C (exact).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Vacuum permittivity ε₀, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Electron mass in atomic mass units.
pub const ELECTRON_MASS_AMU: f64 = 5.485_799_090_65e-4;

/// Coulomb constant 1/(4πε₀), N·m²/C².
pub fn coulomb_constant() -> f64 {
    1.0 / (4.0 * PI * EPSILON_0)
}

/// Angular frequency (rad/s) from an ordinary frequency in kHz.
pub fn khz_to_angular(khz: f64) -> f64 {
    2.0 * PI * khz * 1e3
}

/// Ordinary frequency in kHz from an angular frequency (rad/s).
pub fn angular_to_khz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coulomb_constant_value() {
        assert!((coulomb_constant() - 8.987_551_792e9).abs() / 8.987_551_792e9 < 1e-9);
    }

    #[test]
    fn khz_round_trip() {
        let w = khz_to_angular(193.0);
        assert!((angular_to_khz(w) - 193.0).abs() < 1e-12);
    }
}
