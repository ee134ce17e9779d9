use serde::{Deserialize, Serialize};

use crate::constants::{AMU, ELECTRON_MASS_AMU};
use crate::{Error, Result};

/// An ion species: mass and charge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IonSpecies {
    /// Mass in kg.
    pub mass: f64,
    /// Charge in units of the elementary charge.
    pub charge: u32,
    pub label: String,
}

/// Neutral atomic masses (u) for the species recognised by label.
const KNOWN_SPECIES: &[(&str, f64)] = &[
    ("9Be+", 9.012_183_06),
    ("25Mg+", 24.985_836_98),
    ("40Ca+", 39.962_590_86),
    ("43Ca+", 42.958_766_4),
    ("88Sr+", 87.905_612_5),
    ("138Ba+", 137.905_247),
    ("171Yb+", 170.936_331_5),
    ("172Yb+", 171.936_386_6),
    ("174Yb+", 173.938_867_5),
];

impl IonSpecies {
    pub fn new(label: impl Into<String>, mass: f64, charge: u32) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::input(format!("ion mass must be positive, got {mass}")));
        }
        if charge < 1 {
            return Err(Error::input("ion charge must be at least 1"));
        }
        Ok(IonSpecies { mass, charge, label: label.into() })
    }

    /// Singly charged ion with the given mass in atomic mass units.
    pub fn from_amu(label: impl Into<String>, mass_amu: f64) -> Result<Self> {
        Self::new(label, mass_amu * AMU, 1)
    }

    /// Look up a singly charged species by label such as `"171Yb+"`. The ion
    /// mass is the neutral atomic mass minus one electron.
    pub fn from_label(label: &str) -> Result<Self> {
        KNOWN_SPECIES
            .iter()
            .find(|(name, _)| name.eq_ignore_ascii_case(label))
            .map(|&(name, atomic)| Self::from_amu(name, atomic - ELECTRON_MASS_AMU))
            .unwrap_or_else(|| {
                let known: Vec<_> = KNOWN_SPECIES.iter().map(|(n, _)| *n).collect();
                Err(Error::input(format!("unknown species `{label}` (known: {})", known.join(", "))))
            })
    }

    pub fn yb171() -> Self {
        Self::from_label("171Yb+").expect("built-in species")
    }

    pub fn mass_amu(&self) -> f64 {
        self.mass / AMU
    }

    /// Charge in coulombs.
    pub fn charge_coulomb(&self) -> f64 {
        self.charge as f64 * crate::constants::ELEMENTARY_CHARGE
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_mass_and_charge() {
        assert!(IonSpecies::new("x", 0.0, 1).is_err());
        assert!(IonSpecies::new("x", -1.0, 1).is_err());
        assert!(IonSpecies::new("x", 1e-25, 0).is_err());
    }

    #[test]
    fn label_lookup() {
        let yb = IonSpecies::from_label("171yb+").unwrap();
        assert!((yb.mass_amu() - 170.9358).abs() < 1e-3);
        assert_eq!(yb.charge, 1);
        assert!(IonSpecies::from_label("unobtainium").is_err());
    }
}
