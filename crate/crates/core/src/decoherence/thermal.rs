use serde::Serialize;

use crate::{Error, Result};

/// Occupation below which the classical thermal treatment is questionable.
pub const LOW_OCCUPANCY: f64 = 10.0;

/// Mean axial occupation per mode.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThermalState {
    pub nbar: Vec<f64>,
}

/// Non-fatal validity warnings.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Warning {
    /// `n̄_m` is below [`LOW_OCCUPANCY`]; the averaging assumes `n̄ ≫ 1`.
    LowOccupancy { mode: usize, nbar: f64 },
}

impl ThermalState {
    pub fn new(nbar: Vec<f64>) -> Result<Self> {
        if let Some(bad) = nbar.iter().find(|n| !(n.is_finite() && **n >= 0.0)) {
            return Err(Error::input(format!("mean occupation must be finite and >= 0, got {bad}")));
        }
        Ok(ThermalState { nbar })
    }

    pub fn uniform(n_modes: usize, nbar: f64) -> Result<Self> {
        Self::new(vec![nbar; n_modes])
    }

    pub fn warnings(&self) -> Vec<Warning> {
        self.nbar
            .iter()
            .enumerate()
            .filter(|(_, &n)| n < LOW_OCCUPANCY)
            .map(|(mode, &nbar)| Warning::LowOccupancy { mode, nbar })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn warns_below_ten() {
        let t = ThermalState::new(vec![280.0, 3.0, 10.0]).unwrap();
        assert_eq!(t.warnings(), vec![Warning::LowOccupancy { mode: 1, nbar: 3.0 }]);
    }

    #[test]
    fn rejects_negative() {
        assert!(ThermalState::new(vec![1.0, -0.5]).is_err());
        assert!(ThermalState::new(vec![f64::NAN]).is_err());
    }
}
