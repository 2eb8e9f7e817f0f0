//! Plant species models: light-driven transpiration and slow periodic
//! movements.
//!
//! Transpiration is a dryness-gated linear law (a vapor-pressure-deficit
//! proxy, not a stomatal model). Movements are pure sinusoids; only their
//! periods matter to the time-lapse analysis.

use crate::error::{Error, Result};

/// A slow periodic motion of some plant part.
#[derive(Debug, Clone, PartialEq)]
pub struct Movement {
    pub label: String,
    pub period_s: f64,
    /// Normalized displacement amplitude in [0, 1].
    pub amplitude: f64,
}

impl Movement {
    pub fn new(label: impl Into<String>, period_s: f64, amplitude: f64) -> Self {
        Movement {
            label: label.into(),
            period_s,
            amplitude,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.period_s.is_finite() || self.period_s <= 0.0 {
            return Err(Error::config("movement.period_s", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.amplitude) {
            return Err(Error::config("movement.amplitude", "must be in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantSpecies {
    pub name: String,
    /// Lower edge of the species' comfort humidity band, %RH.
    pub comfort_rh_lo: f64,
    /// Transpiration coefficient: flux in %RH/s at full light and rh = 0.
    pub transp_coeff_k: f64,
    pub movements: Vec<Movement>,
}

impl PlantSpecies {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::config("species.name", "must not be empty"));
        }
        if self.transp_coeff_k < 0.0 || !self.transp_coeff_k.is_finite() {
            return Err(Error::config("species.transp_coeff_k", "must be >= 0"));
        }
        if !(0.0..=100.0).contains(&self.comfort_rh_lo) {
            return Err(Error::config("species.comfort_rh_lo", "must be in [0, 100]"));
        }
        for m in &self.movements {
            m.validate()?;
        }
        Ok(())
    }
}

/// Transpiration flux in %RH/s: `k * light_frac * (1 - rh/100)`.
///
/// Increases with light, vanishes in darkness and in saturated air.
pub fn transpiration_flux(species: &PlantSpecies, light_frac: f64, rh: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&light_frac) {
        return Err(Error::Input(format!(
            "light_frac {light_frac} out of [0, 1]"
        )));
    }
    if !(0.0..=100.0).contains(&rh) {
        return Err(Error::Input(format!("rh {rh} out of [0, 100]")));
    }
    Ok(species.transp_coeff_k * light_frac * (1.0 - rh / 100.0))
}

/// Displacement of a movement at time `t`: `amplitude * sin(2*pi*t/period)`.
pub fn movement_position(movement: &Movement, t_s: f64) -> f64 {
    debug_assert!(t_s >= 0.0);
    movement.amplitude * (std::f64::consts::TAU * t_s / movement.period_s).sin()
}

/// The three stock sill species.
///
/// The k values are calibrated so the ensemble's noon flux moves humidity by
/// 0.1-0.3 %RH per 25 s controller tick; the movement periods are calibrated
/// so the leaf flap first reads as motion at 3x playback and the stem nod at
/// 5x (see the timelapse module). Comfort bands other than the Monstera's
/// 50% floor are ordinary houseplant figures.
pub fn species_presets() -> Vec<PlantSpecies> {
    vec![
        PlantSpecies {
            name: "Monstera Deliciosa".to_owned(),
            comfort_rh_lo: 50.0,
            transp_coeff_k: 0.004,
            movements: vec![Movement::new("stem-nod", 36_000.0, 0.4)],
        },
        PlantSpecies {
            name: "Clivia Miniata".to_owned(),
            comfort_rh_lo: 45.0,
            transp_coeff_k: 0.003,
            movements: vec![Movement::new("leaf-flap", 14_400.0, 0.7)],
        },
        PlantSpecies {
            name: "Jasmine Sambac".to_owned(),
            comfort_rh_lo: 50.0,
            transp_coeff_k: 0.003,
            movements: vec![],
        },
    ]
}

/// Look up a stock species by name.
pub fn preset_by_name(name: &str) -> Option<PlantSpecies> {
    species_presets().into_iter().find(|s| s.name == name)
}
