//! Shared fixtures for the criterion benchmarks.

use sillsim_core::{Diurnal, ScenarioConfig};

/// A one-hour slice of the stock scenario.
pub fn one_hour_scenario() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.duration_s = 3_600.0;
    cfg
}

/// Plants-only loop under constant noon light, one hour.
pub fn plants_only_scenario() -> ScenarioConfig {
    let mut cfg = one_hour_scenario();
    cfg.wind_amplitude = 0.0;
    cfg.sensor.noise_sd = 0.0;
    cfg.presence.clear();
    cfg.light.diurnal = Diurnal::Constant(1.0);
    cfg
}
