//! Relative-humidity dynamics of the sill microclimate and the sensor model.
//!
//! One humidity variable aggregates the flux of every agent (plants, a
//! present human, wind) plus a first-order relaxation toward the exterior
//! air. The sensor adds placement bias and gaussian noise, then quantizes.

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Window over which placement bias accumulates a source's flux, in seconds.
/// Matches the controller tick so a weight of 1.5 on a source biases the
/// reading by half that source's per-tick contribution.
pub const BIAS_WINDOW_S: f64 = 25.0;

/// The shared humidity state every agent influences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroclimateState {
    /// Relative humidity, clamped to [0, 100] after every step.
    pub rh_percent: f64,
    /// Exterior relative humidity, constant per scenario.
    pub rh_exterior: f64,
    /// Air-exchange rate toward the exterior, 1/s.
    pub air_exchange_per_s: f64,
}

impl MicroclimateState {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=100.0).contains(&self.rh_percent) {
            return Err(Error::config("rh_percent", "must be in [0, 100]"));
        }
        if !(0.0..=100.0).contains(&self.rh_exterior) {
            return Err(Error::config("rh_exterior", "must be in [0, 100]"));
        }
        if !self.air_exchange_per_s.is_finite() || self.air_exchange_per_s < 0.0 {
            return Err(Error::config("air_exchange_per_s", "must be >= 0"));
        }
        Ok(())
    }
}

/// Per-source humidity fluxes in %RH/s.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FluxSet {
    /// Light-driven transpiration; zero whenever the light fraction is zero.
    pub plant: f64,
    /// Breathing and sweating of a present human; zero when absent.
    pub human: f64,
    /// Wind through the window gap; may be negative (dry gusts).
    pub wind: f64,
}

impl FluxSet {
    pub fn total(&self) -> f64 {
        self.plant + self.human + self.wind
    }
}

/// One integration step of the humidity dynamics:
/// `rh' = rh + dt * (sum of fluxes + exchange * (exterior - rh))`, clamped.
pub fn step_rh(state: &MicroclimateState, fluxes: &FluxSet, dt_s: f64) -> MicroclimateState {
    debug_assert!(dt_s > 0.0, "step_rh needs dt > 0");
    let drift = fluxes.total() + state.air_exchange_per_s * (state.rh_exterior - state.rh_percent);
    let rh = (state.rh_percent + dt_s * drift).clamp(0.0, 100.0);
    MicroclimateState {
        rh_percent: rh,
        ..*state
    }
}

/// Humidity sensor with per-source placement weights and gaussian noise.
///
/// A weight of 1 is neutral placement; above 1 the sensor sits close to that
/// source and over-reports its contribution, below 1 it sits in the shade of
/// it. Readings are quantized to `resolution` and clamped to [0, 100].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorModel {
    pub placement_weight_plant: f64,
    pub placement_weight_human: f64,
    pub placement_weight_wind: f64,
    /// Quantization step, %RH.
    pub resolution: f64,
    /// Standard deviation of the additive gaussian noise, %RH.
    pub noise_sd: f64,
}

impl Default for SensorModel {
    fn default() -> Self {
        SensorModel {
            placement_weight_plant: 1.0,
            placement_weight_human: 1.0,
            placement_weight_wind: 1.0,
            resolution: 0.01,
            noise_sd: 0.02,
        }
    }
}

impl SensorModel {
    pub fn validate(&self) -> Result<()> {
        for (name, w) in [
            ("placement_weight_plant", self.placement_weight_plant),
            ("placement_weight_human", self.placement_weight_human),
            ("placement_weight_wind", self.placement_weight_wind),
        ] {
            if !(0.0..=2.0).contains(&w) {
                return Err(Error::config(name, "must be in [0, 2]"));
            }
        }
        if !self.resolution.is_finite() || self.resolution <= 0.0 {
            return Err(Error::config("resolution", "must be > 0"));
        }
        if self.noise_sd < 0.0 || !self.noise_sd.is_finite() {
            return Err(Error::config("noise_sd", "must be >= 0"));
        }
        Ok(())
    }
}

/// Read the sensor: true humidity, plus placement bias accumulated over
/// [`BIAS_WINDOW_S`], plus noise, quantized round-half-to-even to the sensor
/// resolution and clamped to [0, 100].
pub fn sensor_read(
    state: &MicroclimateState,
    sensor: &SensorModel,
    fluxes: &FluxSet,
    rng: &mut RandomStream,
) -> f64 {
    let bias = (sensor.placement_weight_plant - 1.0) * fluxes.plant * BIAS_WINDOW_S
        + (sensor.placement_weight_human - 1.0) * fluxes.human * BIAS_WINDOW_S
        + (sensor.placement_weight_wind - 1.0) * fluxes.wind * BIAS_WINDOW_S;
    let noise = if sensor.noise_sd > 0.0 {
        sensor.noise_sd * rng.next_gaussian()
    } else {
        // Keep the counter moving so enabling noise never shifts later draws.
        rng.next_gaussian();
        0.0
    };
    quantize(
        (state.rh_percent + bias + noise).clamp(0.0, 100.0),
        sensor.resolution,
    )
}

/// Round-half-to-even quantization; the result is an exact multiple of
/// `resolution` up to f64 representation.
fn quantize(value: f64, resolution: f64) -> f64 {
    (value / resolution).round_ties_even() * resolution
}
