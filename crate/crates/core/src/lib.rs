//! Closed-loop sill microclimate simulator.
//!
//! Plants, a sometimes-present human, and wind all push on one shared
//! relative-humidity variable. A deadband controller watches that variable
//! through a noisy sensor and nudges a smart curtain in 4% steps between 50%
//! and 90% open; the curtain gates the daylight, daylight gates plant
//! transpiration, and transpiration pushes the humidity back: a negative
//! feedback loop with no human in it. A camera samples the scene for
//! time-lapse study of which motions become visible at which playback speed,
//! and a line protocol lets the same controller drive a networked curtain.
//!
//! Everything is deterministic: one master seed, labelled random streams, an
//! event queue with fixed same-instant ordering, integer-millisecond time.

pub mod actuator;
pub mod bridge;
pub mod clock;
pub mod controller;
pub mod error;
pub mod flora;
pub mod metrics;
pub mod microclimate;
pub mod rng;
pub mod scenario;
pub mod sim;
pub mod timelapse;
pub mod trace;

pub use actuator::{
    apply_command, curtain_sway, light_fraction, CommandChannel, CommandOutcome, CurtainState,
    Diurnal, LightModel,
};
pub use clock::{EventPriority, SimClock};
pub use controller::{decide, instruction_table, Command, ControllerConfig, ControllerState};
pub use error::{Error, Result};
pub use flora::{
    movement_position, preset_by_name, species_presets, transpiration_flux, Movement, PlantSpecies,
};
pub use metrics::{
    band_occupancy, negotiation_report, NegotiationReport, HUMAN_COMFORT_BAND, PLANT_COMFORT_LO,
};
pub use microclimate::{sensor_read, step_rh, FluxSet, MicroclimateState, SensorModel};
pub use rng::RandomStream;
pub use scenario::{parse_scenario, PresenceInterval, ScenarioConfig};
pub use sim::run_scenario;
pub use timelapse::{
    apparent_period, capture_schedule, estimate_period, first_perceptible_speed,
    format_perceptibility_report, frames_from_csv, frames_to_csv, interval_presets,
    perceptibility_report, resample, FrameEvent, MotionPerceptibility, PerceptibilityBand,
    PlaybackSpec,
};
pub use trace::{CommandRecord, SensorRecord, SimTrace};
