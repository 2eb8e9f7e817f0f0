//! The closed-loop scenario runner.
//!
//! A single event queue drives the installation: every second the
//! disturbances refresh and the microclimate integrates, every controller
//! tick the sensor is read and a decision made, every capture interval the
//! camera records a frame. Same-instant events fire in [`EventPriority`]
//! order, and all randomness comes from labelled streams, so a scenario and
//! seed fix the trace exactly.

use std::collections::BTreeMap;

use crate::actuator::{curtain_sway, light_fraction, CurtainState};
use crate::clock::{EventPriority, EventQueue, SimClock, MS_PER_S};
use crate::controller::{Command, ControllerState};
use crate::error::{Error, Result};
use crate::flora::{movement_position, transpiration_flux};
use crate::microclimate::{sensor_read, step_rh, FluxSet, MicroclimateState};
use crate::rng::RandomStream;
use crate::scenario::ScenarioConfig;
use crate::timelapse::FrameEvent;
use crate::trace::{CommandRecord, SensorRecord, SimTrace};

/// Integration step for the continuous parts (microclimate, ramp, wind).
const SIM_STEP_MS: u64 = MS_PER_S;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EventKind {
    Disturbance,
    MicroStep,
    SensorRead,
    ControllerTick,
    /// A command arriving at the device after the channel delay.
    DeliverTarget(i64),
    ActuatorStep,
    Camera,
}

fn to_ms(seconds: f64) -> u64 {
    (seconds * MS_PER_S as f64).round() as u64
}

/// Run one scenario to completion and return its trace.
///
/// Re-running with an identical scenario and seed yields an identical trace,
/// byte for byte once serialized.
pub fn run_scenario(scenario: &ScenarioConfig) -> Result<SimTrace> {
    scenario.validate()?;
    let tick_ms = to_ms(scenario.controller.tick_s);
    if tick_ms == 0 {
        return Err(Error::config(
            "controller.tick_s",
            "below the millisecond grid",
        ));
    }
    let capture_ms = to_ms(scenario.capture_interval_s);
    if capture_ms == 0 {
        return Err(Error::config("camera.interval_s", "below the millisecond grid"));
    }
    let duration_ms = to_ms(scenario.duration_s);

    let mut wind_rng = RandomStream::new(scenario.seed, "wind");
    let mut noise_rng = RandomStream::new(scenario.seed, "sensor-noise");
    let mut channel_rng = RandomStream::new(scenario.seed, "channel");

    let mut state = MicroclimateState {
        rh_percent: scenario.initial_rh,
        rh_exterior: scenario.exterior_rh,
        air_exchange_per_s: scenario.air_exchange_per_s,
    };
    let mut fluxes = FluxSet::default();
    let mut device = CurtainState::new(
        scenario.controller.initial_opening,
        scenario.ramp_rate_pct_per_s,
    );
    let mut controller = ControllerState::new(&scenario.controller);
    let mut last_reading: Option<f64> = None;

    let mut clock = SimClock::new();
    let mut queue: EventQueue<EventKind> = EventQueue::new();
    let mut last_micro_ms = 0u64;
    let mut last_ramp_ms = 0u64;

    queue.push(0, EventPriority::Disturbance, EventKind::Disturbance);
    queue.push(0, EventPriority::MicroclimateStep, EventKind::MicroStep);
    queue.push(0, EventPriority::SensorRead, EventKind::SensorRead);
    queue.push(0, EventPriority::Controller, EventKind::ControllerTick);
    queue.push(0, EventPriority::Actuator, EventKind::ActuatorStep);
    queue.push(0, EventPriority::Camera, EventKind::Camera);

    let mut trace = SimTrace::default();

    let time_of_day = |t_ms: u64| -> f64 {
        (scenario.start_time_s + t_ms as f64 / MS_PER_S as f64).rem_euclid(86_400.0)
    };

    while let Some((t_ms, priority, kind)) = queue.pop() {
        if t_ms > duration_ms {
            break;
        }
        clock.advance_to_ms(t_ms);
        let t_s = clock.now_s();

        match kind {
            EventKind::Disturbance => {
                // One wind draw per second regardless of amplitude, so tuning
                // the amplitude never shifts the stream.
                let gust = wind_rng.next_gaussian();
                fluxes.wind = scenario.wind_amplitude * gust;
                fluxes.human = scenario.human_flux_at(t_s);
                queue.push(t_ms + SIM_STEP_MS, priority, kind);
            }
            EventKind::MicroStep => {
                let light = light_fraction(device.opening_pct, time_of_day(t_ms), &scenario.light);
                fluxes.plant = scenario
                    .species
                    .iter()
                    .map(|sp| {
                        transpiration_flux(sp, light, state.rh_percent)
                            .expect("sim keeps light and rh in range")
                    })
                    .sum();
                let dt_s = (t_ms - last_micro_ms) as f64 / MS_PER_S as f64;
                if dt_s > 0.0 {
                    state = step_rh(&state, &fluxes, dt_s);
                }
                last_micro_ms = t_ms;
                queue.push(t_ms + SIM_STEP_MS, priority, kind);
            }
            EventKind::SensorRead => {
                let reading = sensor_read(&state, &scenario.sensor, &fluxes, &mut noise_rng);
                trace.sensor_log.push(SensorRecord {
                    t_s,
                    rh_true: state.rh_percent,
                    rh_read: reading,
                    opening_pct: device.opening_pct,
                    light_frac: light_fraction(device.opening_pct, time_of_day(t_ms), &scenario.light),
                });
                last_reading = Some(reading);
                queue.push(t_ms + tick_ms, priority, kind);
            }
            EventKind::ControllerTick => {
                let reading = last_reading.expect("sensor reads before the controller every tick");
                let (cmd, next) = crate::controller::decide(&controller, reading, &scenario.controller);
                if let Command::SetOpening(target) = cmd {
                    let dropped = scenario.channel.roll_drop(&mut channel_rng);
                    trace.commands.push(CommandRecord {
                        t_s,
                        target_pct: target,
                        pre_opening_pct: device.opening_pct,
                        post_opening_pct: target,
                        dropped,
                    });
                    if !dropped {
                        let delay_ms = to_ms(scenario.channel.delay_s);
                        queue.push(
                            t_ms + delay_ms,
                            EventPriority::Actuator,
                            EventKind::DeliverTarget(target),
                        );
                    }
                }
                controller = next;
                queue.push(t_ms + tick_ms, priority, kind);
            }
            EventKind::DeliverTarget(target) => {
                device = device
                    .with_target(target)
                    .expect("instruction table targets are within device range");
            }
            EventKind::ActuatorStep => {
                let dt_s = (t_ms - last_ramp_ms) as f64 / MS_PER_S as f64;
                if dt_s > 0.0 && !device.settled() {
                    device = device.step_ramp(dt_s);
                }
                last_ramp_ms = t_ms;
                queue.push(t_ms + SIM_STEP_MS, priority, kind);
            }
            EventKind::Camera => {
                let mut motions = BTreeMap::new();
                motions.insert("curtain-sway".to_owned(), curtain_sway(t_s));
                for sp in &scenario.species {
                    for m in &sp.movements {
                        motions.insert(m.label.clone(), movement_position(m, t_s));
                    }
                }
                trace.frames.push(FrameEvent {
                    t_s,
                    rh_true: state.rh_percent,
                    rh_read: last_reading.unwrap_or(state.rh_percent),
                    opening_pct: device.opening_pct,
                    light_frac: light_fraction(device.opening_pct, time_of_day(t_ms), &scenario.light),
                    motions,
                });
                queue.push(t_ms + capture_ms, priority, kind);
            }
        }
    }

    Ok(trace)
}
