//! Curtain device model: opening state with a motion ramp, the lossy command
//! channel in front of it, and the light transmission the opening produces.

use crate::controller::Command;
use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Curtain opening state. The device resolves whole percent; motion toward
/// the target advances at `ramp_rate_pct_per_s`, at least 1% per step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurtainState {
    pub opening_pct: i64,
    pub target_pct: i64,
    pub ramp_rate_pct_per_s: f64,
}

impl CurtainState {
    pub fn new(opening_pct: i64, ramp_rate_pct_per_s: f64) -> Self {
        CurtainState {
            opening_pct,
            target_pct: opening_pct,
            ramp_rate_pct_per_s,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0..=100).contains(&self.opening_pct) {
            return Err(Error::config("curtain.opening_pct", "must be in [0, 100]"));
        }
        if !(0..=100).contains(&self.target_pct) {
            return Err(Error::config("curtain.target_pct", "must be in [0, 100]"));
        }
        if !self.ramp_rate_pct_per_s.is_finite() || self.ramp_rate_pct_per_s <= 0.0 {
            return Err(Error::config("curtain.ramp_rate", "must be > 0"));
        }
        Ok(())
    }

    /// Retarget the device, rejecting openings outside the 0-100% range the
    /// hardware accepts (the same check the bridge answers with ERR RANGE).
    pub fn with_target(&self, target_pct: i64) -> Result<CurtainState> {
        if !(0..=100).contains(&target_pct) {
            return Err(Error::Device(format!(
                "target {target_pct}% out of range 0-100"
            )));
        }
        Ok(CurtainState {
            target_pct,
            ..*self
        })
    }

    /// Advance the motion ramp by `dt_s`. The opening moves toward the target
    /// by `round(ramp_rate * dt)`, never less than 1%, never overshooting.
    pub fn step_ramp(&self, dt_s: f64) -> CurtainState {
        debug_assert!(dt_s > 0.0);
        let gap = self.target_pct - self.opening_pct;
        if gap == 0 {
            return *self;
        }
        let step = ((self.ramp_rate_pct_per_s * dt_s).round() as i64).max(1);
        let moved = gap.signum() * step.min(gap.abs());
        CurtainState {
            opening_pct: self.opening_pct + moved,
            ..*self
        }
    }

    pub fn settled(&self) -> bool {
        self.opening_pct == self.target_pct
    }

    /// Run the ramp to completion.
    pub fn settle(&self) -> CurtainState {
        CurtainState {
            opening_pct: self.target_pct,
            ..*self
        }
    }
}

/// Reliability model of the command path between controller and device.
/// Voice links mis-hear: a command is lost with `drop_prob`, and an accepted
/// one takes effect `delay_s` after it was issued.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommandChannel {
    pub drop_prob: f64,
    pub delay_s: f64,
}

impl Default for CommandChannel {
    fn default() -> Self {
        CommandChannel {
            drop_prob: 0.0,
            delay_s: 1.0,
        }
    }
}

impl CommandChannel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.drop_prob) {
            return Err(Error::config("channel.drop_prob", "must be in [0, 1]"));
        }
        if self.delay_s < 0.0 || !self.delay_s.is_finite() {
            return Err(Error::config("channel.delay_s", "must be >= 0"));
        }
        Ok(())
    }

    /// Roll the loss lottery for one transmitted command. Consumes one draw
    /// regardless of `drop_prob` so tuning it never shifts later draws.
    pub fn roll_drop(&self, rng: &mut RandomStream) -> bool {
        rng.next_bool(self.drop_prob)
    }
}

/// What became of a command sent through the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandOutcome {
    /// Hold: nothing to transmit.
    Held,
    /// Lost in transit; the device state is untouched.
    Dropped,
    /// The device accepted the new target.
    Delivered,
}

/// Send a command through the channel and apply it to the device.
///
/// The returned state has the new target; callers that model the channel
/// delay schedule the retarget `delay_s` after issue instead (the sim does),
/// and the ramp advances on subsequent [`CurtainState::step_ramp`] calls.
pub fn apply_command(
    state: &CurtainState,
    cmd: &Command,
    channel: &CommandChannel,
    rng: &mut RandomStream,
) -> Result<(CurtainState, CommandOutcome)> {
    match cmd {
        Command::Hold => Ok((*state, CommandOutcome::Held)),
        Command::SetOpening(target) => {
            if channel.roll_drop(rng) {
                return Ok((*state, CommandOutcome::Dropped));
            }
            Ok((state.with_target(*target)?, CommandOutcome::Delivered))
        }
    }
}

/// How much daylight passes: zero at night, a half-sine through the day (or a
/// fixed level for bench-style runs), scaled by the curtain transmissivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Diurnal {
    /// `sin(pi * (t - sunrise) / (sunset - sunrise))` between sunrise and
    /// sunset, zero outside.
    HalfSine { sunrise_s: f64, sunset_s: f64 },
    /// Fixed daylight level in [0, 1]; noon is 1.
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightModel {
    /// Light fraction passed by a fully closed curtain: sheer fabric, not
    /// blackout, so the plants keep their indirect light.
    pub transmissivity_closed: f64,
    pub transmissivity_open: f64,
    pub diurnal: Diurnal,
}

pub const SECONDS_PER_DAY: f64 = 86_400.0;

impl Default for LightModel {
    fn default() -> Self {
        LightModel {
            transmissivity_closed: 0.1,
            transmissivity_open: 1.0,
            diurnal: Diurnal::HalfSine {
                sunrise_s: 21_600.0,
                sunset_s: 64_800.0,
            },
        }
    }
}

impl LightModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.transmissivity_closed)
            || !(0.0..=1.0).contains(&self.transmissivity_open)
            || self.transmissivity_closed >= self.transmissivity_open
        {
            return Err(Error::config(
                "light.transmissivity",
                "need 0 <= closed < open <= 1",
            ));
        }
        match self.diurnal {
            Diurnal::HalfSine { sunrise_s, sunset_s } => {
                if !(0.0..=SECONDS_PER_DAY).contains(&sunrise_s)
                    || !(0.0..=SECONDS_PER_DAY).contains(&sunset_s)
                    || sunrise_s >= sunset_s
                {
                    return Err(Error::config(
                        "light.sunrise_s",
                        "need 0 <= sunrise < sunset <= 86400",
                    ));
                }
            }
            Diurnal::Constant(level) => {
                if !(0.0..=1.0).contains(&level) {
                    return Err(Error::config("light.constant_level", "must be in [0, 1]"));
                }
            }
        }
        Ok(())
    }

    fn daylight(&self, t_of_day_s: f64) -> f64 {
        match self.diurnal {
            Diurnal::HalfSine { sunrise_s, sunset_s } => {
                if t_of_day_s <= sunrise_s || t_of_day_s >= sunset_s {
                    0.0
                } else {
                    (std::f64::consts::PI * (t_of_day_s - sunrise_s) / (sunset_s - sunrise_s))
                        .sin()
                        .clamp(0.0, 1.0)
                }
            }
            Diurnal::Constant(level) => level,
        }
    }
}

/// Light fraction reaching the plants for a given opening and time of day.
pub fn light_fraction(opening_pct: i64, t_of_day_s: f64, model: &LightModel) -> f64 {
    debug_assert!((0..=100).contains(&opening_pct));
    let transmissivity = model.transmissivity_closed
        + (model.transmissivity_open - model.transmissivity_closed) * opening_pct as f64 / 100.0;
    model.daylight(t_of_day_s.rem_euclid(SECONDS_PER_DAY)) * transmissivity
}

/// Period of the reference curtain sway used by the time-lapse analysis, s.
pub const CURTAIN_SWAY_PERIOD_S: f64 = 1_800.0;

/// Reference curtain motion: a unit sinusoid with a 30-minute period.
pub fn curtain_sway(t_s: f64) -> f64 {
    (std::f64::consts::TAU * t_s / CURTAIN_SWAY_PERIOD_S).sin()
}
