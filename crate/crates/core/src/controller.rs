//! Deadband curtain controller.
//!
//! Every tick the controller compares the latest humidity reading with the
//! previous one. A rise of 0.1-0.3 %RH closes the curtain one 4% step, a fall
//! of the same magnitude opens it one step, and anything outside that band,
//! too small or too large, is treated as environmental error and ignored.
//! Targets are confined to a stored instruction table spanning the clamp
//! range.
//!
//! Readings are quantized to 0.01 %RH by the sensor, so deltas are compared
//! in integer hundredths; the band edges are inclusive and exact (a printed
//! 0.10 rise triggers even though `40.10 - 40.00` lands below 0.1 in floats).

use crate::error::{Error, Result};

/// Deadband protocol parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    /// Seconds between humidity checks.
    pub tick_s: f64,
    /// Smallest reading delta that triggers movement, %RH (inclusive).
    pub deadband_lo: f64,
    /// Largest reading delta that triggers movement, %RH (inclusive).
    pub deadband_hi: f64,
    /// Curtain step per trigger, percentage points.
    pub step_pct: i64,
    /// Lowest commandable opening, %.
    pub clamp_lo: i64,
    /// Highest commandable opening, %.
    pub clamp_hi: i64,
    /// Opening the controller assumes at start, %.
    pub initial_opening: i64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            tick_s: 25.0,
            deadband_lo: 0.1,
            deadband_hi: 0.3,
            step_pct: 4,
            clamp_lo: 50,
            clamp_hi: 90,
            initial_opening: 70,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.tick_s.is_finite() || self.tick_s <= 0.0 {
            return Err(Error::config("controller.tick_s", "must be > 0"));
        }
        if !self.deadband_lo.is_finite() || self.deadband_lo <= 0.0 {
            return Err(Error::config("controller.deadband_lo", "must be > 0"));
        }
        if self.deadband_hi <= self.deadband_lo {
            return Err(Error::config(
                "controller.deadband_hi",
                "must satisfy 0 < deadband_lo < deadband_hi",
            ));
        }
        if self.step_pct <= 0 {
            return Err(Error::config("controller.step_pct", "must be > 0"));
        }
        if self.clamp_lo > self.clamp_hi {
            return Err(Error::config(
                "controller.clamp_lo",
                "must satisfy clamp_lo <= clamp_hi",
            ));
        }
        if self.clamp_lo < 0 || self.clamp_hi > 100 {
            return Err(Error::config(
                "controller.clamp_lo",
                "clamp range must lie within [0, 100]",
            ));
        }
        let table = instruction_table(self)?;
        if !table.contains(&self.initial_opening) {
            return Err(Error::config(
                "controller.initial_opening",
                "must be one of the stored instruction positions",
            ));
        }
        Ok(())
    }
}

/// A controller decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Hold,
    SetOpening(i64),
}

/// Carry-over between ticks: the last reading and the believed opening.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerState {
    pub prev_reading: Option<f64>,
    pub current_target: i64,
}

impl ControllerState {
    pub fn new(cfg: &ControllerConfig) -> Self {
        ControllerState {
            prev_reading: None,
            current_target: cfg.initial_opening,
        }
    }
}

/// The stored opening positions: `clamp_lo, clamp_lo + step, ..., clamp_hi`.
///
/// The default 50-90% range in 4% steps yields eleven positions, which is
/// ten step transitions between the endpoints.
pub fn instruction_table(cfg: &ControllerConfig) -> Result<Vec<i64>> {
    if cfg.step_pct <= 0 {
        return Err(Error::config("controller.step_pct", "must be > 0"));
    }
    let span = cfg.clamp_hi - cfg.clamp_lo;
    if span < 0 {
        return Err(Error::config(
            "controller.clamp_lo",
            "must satisfy clamp_lo <= clamp_hi",
        ));
    }
    if span % cfg.step_pct != 0 {
        return Err(Error::config(
            "controller.step_pct",
            "clamp range must be divisible by step_pct",
        ));
    }
    Ok((0..=span / cfg.step_pct)
        .map(|i| cfg.clamp_lo + i * cfg.step_pct)
        .collect())
}

/// Reading delta in integer hundredths of %RH.
fn delta_centi(prev: f64, reading: f64) -> i64 {
    to_centi(reading) - to_centi(prev)
}

fn to_centi(rh: f64) -> i64 {
    (rh * 100.0).round() as i64
}

/// One controller tick: compare `reading` against the previous one and
/// decide. The first tick only stores the reading and holds.
pub fn decide(
    state: &ControllerState,
    reading: f64,
    cfg: &ControllerConfig,
) -> (Command, ControllerState) {
    let Some(prev) = state.prev_reading else {
        return (
            Command::Hold,
            ControllerState {
                prev_reading: Some(reading),
                current_target: state.current_target,
            },
        );
    };

    let delta = delta_centi(prev, reading);
    let band_lo = to_centi(cfg.deadband_lo);
    let band_hi = to_centi(cfg.deadband_hi);

    let target = if delta >= band_lo && delta <= band_hi {
        // Humidity rose: transpiration dominates, close a step.
        (state.current_target - cfg.step_pct).max(cfg.clamp_lo)
    } else if delta <= -band_lo && delta >= -band_hi {
        // Humidity fell: open a step.
        (state.current_target + cfg.step_pct).min(cfg.clamp_hi)
    } else {
        state.current_target
    };

    let command = if target == state.current_target {
        Command::Hold
    } else {
        Command::SetOpening(target)
    };
    (
        command,
        ControllerState {
            prev_reading: Some(reading),
            current_target: target,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn primed(prev: f64, target: i64) -> ControllerState {
        ControllerState {
            prev_reading: Some(prev),
            current_target: target,
        }
    }

    #[test]
    fn default_table_has_eleven_positions() {
        let t = instruction_table(&ControllerConfig::default()).unwrap();
        assert_eq!(t, vec![50, 54, 58, 62, 66, 70, 74, 78, 82, 86, 90]);
        assert_eq!(t.len(), 11);
        assert_eq!(*t.first().unwrap(), 50);
        assert_eq!(*t.last().unwrap(), 90);
    }

    #[test]
    fn degenerate_range_is_a_single_position() {
        let cfg = ControllerConfig {
            clamp_lo: 60,
            clamp_hi: 60,
            initial_opening: 60,
            ..ControllerConfig::default()
        };
        assert_eq!(instruction_table(&cfg).unwrap(), vec![60]);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn coarser_step_table() {
        let cfg = ControllerConfig {
            step_pct: 8,
            ..ControllerConfig::default()
        };
        assert_eq!(instruction_table(&cfg).unwrap(), vec![50, 58, 66, 74, 82, 90]);
    }

    #[test]
    fn non_divisible_range_is_a_config_error() {
        let cfg = ControllerConfig {
            step_pct: 7,
            ..ControllerConfig::default()
        };
        assert!(matches!(
            instruction_table(&cfg),
            Err(Error::Config { field, .. }) if field == "controller.step_pct"
        ));
    }

    #[test]
    fn rise_in_band_closes_one_step() {
        let cfg = ControllerConfig::default();
        let (cmd, next) = decide(&primed(40.00, 70), 40.20, &cfg);
        assert_eq!(cmd, Command::SetOpening(66));
        assert_eq!(next.current_target, 66);
        assert_eq!(next.prev_reading, Some(40.20));
    }

    #[test]
    fn zero_delta_holds() {
        let cfg = ControllerConfig::default();
        let (cmd, next) = decide(&primed(40.00, 70), 40.00, &cfg);
        assert_eq!(cmd, Command::Hold);
        assert_eq!(next.current_target, 70);
    }

    #[test]
    fn large_delta_is_filtered_as_error() {
        let cfg = ControllerConfig::default();
        let (cmd, _) = decide(&primed(40.00, 70), 40.50, &cfg);
        assert_eq!(cmd, Command::Hold);
    }

    #[test]
    fn open_request_at_ceiling_holds() {
        let cfg = ControllerConfig::default();
        let (cmd, next) = decide(&primed(40.20, 90), 40.00, &cfg);
        assert_eq!(cmd, Command::Hold);
        assert_eq!(next.current_target, 90);
        // prev_reading still updates on a clamped hold.
        assert_eq!(next.prev_reading, Some(40.00));
    }

    #[test]
    fn inclusive_lower_edge_steps_to_floor() {
        // 40.10 - 40.00 is slightly below 0.1 in raw f64; the centi-units
        // comparison must still trigger.
        let cfg = ControllerConfig::default();
        let (cmd, _) = decide(&primed(40.00, 54), 40.10, &cfg);
        assert_eq!(cmd, Command::SetOpening(50));
    }

    #[test]
    fn inclusive_upper_edge_triggers() {
        let cfg = ControllerConfig::default();
        let (cmd, _) = decide(&primed(40.00, 70), 40.30, &cfg);
        assert_eq!(cmd, Command::SetOpening(66));
        let (cmd, _) = decide(&primed(40.31, 70), 40.00, &cfg);
        assert_eq!(cmd, Command::Hold, "0.31 fall is out of band");
    }

    #[test]
    fn first_tick_primes_and_holds() {
        let cfg = ControllerConfig::default();
        let state = ControllerState::new(&cfg);
        assert_eq!(state.current_target, 70);
        let (cmd, next) = decide(&state, 43.21, &cfg);
        assert_eq!(cmd, Command::Hold);
        assert_eq!(next.prev_reading, Some(43.21));
    }

    /// Independent piecewise oracle over integer centi-deltas.
    fn oracle(delta_centi: i64, current: i64, cfg: &ControllerConfig) -> Command {
        let target = if (10..=30).contains(&delta_centi) {
            if current - cfg.step_pct >= cfg.clamp_lo {
                current - cfg.step_pct
            } else {
                cfg.clamp_lo
            }
        } else if (-30..=-10).contains(&delta_centi) {
            if current + cfg.step_pct <= cfg.clamp_hi {
                current + cfg.step_pct
            } else {
                cfg.clamp_hi
            }
        } else {
            current
        };
        if target == current {
            Command::Hold
        } else {
            Command::SetOpening(target)
        }
    }

    #[test]
    fn matches_oracle_on_full_grid() {
        // Delta grid -0.50..=0.50 in 0.01 steps, crossed with all 11 table
        // positions: 1,111 cases, exact agreement.
        let cfg = ControllerConfig::default();
        let table = instruction_table(&cfg).unwrap();
        let mut cases = 0;
        for current in &table {
            for dc in -50i64..=50 {
                let prev = 40.00;
                let reading = (4000 + dc) as f64 / 100.0;
                let (cmd, _) = decide(&primed(prev, *current), reading, &cfg);
                assert_eq!(
                    cmd,
                    oracle(dc, *current, &cfg),
                    "delta {dc} centi at target {current}"
                );
                cases += 1;
            }
        }
        assert_eq!(cases, 1_111);
    }

    #[test]
    fn closure_over_table_and_delta_grid() {
        let cfg = ControllerConfig::default();
        let table = instruction_table(&cfg).unwrap();
        for current in &table {
            for dc in -50i64..=50 {
                let reading = (4000 + dc) as f64 / 100.0;
                let (_, next) = decide(&primed(40.00, *current), reading, &cfg);
                assert!(
                    table.contains(&next.current_target),
                    "target {} left the table",
                    next.current_target
                );
            }
        }
    }

    #[test]
    fn direction_is_antisymmetric_away_from_clamps() {
        let cfg = ControllerConfig::default();
        for dc in 10i64..=30 {
            let up = (4000 + dc) as f64 / 100.0;
            let down = (4000 - dc) as f64 / 100.0;
            let (cmd_rise, _) = decide(&primed(40.00, 70), up, &cfg);
            let (cmd_fall, _) = decide(&primed(40.00, 70), down, &cfg);
            assert_eq!(cmd_rise, Command::SetOpening(66));
            assert_eq!(cmd_fall, Command::SetOpening(74));
        }
    }

    #[test]
    fn hold_never_changes_target() {
        let cfg = ControllerConfig::default();
        for dc in [-50i64, -31, -9, 0, 9, 31, 50] {
            let reading = (4000 + dc) as f64 / 100.0;
            let (cmd, next) = decide(&primed(40.00, 62), reading, &cfg);
            assert_eq!(cmd, Command::Hold, "delta {dc}");
            assert_eq!(next.current_target, 62);
        }
    }

    #[test]
    fn config_validation() {
        assert!(ControllerConfig::default().validate().is_ok());
        let bad = ControllerConfig {
            deadband_hi: 0.05,
            ..ControllerConfig::default()
        };
        assert!(matches!(
            bad.validate(),
            Err(Error::Config { field, .. }) if field == "controller.deadband_hi"
        ));
        let bad = ControllerConfig {
            initial_opening: 72,
            ..ControllerConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = ControllerConfig {
            clamp_hi: 104,
            ..ControllerConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
