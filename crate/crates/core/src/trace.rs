//! The record of one simulated run: frames, commands, and sensor readings.

use std::fmt::Write as _;

use crate::timelapse::FrameEvent;

/// One sensor tick: what was true and what was read, with the device state at
/// the moment of the read.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorRecord {
    pub t_s: f64,
    pub rh_true: f64,
    pub rh_read: f64,
    pub opening_pct: i64,
    pub light_frac: f64,
}

/// One actuating command. Hold decisions are not logged, so the command log
/// measures real actuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommandRecord {
    /// When the controller issued the command.
    pub t_s: f64,
    /// The commanded opening.
    pub target_pct: i64,
    /// Device opening at issue time.
    pub pre_opening_pct: i64,
    /// Where the device will settle: the commanded opening.
    pub post_opening_pct: i64,
    /// Lost on the command channel; the device never saw it.
    pub dropped: bool,
}

/// Full trace of a scenario run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimTrace {
    pub frames: Vec<FrameEvent>,
    pub commands: Vec<CommandRecord>,
    pub sensor_log: Vec<SensorRecord>,
}

impl SimTrace {
    /// The humidity series of the run, as (time, true rh) pairs at sensor
    /// cadence.
    pub fn rh_series(&self) -> Vec<(f64, f64)> {
        self.sensor_log.iter().map(|s| (s.t_s, s.rh_true)).collect()
    }

    /// Trace CSV: `t_s,rh_true,rh_read,opening_pct,light_frac,cmd`, one row
    /// per sensor tick plus one per camera frame, time-ordered with the
    /// sensor row first at shared instants. Floats carry four decimals; the
    /// cmd column holds `SET <n>` (or `DROP <n>` for a lost command) on the
    /// tick that issued it and is empty elsewhere.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_s,rh_true,rh_read,opening_pct,light_frac,cmd\n");
        let mut frames = self.frames.iter().peekable();
        let mut commands = self.commands.iter().peekable();

        let write_row =
            |out: &mut String, t_s: f64, rh_true: f64, rh_read: f64, opening: i64, light: f64, cmd: &str| {
                let _ = writeln!(
                    out,
                    "{t_s:.4},{rh_true:.4},{rh_read:.4},{opening},{light:.4},{cmd}"
                );
            };

        for s in &self.sensor_log {
            // Camera frames strictly earlier than this sensor tick go first.
            while frames.peek().is_some_and(|f| f.t_s < s.t_s) {
                let f = frames.next().unwrap();
                write_row(&mut out, f.t_s, f.rh_true, f.rh_read, f.opening_pct, f.light_frac, "");
            }
            let cmd = match commands.peek() {
                Some(c) if c.t_s == s.t_s => {
                    let c = commands.next().unwrap();
                    if c.dropped {
                        format!("DROP {}", c.target_pct)
                    } else {
                        format!("SET {}", c.target_pct)
                    }
                }
                _ => String::new(),
            };
            write_row(&mut out, s.t_s, s.rh_true, s.rh_read, s.opening_pct, s.light_frac, &cmd);
        }
        for f in frames {
            write_row(&mut out, f.t_s, f.rh_true, f.rh_read, f.opening_pct, f.light_frac, "");
        }
        out
    }
}
