//! Capture scheduling, interval presets, playback retiming, and the
//! multi-speed perceptibility analysis.
//!
//! A time-lapse compresses real time by `capture_interval * base_fps * speed`.
//! A periodic motion becomes visible when its apparent period on screen lands
//! inside the human perceptibility window: faster reads as flicker, slower as
//! stillness. With the default 30 s interval and 30 fps, the 30-minute
//! curtain sway resolves at 1x, the four-hour leaf flap needs 3x, and the
//! ten-hour stem nod needs 5x.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// One captured observation of the sill: humidity, curtain, light, and the
/// displacement of every tracked motion.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameEvent {
    pub t_s: f64,
    pub rh_true: f64,
    pub rh_read: f64,
    pub opening_pct: i64,
    pub light_frac: f64,
    /// Motion label -> normalized displacement; ordered so exports are
    /// deterministic.
    pub motions: BTreeMap<String, f64>,
}

/// Playback parameters of a rendered time-lapse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaybackSpec {
    pub capture_interval_s: f64,
    pub base_fps: f64,
    pub speed_multiplier: u32,
}

impl Default for PlaybackSpec {
    fn default() -> Self {
        PlaybackSpec {
            capture_interval_s: 30.0,
            base_fps: 30.0,
            speed_multiplier: 1,
        }
    }
}

impl PlaybackSpec {
    pub fn at_speed(speed_multiplier: u32) -> Self {
        PlaybackSpec {
            speed_multiplier,
            ..PlaybackSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.capture_interval_s.is_finite() || self.capture_interval_s <= 0.0 {
            return Err(Error::config("playback.capture_interval_s", "must be > 0"));
        }
        if !self.base_fps.is_finite() || self.base_fps <= 0.0 {
            return Err(Error::config("playback.base_fps", "must be > 0"));
        }
        if self.speed_multiplier == 0 {
            return Err(Error::config("playback.speed_multiplier", "must be >= 1"));
        }
        Ok(())
    }

    /// Real seconds per playback second.
    pub fn compression_factor(&self) -> f64 {
        self.capture_interval_s * self.base_fps * f64::from(self.speed_multiplier)
    }
}

/// Apparent-period window a human registers as motion, in playback seconds.
/// Below the floor a cycle reads as flicker, above the ceiling as stillness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerceptibilityBand {
    pub min_apparent_period_s: f64,
    pub max_apparent_period_s: f64,
}

impl Default for PerceptibilityBand {
    fn default() -> Self {
        PerceptibilityBand {
            min_apparent_period_s: 0.5,
            max_apparent_period_s: 10.0,
        }
    }
}

impl PerceptibilityBand {
    pub fn contains(&self, apparent_period_s: f64) -> bool {
        apparent_period_s >= self.min_apparent_period_s
            && apparent_period_s <= self.max_apparent_period_s
    }
}

/// Capture instants `0, interval, 2*interval, ...` up to and including
/// `duration_s`. Times are kept on the millisecond grid.
pub fn capture_schedule(duration_s: f64, interval_s: f64) -> Result<Vec<f64>> {
    if !interval_s.is_finite() || interval_s <= 0.0 {
        return Err(Error::Input(format!(
            "capture interval {interval_s} must be > 0"
        )));
    }
    if duration_s < 0.0 {
        return Err(Error::Input(format!(
            "duration {duration_s} must be >= 0"
        )));
    }
    let duration_ms = (duration_s * 1_000.0).round() as u64;
    let interval_ms = (interval_s * 1_000.0).round() as u64;
    if interval_ms == 0 {
        return Err(Error::Input(
            "capture interval is below the millisecond grid".to_owned(),
        ));
    }
    let count = duration_ms / interval_ms + 1;
    Ok((0..count).map(|k| (k * interval_ms) as f64 / 1_000.0).collect())
}

/// The eleven capture intervals offered, from half a second to one hour.
pub fn interval_presets() -> Vec<f64> {
    vec![
        0.5, 1.0, 2.0, 5.0, 10.0, 30.0, 60.0, 120.0, 300.0, 1_800.0, 3_600.0,
    ]
}

/// Cycle time of a periodic motion as seen during playback.
pub fn apparent_period(real_period_s: f64, spec: &PlaybackSpec) -> f64 {
    debug_assert!(real_period_s > 0.0);
    real_period_s / spec.compression_factor()
}

/// Smallest playback speed at which the motion's apparent period falls inside
/// the perceptibility band; `None` when no offered speed resolves it.
pub fn first_perceptible_speed(
    real_period_s: f64,
    band: &PerceptibilityBand,
    speeds: &[u32],
) -> Option<u32> {
    debug_assert!(
        speeds.windows(2).all(|w| w[0] < w[1]),
        "speeds must be strictly increasing"
    );
    speeds
        .iter()
        .copied()
        .find(|&speed| band.contains(apparent_period(real_period_s, &PlaybackSpec::at_speed(speed))))
}

/// Retime frames onto the playback clock: frame `k` shows at
/// `k / (base_fps * speed)`. All frames are retained.
pub fn resample(frames: &[FrameEvent], spec: &PlaybackSpec) -> Result<Vec<(f64, FrameEvent)>> {
    if frames.windows(2).any(|w| w[1].t_s <= w[0].t_s) {
        return Err(Error::Input("frames must be strictly time-sorted".to_owned()));
    }
    let playback_rate = spec.base_fps * f64::from(spec.speed_multiplier);
    Ok(frames
        .iter()
        .enumerate()
        .map(|(k, f)| (k as f64 / playback_rate, f.clone()))
        .collect())
}

/// Estimate the period of a sampled periodic motion from its zero crossings
/// (linear interpolation between samples; half the mean crossing spacing is
/// half a period). Needs at least two crossings; returns `None` otherwise.
pub fn estimate_period(samples: &[(f64, f64)]) -> Option<f64> {
    if samples.iter().all(|&(_, y)| y == 0.0) {
        return None;
    }
    let mut crossings = Vec::new();
    for w in samples.windows(2) {
        let (t0, y0) = w[0];
        let (t1, y1) = w[1];
        if y0 == 0.0 {
            crossings.push(t0);
        } else if y0.signum() != y1.signum() && y1 != 0.0 {
            crossings.push(t0 + (t1 - t0) * y0 / (y0 - y1));
        }
    }
    if let Some(&(t_last, y_last)) = samples.last() {
        if y_last == 0.0 {
            crossings.push(t_last);
        }
    }
    if crossings.len() < 2 {
        return None;
    }
    let span = crossings.last().unwrap() - crossings.first().unwrap();
    let mean_gap = span / (crossings.len() - 1) as f64;
    if mean_gap > 0.0 {
        Some(2.0 * mean_gap)
    } else {
        None
    }
}

/// Perceptibility verdict for one motion column.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionPerceptibility {
    pub label: String,
    /// Estimated real period; `None` when the samples never cross zero twice.
    pub period_s: Option<f64>,
    /// First offered speed that resolves the motion.
    pub first_speed: Option<u32>,
    /// Apparent period at that speed.
    pub apparent_s: Option<f64>,
}

/// Analyze every motion column of a frame log.
pub fn perceptibility_report(
    frames: &[FrameEvent],
    band: &PerceptibilityBand,
    speeds: &[u32],
) -> Vec<MotionPerceptibility> {
    let mut labels: Vec<String> = Vec::new();
    for f in frames {
        for label in f.motions.keys() {
            if !labels.iter().any(|l| l == label) {
                labels.push(label.clone());
            }
        }
    }
    labels.sort();
    labels
        .into_iter()
        .map(|label| {
            let series: Vec<(f64, f64)> = frames
                .iter()
                .filter_map(|f| f.motions.get(&label).map(|&d| (f.t_s, d)))
                .collect();
            let period_s = estimate_period(&series);
            let first_speed = period_s.and_then(|p| first_perceptible_speed(p, band, speeds));
            let apparent_s = match (period_s, first_speed) {
                (Some(p), Some(s)) => Some(apparent_period(p, &PlaybackSpec::at_speed(s))),
                _ => None,
            };
            MotionPerceptibility {
                label,
                period_s,
                first_speed,
                apparent_s,
            }
        })
        .collect()
}

/// Render the report as the plain-text table the CLI prints.
pub fn format_perceptibility_report(report: &[MotionPerceptibility]) -> String {
    let mut out = String::new();
    let width = report
        .iter()
        .map(|m| m.label.len())
        .chain(["motion".len()])
        .max()
        .unwrap_or(6);
    let _ = writeln!(
        out,
        "{:width$}  {:>10}  {:>11}  {:>10}",
        "motion", "period_s", "first_speed", "apparent_s"
    );
    for m in report {
        match (m.period_s, m.first_speed, m.apparent_s) {
            (Some(p), Some(s), Some(a)) => {
                let _ = writeln!(
                    out,
                    "{:width$}  {:>10.1}  {:>10}x  {:>10.2}",
                    m.label, p, s, a
                );
            }
            (Some(p), None, _) => {
                let _ = writeln!(
                    out,
                    "{:width$}  {:>10.1}  {:>11}  {:>10}",
                    m.label, p, "-", "imperceptible"
                );
            }
            _ => {
                let _ = writeln!(
                    out,
                    "{:width$}  {:>10}  {:>11}  {:>10}",
                    m.label, "-", "-", "imperceptible"
                );
            }
        }
    }
    out
}

/// Frame log CSV: `t_s,rh_true,opening_pct,light_frac,<motion...>` with one
/// column per motion label, floats to four decimals, LF line endings.
pub fn frames_to_csv(frames: &[FrameEvent]) -> String {
    let mut labels: Vec<String> = Vec::new();
    for f in frames {
        for label in f.motions.keys() {
            if !labels.iter().any(|l| l == label) {
                labels.push(label.clone());
            }
        }
    }
    labels.sort();
    let mut out = String::from("t_s,rh_true,opening_pct,light_frac");
    for label in &labels {
        out.push(',');
        out.push_str(label);
    }
    out.push('\n');
    for f in frames {
        let _ = write!(
            out,
            "{:.4},{:.4},{},{:.4}",
            f.t_s, f.rh_true, f.opening_pct, f.light_frac
        );
        for label in &labels {
            match f.motions.get(label) {
                Some(d) => {
                    let _ = write!(out, ",{d:.4}");
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

/// Parse a frame log produced by [`frames_to_csv`]. Any column beyond the
/// four fixed ones is treated as a motion label.
pub fn frames_from_csv(text: &str) -> Result<Vec<FrameEvent>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Input("frame CSV is empty".to_owned()))?;
    let cols: Vec<&str> = header.split(',').collect();
    const FIXED: [&str; 4] = ["t_s", "rh_true", "opening_pct", "light_frac"];
    if cols.len() < FIXED.len() || cols[..FIXED.len()] != FIXED {
        return Err(Error::Parse {
            line: 1,
            message: format!("unexpected frame CSV header: {header}"),
        });
    }
    let motion_labels: Vec<String> = cols[FIXED.len()..].iter().map(|s| s.to_string()).collect();

    let mut frames = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::Parse {
                line: lineno,
                message: format!(
                    "expected {} fields, found {}",
                    cols.len(),
                    fields.len()
                ),
            });
        }
        let num = |i: usize, name: &str| -> Result<f64> {
            fields[i].parse::<f64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("field {name}: not a number: {:?}", fields[i]),
            })
        };
        let mut motions = BTreeMap::new();
        for (j, label) in motion_labels.iter().enumerate() {
            let raw = fields[FIXED.len() + j];
            if !raw.is_empty() {
                motions.insert(label.clone(), num(FIXED.len() + j, label)?);
            }
        }
        let rh_true = num(1, "rh_true")?;
        frames.push(FrameEvent {
            t_s: num(0, "t_s")?,
            rh_true,
            // The frame log does not carry readings; fall back to truth.
            rh_read: rh_true,
            opening_pct: num(2, "opening_pct")?.round() as i64,
            light_frac: num(3, "light_frac")?,
            motions,
        });
    }
    Ok(frames)
}
