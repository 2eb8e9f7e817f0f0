//! Cross-species comfort metrics over a humidity series.
//!
//! Humans are comfortable between 30 and 50 %RH; the Monstera wants more
//! than 50. The two bands are disjoint by construction, so a humidity trace
//! partitions cleanly into human time, plant time, and contested time.

use crate::error::{Error, Result};

/// Human comfort band, %RH.
pub const HUMAN_COMFORT_BAND: (f64, f64) = (30.0, 50.0);
/// Everything above this is plant comfort, %RH.
pub const PLANT_COMFORT_LO: f64 = 50.0;

fn check_series(series: &[(f64, f64)]) -> Result<()> {
    if series.is_empty() {
        return Err(Error::Input("humidity series is empty".to_owned()));
    }
    if series.windows(2).any(|w| w[1].0 < w[0].0) {
        return Err(Error::Input("humidity series is not time-sorted".to_owned()));
    }
    Ok(())
}

/// Time-weighted fraction of the series spent inside `[lo, hi]`, holding each
/// sample until the next (piecewise-constant). A single-sample or zero-span
/// series counts its sole value fully.
pub fn band_occupancy(series: &[(f64, f64)], band: (f64, f64)) -> Result<f64> {
    check_series(series)?;
    let (lo, hi) = band;
    let inside = |rh: f64| rh >= lo && rh <= hi;
    let span = series.last().unwrap().0 - series[0].0;
    if span <= 0.0 {
        return Ok(if inside(series[0].1) { 1.0 } else { 0.0 });
    }
    let mut weighted = 0.0;
    for w in series.windows(2) {
        if inside(w[0].1) {
            weighted += w[1].0 - w[0].0;
        }
    }
    Ok(weighted / span)
}

/// How the series splits between the two species' comfort claims.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegotiationReport {
    /// Fraction of time inside the human band.
    pub occupancy_human: f64,
    /// Fraction of time above the plant comfort floor.
    pub occupancy_plant: f64,
    /// Fraction of time in neither band.
    pub contested_time: f64,
}

/// Partition the trace between human comfort, plant comfort, and neither.
/// The three fractions are computed from the same segments, so they sum to 1
/// exactly up to rounding.
pub fn negotiation_report(
    series: &[(f64, f64)],
    human_band: (f64, f64),
    plant_comfort_lo: f64,
) -> Result<NegotiationReport> {
    check_series(series)?;
    let classify = |rh: f64| -> usize {
        if rh >= human_band.0 && rh <= human_band.1 {
            0
        } else if rh > plant_comfort_lo {
            1
        } else {
            2
        }
    };
    let span = series.last().unwrap().0 - series[0].0;
    let mut buckets = [0.0f64; 3];
    if span <= 0.0 {
        buckets[classify(series[0].1)] = 1.0;
    } else {
        for w in series.windows(2) {
            buckets[classify(w[0].1)] += w[1].0 - w[0].0;
        }
        for b in &mut buckets {
            *b /= span;
        }
    }
    Ok(NegotiationReport {
        occupancy_human: buckets[0],
        occupancy_plant: buckets[1],
        contested_time: buckets[2],
    })
}
