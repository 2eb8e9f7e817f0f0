//! Scenario configuration: the single description of a run, loadable from a
//! small INI dialect and serializable back.
//!
//! The format is `[section]` headers and `key = value` lines, `#` line
//! comments, UTF-8, LF. Every key is optional; omitted keys take the stock
//! installation defaults. Unknown sections or keys, duplicate sections, and
//! out-of-range values are rejected with the offending line.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::actuator::{CommandChannel, Diurnal, LightModel};
use crate::controller::ControllerConfig;
use crate::error::{Error, Result};
use crate::flora::{preset_by_name, species_presets, Movement, PlantSpecies};
use crate::microclimate::SensorModel;

/// A span of human presence and the humidity flux it contributes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PresenceInterval {
    pub start_s: f64,
    pub end_s: f64,
    /// %RH/s while present.
    pub flux: f64,
}

/// Everything a run needs. See the module docs for the file format.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub duration_s: f64,
    /// Time of day at t = 0, seconds since midnight.
    pub start_time_s: f64,
    pub initial_rh: f64,
    pub exterior_rh: f64,
    pub air_exchange_per_s: f64,
    pub species: Vec<PlantSpecies>,
    pub sensor: SensorModel,
    pub controller: ControllerConfig,
    pub ramp_rate_pct_per_s: f64,
    pub channel: CommandChannel,
    pub light: LightModel,
    pub capture_interval_s: f64,
    /// Standard deviation of the per-second wind flux, %RH/s.
    pub wind_amplitude: f64,
    pub presence: Vec<PresenceInterval>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 42,
            duration_s: 28_800.0,
            start_time_s: 21_600.0,
            initial_rh: 40.0,
            exterior_rh: 40.0,
            air_exchange_per_s: 0.003,
            species: species_presets(),
            sensor: SensorModel::default(),
            controller: ControllerConfig::default(),
            ramp_rate_pct_per_s: 2.0,
            channel: CommandChannel::default(),
            light: LightModel::default(),
            capture_interval_s: 30.0,
            wind_amplitude: 0.002,
            // The resident is around before leaving for the day and again
            // from early afternoon; the hours between are plant time.
            presence: vec![
                PresenceInterval {
                    start_s: 0.0,
                    end_s: 3_600.0,
                    flux: 0.006,
                },
                PresenceInterval {
                    start_s: 25_200.0,
                    end_s: 28_800.0,
                    flux: 0.006,
                },
            ],
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.duration_s < 0.0 || !self.duration_s.is_finite() {
            return Err(Error::config("scenario.duration_s", "must be >= 0"));
        }
        if !(0.0..86_400.0).contains(&self.start_time_s) {
            return Err(Error::config("scenario.start_time_s", "must be in [0, 86400)"));
        }
        for (name, rh) in [
            ("microclimate.initial_rh", self.initial_rh),
            ("microclimate.exterior_rh", self.exterior_rh),
        ] {
            if !(0.0..=100.0).contains(&rh) {
                return Err(Error::config(name, "must be in [0, 100]"));
            }
        }
        if self.air_exchange_per_s < 0.0 || !self.air_exchange_per_s.is_finite() {
            return Err(Error::config("microclimate.air_exchange_per_s", "must be >= 0"));
        }
        if self.species.is_empty() {
            return Err(Error::config("plants.species", "at least one species"));
        }
        for s in &self.species {
            s.validate()?;
        }
        self.sensor.validate()?;
        self.controller.validate()?;
        if !self.ramp_rate_pct_per_s.is_finite() || self.ramp_rate_pct_per_s <= 0.0 {
            return Err(Error::config("actuator.ramp_rate", "must be > 0"));
        }
        self.channel.validate()?;
        self.light.validate()?;
        if !self.capture_interval_s.is_finite() || self.capture_interval_s <= 0.0 {
            return Err(Error::config("camera.interval_s", "must be > 0"));
        }
        if self.wind_amplitude < 0.0 || !self.wind_amplitude.is_finite() {
            return Err(Error::config("disturbance.wind_amplitude", "must be >= 0"));
        }
        for p in &self.presence {
            if !(p.start_s >= 0.0 && p.end_s > p.start_s) {
                return Err(Error::config(
                    "disturbance.presence",
                    "intervals need 0 <= start < end",
                ));
            }
            if p.flux < 0.0 || !p.flux.is_finite() {
                return Err(Error::config("disturbance.presence", "flux must be >= 0"));
            }
        }
        Ok(())
    }

    /// Human flux at simulation time `t_s`: the sum of all active intervals.
    pub fn human_flux_at(&self, t_s: f64) -> f64 {
        self.presence
            .iter()
            .filter(|p| t_s >= p.start_s && t_s < p.end_s)
            .map(|p| p.flux)
            .sum()
    }

    /// Serialize to the INI dialect; `parse_scenario` round-trips it.
    pub fn to_ini_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[scenario]");
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "duration_s = {}", self.duration_s);
        let _ = writeln!(out, "start_time_s = {}", self.start_time_s);
        let _ = writeln!(out, "\n[microclimate]");
        let _ = writeln!(out, "initial_rh = {}", self.initial_rh);
        let _ = writeln!(out, "exterior_rh = {}", self.exterior_rh);
        let _ = writeln!(out, "air_exchange_per_s = {}", self.air_exchange_per_s);
        let _ = writeln!(out, "\n[plants]");
        let names: Vec<&str> = self.species.iter().map(|s| s.name.as_str()).collect();
        let _ = writeln!(out, "species = {}", names.join(", "));
        for s in &self.species {
            let _ = writeln!(out, "\n[plant:{}]", s.name);
            let _ = writeln!(out, "transp_coeff_k = {}", s.transp_coeff_k);
            let _ = writeln!(out, "comfort_rh_lo = {}", s.comfort_rh_lo);
            if !s.movements.is_empty() {
                let moves: Vec<String> = s
                    .movements
                    .iter()
                    .map(|m| format!("{}:{}:{}", m.label, m.period_s, m.amplitude))
                    .collect();
                let _ = writeln!(out, "movements = {}", moves.join("; "));
            }
        }
        let _ = writeln!(out, "\n[sensor]");
        let _ = writeln!(out, "noise_sd = {}", self.sensor.noise_sd);
        let _ = writeln!(out, "resolution = {}", self.sensor.resolution);
        let _ = writeln!(out, "weight_plant = {}", self.sensor.placement_weight_plant);
        let _ = writeln!(out, "weight_human = {}", self.sensor.placement_weight_human);
        let _ = writeln!(out, "weight_wind = {}", self.sensor.placement_weight_wind);
        let _ = writeln!(out, "\n[controller]");
        let _ = writeln!(out, "tick_s = {}", self.controller.tick_s);
        let _ = writeln!(out, "deadband_lo = {}", self.controller.deadband_lo);
        let _ = writeln!(out, "deadband_hi = {}", self.controller.deadband_hi);
        let _ = writeln!(out, "step_pct = {}", self.controller.step_pct);
        let _ = writeln!(out, "clamp_lo = {}", self.controller.clamp_lo);
        let _ = writeln!(out, "clamp_hi = {}", self.controller.clamp_hi);
        let _ = writeln!(out, "initial_opening = {}", self.controller.initial_opening);
        let _ = writeln!(out, "\n[actuator]");
        let _ = writeln!(out, "ramp_rate = {}", self.ramp_rate_pct_per_s);
        let _ = writeln!(out, "drop_prob = {}", self.channel.drop_prob);
        let _ = writeln!(out, "delay_s = {}", self.channel.delay_s);
        let _ = writeln!(out, "\n[light]");
        let _ = writeln!(out, "transmissivity_closed = {}", self.light.transmissivity_closed);
        let _ = writeln!(out, "transmissivity_open = {}", self.light.transmissivity_open);
        match self.light.diurnal {
            Diurnal::HalfSine { sunrise_s, sunset_s } => {
                let _ = writeln!(out, "diurnal = half-sine");
                let _ = writeln!(out, "sunrise_s = {sunrise_s}");
                let _ = writeln!(out, "sunset_s = {sunset_s}");
            }
            Diurnal::Constant(level) => {
                let _ = writeln!(out, "diurnal = constant");
                let _ = writeln!(out, "constant_level = {level}");
            }
        }
        let _ = writeln!(out, "\n[camera]");
        let _ = writeln!(out, "interval_s = {}", self.capture_interval_s);
        let _ = writeln!(out, "\n[disturbance]");
        let _ = writeln!(out, "wind_amplitude = {}", self.wind_amplitude);
        if !self.presence.is_empty() {
            let spans: Vec<String> = self
                .presence
                .iter()
                .map(|p| format!("{}-{}:{}", p.start_s, p.end_s, p.flux))
                .collect();
            let _ = writeln!(out, "presence = {}", spans.join(", "));
        }
        out
    }
}

struct Line<'a> {
    no: usize,
    section: String,
    key: &'a str,
    value: &'a str,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parse scenario text; see the module docs for the dialect.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    // Lexing pass: section headers, key = value lines, comments.
    let mut entries: Vec<Line> = Vec::new();
    let mut section = String::new();
    let mut seen_sections: HashSet<String> = HashSet::new();
    let mut section_lines: Vec<(String, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                return Err(parse_err(no, format!("unterminated section header: {line}")));
            };
            let name = name.trim().to_owned();
            if name.is_empty() {
                return Err(parse_err(no, "empty section name"));
            }
            if !seen_sections.insert(name.clone()) {
                return Err(parse_err(no, format!("duplicate section [{name}]")));
            }
            section_lines.push((name.clone(), no));
            section = name;
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(parse_err(no, format!("expected `key = value`: {line}")));
        };
        if section.is_empty() {
            return Err(parse_err(no, "key outside of any [section]"));
        }
        entries.push(Line {
            no,
            section: section.clone(),
            key: key.trim(),
            value: value.trim(),
        });
    }

    // Duplicate keys within a section.
    let mut seen_keys: HashSet<(String, String)> = HashSet::new();
    for e in &entries {
        if !seen_keys.insert((e.section.clone(), e.key.to_owned())) {
            return Err(parse_err(
                e.no,
                format!("duplicate key {}.{}", e.section, e.key),
            ));
        }
    }

    let known_sections = [
        "scenario",
        "microclimate",
        "plants",
        "sensor",
        "controller",
        "actuator",
        "light",
        "camera",
        "disturbance",
    ];
    for (name, no) in &section_lines {
        if !known_sections.contains(&name.as_str()) && !name.starts_with("plant:") {
            return Err(parse_err(*no, format!("unknown section [{name}]")));
        }
    }

    let mut cfg = ScenarioConfig::default();
    let mut species_names: Option<(Vec<String>, usize)> = None;
    let mut diurnal_kind: Option<(&str, usize)> = None;
    let mut sunrise_s: Option<f64> = None;
    let mut sunset_s: Option<f64> = None;
    let mut constant_level: Option<f64> = None;

    let f64_of = |e: &Line| -> Result<f64> {
        e.value
            .parse::<f64>()
            .map_err(|_| parse_err(e.no, format!("{}.{}: not a number: {:?}", e.section, e.key, e.value)))
    };
    let u64_of = |e: &Line| -> Result<u64> {
        e.value
            .parse::<u64>()
            .map_err(|_| parse_err(e.no, format!("{}.{}: not an unsigned integer: {:?}", e.section, e.key, e.value)))
    };
    let i64_of = |e: &Line| -> Result<i64> {
        e.value
            .parse::<i64>()
            .map_err(|_| parse_err(e.no, format!("{}.{}: not an integer: {:?}", e.section, e.key, e.value)))
    };

    for e in entries.iter().filter(|e| !e.section.starts_with("plant:")) {
        match (e.section.as_str(), e.key) {
            ("scenario", "seed") => cfg.seed = u64_of(e)?,
            ("scenario", "duration_s") => cfg.duration_s = f64_of(e)?,
            ("scenario", "start_time_s") => cfg.start_time_s = f64_of(e)?,
            ("microclimate", "initial_rh") => cfg.initial_rh = f64_of(e)?,
            ("microclimate", "exterior_rh") => cfg.exterior_rh = f64_of(e)?,
            ("microclimate", "air_exchange_per_s") => cfg.air_exchange_per_s = f64_of(e)?,
            ("plants", "species") => {
                let names = e
                    .value
                    .split(',')
                    .map(|s| s.trim().to_owned())
                    .filter(|s| !s.is_empty())
                    .collect::<Vec<_>>();
                species_names = Some((names, e.no));
            }
            ("sensor", "noise_sd") => cfg.sensor.noise_sd = f64_of(e)?,
            ("sensor", "resolution") => cfg.sensor.resolution = f64_of(e)?,
            ("sensor", "weight_plant") => cfg.sensor.placement_weight_plant = f64_of(e)?,
            ("sensor", "weight_human") => cfg.sensor.placement_weight_human = f64_of(e)?,
            ("sensor", "weight_wind") => cfg.sensor.placement_weight_wind = f64_of(e)?,
            ("controller", "tick_s") => cfg.controller.tick_s = f64_of(e)?,
            ("controller", "deadband_lo") => cfg.controller.deadband_lo = f64_of(e)?,
            ("controller", "deadband_hi") => cfg.controller.deadband_hi = f64_of(e)?,
            ("controller", "step_pct") => cfg.controller.step_pct = i64_of(e)?,
            ("controller", "clamp_lo") => cfg.controller.clamp_lo = i64_of(e)?,
            ("controller", "clamp_hi") => cfg.controller.clamp_hi = i64_of(e)?,
            ("controller", "initial_opening") => cfg.controller.initial_opening = i64_of(e)?,
            ("actuator", "ramp_rate") => cfg.ramp_rate_pct_per_s = f64_of(e)?,
            ("actuator", "drop_prob") => cfg.channel.drop_prob = f64_of(e)?,
            ("actuator", "delay_s") => cfg.channel.delay_s = f64_of(e)?,
            ("light", "transmissivity_closed") => cfg.light.transmissivity_closed = f64_of(e)?,
            ("light", "transmissivity_open") => cfg.light.transmissivity_open = f64_of(e)?,
            ("light", "diurnal") => match e.value {
                "half-sine" => diurnal_kind = Some(("half-sine", e.no)),
                "constant" => diurnal_kind = Some(("constant", e.no)),
                other => {
                    return Err(parse_err(
                        e.no,
                        format!("light.diurnal: expected half-sine or constant, got {other:?}"),
                    ))
                }
            },
            ("light", "sunrise_s") => sunrise_s = Some(f64_of(e)?),
            ("light", "sunset_s") => sunset_s = Some(f64_of(e)?),
            ("light", "constant_level") => constant_level = Some(f64_of(e)?),
            ("camera", "interval_s") => cfg.capture_interval_s = f64_of(e)?,
            ("disturbance", "wind_amplitude") => cfg.wind_amplitude = f64_of(e)?,
            ("disturbance", "presence") => {
                let mut spans = Vec::new();
                for part in e.value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let parsed = (|| {
                        let (range, flux) = part.split_once(':')?;
                        let (start, end) = range.split_once('-')?;
                        Some(PresenceInterval {
                            start_s: start.trim().parse().ok()?,
                            end_s: end.trim().parse().ok()?,
                            flux: flux.trim().parse().ok()?,
                        })
                    })();
                    match parsed {
                        Some(p) => spans.push(p),
                        None => {
                            return Err(parse_err(
                                e.no,
                                format!("disturbance.presence: expected start-end:flux, got {part:?}"),
                            ))
                        }
                    }
                }
                cfg.presence = spans;
            }
            (section, key) => {
                return Err(parse_err(e.no, format!("unknown key {section}.{key}")));
            }
        }
    }

    // Assemble the light model.
    let sunrise_default = 21_600.0;
    let sunset_default = 64_800.0;
    match diurnal_kind {
        None | Some(("half-sine", _)) => {
            if diurnal_kind.is_none() && constant_level.is_some() {
                return Err(Error::config(
                    "light.constant_level",
                    "only meaningful with diurnal = constant",
                ));
            }
            cfg.light.diurnal = Diurnal::HalfSine {
                sunrise_s: sunrise_s.unwrap_or(sunrise_default),
                sunset_s: sunset_s.unwrap_or(sunset_default),
            };
        }
        Some(("constant", no)) => {
            if sunrise_s.is_some() || sunset_s.is_some() {
                return Err(parse_err(
                    no,
                    "light.sunrise_s/sunset_s: only meaningful with diurnal = half-sine",
                ));
            }
            cfg.light.diurnal = Diurnal::Constant(constant_level.unwrap_or(1.0));
        }
        Some(_) => unreachable!(),
    }

    // Resolve the species list, then apply any [plant:<name>] sections.
    if let Some((names, no)) = species_names {
        if names.is_empty() {
            return Err(parse_err(no, "plants.species: empty species list"));
        }
        let mut species = Vec::new();
        for name in names {
            match preset_by_name(&name) {
                Some(preset) => species.push(preset),
                None => {
                    if !section_lines.iter().any(|(s, _)| s == &format!("plant:{name}")) {
                        return Err(parse_err(
                            no,
                            format!(
                                "plants.species: {name:?} is not a stock species and has no [plant:{name}] section"
                            ),
                        ));
                    }
                    species.push(PlantSpecies {
                        name: name.clone(),
                        comfort_rh_lo: 50.0,
                        transp_coeff_k: 0.0,
                        movements: Vec::new(),
                    });
                }
            }
        }
        cfg.species = species;
    }
    for (name, no) in section_lines.iter().filter(|(s, _)| s.starts_with("plant:")) {
        let plant_name = &name["plant:".len()..];
        if !cfg.species.iter().any(|s| s.name == plant_name) {
            return Err(parse_err(
                *no,
                format!("[{name}] does not match any species in plants.species"),
            ));
        }
    }
    for e in entries.iter().filter(|e| e.section.starts_with("plant:")) {
        let plant_name = e.section["plant:".len()..].to_owned();
        let species = cfg
            .species
            .iter_mut()
            .find(|s| s.name == plant_name)
            .expect("checked above");
        match e.key {
            "transp_coeff_k" => species.transp_coeff_k = f64_of(e)?,
            "comfort_rh_lo" => species.comfort_rh_lo = f64_of(e)?,
            "movements" => {
                let mut movements = Vec::new();
                for part in e.value.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                    let fields: Vec<&str> = part.split(':').map(str::trim).collect();
                    let parsed = if fields.len() == 3 {
                        match (fields[1].parse::<f64>(), fields[2].parse::<f64>()) {
                            (Ok(period_s), Ok(amplitude)) => {
                                Some(Movement::new(fields[0], period_s, amplitude))
                            }
                            _ => None,
                        }
                    } else {
                        None
                    };
                    match parsed {
                        Some(m) => movements.push(m),
                        None => {
                            return Err(parse_err(
                                e.no,
                                format!(
                                    "{}.movements: expected label:period_s:amplitude, got {part:?}",
                                    e.section
                                ),
                            ))
                        }
                    }
                }
                species.movements = movements;
            }
            key => {
                return Err(parse_err(e.no, format!("unknown key {}.{key}", e.section)));
            }
        }
    }

    cfg.validate()?;
    Ok(cfg)
}
