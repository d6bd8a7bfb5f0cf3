//! TOML configuration with unit-bearing values.
//!
//! Every key is optional; missing keys take the defaults of the reference
//! setup. Unknown keys are rejected by name.

use std::path::Path;

use fdasec::experiments::{equispaced, ExperimentConfig, Initialization, Scheme};
use fdasec::{ArrayGeometry, NodePlacement, RfParams, Scenario};
use serde::Deserialize;

use crate::units::{self, Kind};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("`{field}`: {reason}")]
    Field { field: String, reason: String },
    #[error(transparent)]
    Model(#[from] fdasec::Error),
}

fn field_error(field: &str, reason: impl ToString) -> ConfigError {
    ConfigError::Field {
        field: field.to_string(),
        reason: reason.to_string(),
    }
}

/// A number in SI base units or a string with a unit suffix.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

impl Quantity {
    fn resolve(&self, field: &str, kind: Kind) -> Result<f64, ConfigError> {
        match self {
            Quantity::Number(x) => Ok(*x),
            Quantity::Text(t) => units::parse(t, kind).map_err(|e| field_error(field, e)),
        }
    }
}

fn resolve_or(
    q: &Option<Quantity>,
    field: &str,
    kind: Kind,
    default: f64,
) -> Result<f64, ConfigError> {
    q.as_ref().map_or(Ok(default), |q| q.resolve(field, kind))
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub rf: RfSection,
    pub array: ArraySection,
    pub scenario: ScenarioSection,
    pub solve: SolveSection,
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RfSection {
    pub carrier_frequency: Option<Quantity>,
    pub max_offset: Option<Quantity>,
    /// Sets both noise powers unless one is given explicitly.
    pub noise_power: Option<Quantity>,
    pub noise_power_bob: Option<Quantity>,
    pub noise_power_eve: Option<Quantity>,
    /// m/s
    pub wave_speed: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArraySection {
    pub element_count: Option<usize>,
    /// m
    pub first_element_x: Option<f64>,
    /// m; half a wavelength when absent
    pub spacing: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    /// m
    pub bob_range: Option<f64>,
    pub bob_angle: Option<Quantity>,
    /// m
    pub eve_range: Option<f64>,
    pub eve_angle: Option<Quantity>,
    pub time: Option<Quantity>,
    /// Initial offsets for the optimizer, or the fixed plan when
    /// `solve.optimize = false`.
    pub offsets: Option<Vec<Quantity>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveSection {
    /// bits/s/Hz
    pub target_rate: Option<f64>,
    pub power_budget: Option<Quantity>,
    pub optimize: Option<bool>,
    pub initialization: Option<String>,
    pub tolerance: Option<f64>,
    pub max_outer: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub realizations: Option<usize>,
    pub seed: Option<u64>,
    pub antenna_counts: Option<Vec<usize>>,
    pub rate_antenna_count: Option<usize>,
    pub power_grid: Option<Vec<Quantity>>,
    /// bits/s/Hz
    pub target_rate: Option<f64>,
    /// m
    pub range_interval: Option<[f64; 2]>,
    /// m
    pub range_gap: Option<f64>,
    pub angle_interval: Option<[Quantity; 2]>,
    pub time_horizon: Option<Quantity>,
    pub time_sample_count: Option<usize>,
    pub baselines: Option<Vec<String>>,
    pub initialization: Option<String>,
    pub tolerance: Option<f64>,
    pub max_outer: Option<usize>,
    pub workers: Option<usize>,
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone)]
pub struct Settings {
    pub scenario: Scenario,
    pub time: f64,
    pub offsets: Option<Vec<f64>>,
    pub target_rate: f64,
    pub power_budget: f64,
    pub optimize: bool,
    pub initialization: Initialization,
    pub tolerance: f64,
    pub max_outer: usize,
    pub experiment: ExperimentConfig,
}

/// Overrides applied on top of the file, from command-line flags.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    /// `section.key=value` assignments.
    pub assignments: Vec<String>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub initialization: Option<Initialization>,
}

pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Settings, ConfigError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|source| ConfigError::Io {
            path: p.display().to_string(),
            source,
        })?,
        None => String::new(),
    };
    let file = parse(&text, &overrides.assignments)?;
    resolve(&file, overrides)
}

/// Parses the file text, then applies `key=value` assignments.
pub fn parse(text: &str, assignments: &[String]) -> Result<FileConfig, ConfigError> {
    // the first pass keeps line and column information in errors
    let file: FileConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    if assignments.is_empty() {
        return Ok(file);
    }
    let mut table: toml::Table =
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    for assignment in assignments {
        apply_assignment(&mut table, assignment)?;
    }
    FileConfig::deserialize(toml::Value::Table(table))
        .map_err(|e| ConfigError::Parse(format!("after --set overrides: {}", e.message())))
}

fn apply_assignment(table: &mut toml::Table, assignment: &str) -> Result<(), ConfigError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| field_error(assignment, "override must look like section.key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    let (last, sections) = parts.split_last().expect("split yields at least one part");
    let mut current = table;
    for section in sections {
        let entry = current
            .entry(section.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        current = entry
            .as_table_mut()
            .ok_or_else(|| field_error(key, format!("`{section}` is not a section")))?;
    }
    current.insert(last.to_string(), value);
    Ok(())
}

fn initialization(name: &str, field: &str) -> Result<Initialization, ConfigError> {
    Initialization::from_name(name).ok_or_else(|| {
        field_error(
            field,
            format!("unknown initialization {name:?}, expected phased, linear or random"),
        )
    })
}

pub fn resolve(file: &FileConfig, overrides: &Overrides) -> Result<Settings, ConfigError> {
    let defaults = ExperimentConfig::default();
    let rf_defaults = defaults.rf;

    let rf = &file.rf;
    let noise = resolve_or(
        &rf.noise_power,
        "rf.noise_power",
        Kind::Power,
        rf_defaults.noise_power(fdasec::Node::Bob),
    )?;
    let rf_params = RfParams::with_wave_speed(
        resolve_or(
            &rf.carrier_frequency,
            "rf.carrier_frequency",
            Kind::Frequency,
            rf_defaults.carrier_frequency(),
        )?,
        resolve_or(
            &rf.max_offset,
            "rf.max_offset",
            Kind::Frequency,
            rf_defaults.max_offset(),
        )?,
        rf.wave_speed.unwrap_or(rf_defaults.wave_speed()),
        resolve_or(
            &rf.noise_power_bob,
            "rf.noise_power_bob",
            Kind::Power,
            noise,
        )?,
        resolve_or(
            &rf.noise_power_eve,
            "rf.noise_power_eve",
            Kind::Power,
            noise,
        )?,
    )?;

    let first_x = file
        .array
        .first_element_x
        .unwrap_or(defaults.first_element_x);
    let spacing = file.array.spacing.unwrap_or(rf_params.wavelength() / 2.0);
    let array = ArrayGeometry::new(file.array.element_count.unwrap_or(4), first_x, spacing)?;

    let sc = &file.scenario;
    let bob_angle = resolve_or(
        &sc.bob_angle,
        "scenario.bob_angle",
        Kind::Angle,
        std::f64::consts::FRAC_PI_3,
    )?;
    let bob = NodePlacement::new(sc.bob_range.unwrap_or(100.0), bob_angle)?;
    let eve = NodePlacement::new(
        sc.eve_range.unwrap_or(bob.range() + defaults.range_gap),
        resolve_or(&sc.eve_angle, "scenario.eve_angle", Kind::Angle, bob_angle)?,
    )?;
    let scenario = Scenario::new(rf_params, array, bob, eve)?;
    let time = resolve_or(&sc.time, "scenario.time", Kind::Time, 0.0)?;
    let offsets = sc
        .offsets
        .as_ref()
        .map(|list| {
            list.iter()
                .enumerate()
                .map(|(i, q)| q.resolve(&format!("scenario.offsets[{i}]"), Kind::Frequency))
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;

    let solve = &file.solve;
    let solve_init = match (&overrides.initialization, &solve.initialization) {
        (Some(i), _) => *i,
        (None, Some(name)) => initialization(name, "solve.initialization")?,
        (None, None) => Initialization::default(),
    };

    let ex = &file.experiment;
    let mut experiment = ExperimentConfig {
        rf: rf_params,
        first_element_x: first_x,
        spacing: file.array.spacing,
        ..defaults.clone()
    };
    if let Some(v) = ex.realizations {
        experiment.realizations = v;
    }
    if let Some(v) = overrides.seed.or(ex.seed) {
        experiment.rng_seed = v;
    }
    if let Some(v) = &ex.antenna_counts {
        experiment.antenna_counts = v.clone();
    }
    if let Some(v) = ex.rate_antenna_count {
        experiment.rate_antenna_count = v;
    }
    if let Some(grid) = &ex.power_grid {
        experiment.power_grid = grid
            .iter()
            .enumerate()
            .map(|(i, q)| q.resolve(&format!("experiment.power_grid[{i}]"), Kind::Power))
            .collect::<Result<_, _>>()?;
    }
    if let Some(v) = ex.target_rate {
        experiment.target_rate = v;
    }
    if let Some([lo, hi]) = ex.range_interval {
        experiment.range_interval = (lo, hi);
    }
    if let Some(v) = ex.range_gap {
        experiment.range_gap = v;
    }
    if let Some([lo, hi]) = &ex.angle_interval {
        experiment.angle_interval = (
            lo.resolve("experiment.angle_interval[0]", Kind::Angle)?,
            hi.resolve("experiment.angle_interval[1]", Kind::Angle)?,
        );
    }
    let horizon = resolve_or(
        &ex.time_horizon,
        "experiment.time_horizon",
        Kind::Time,
        20e-6,
    )?;
    experiment.time_samples = equispaced(0.0, horizon, ex.time_sample_count.unwrap_or(21));
    if let Some(names) = &ex.baselines {
        experiment.baselines = names
            .iter()
            .map(|n| {
                Scheme::from_name(n).ok_or_else(|| {
                    field_error(
                        "experiment.baselines",
                        format!(
                            "unknown scheme {n:?}, expected bound, proposed, linear, phased or mrt"
                        ),
                    )
                })
            })
            .collect::<Result<_, _>>()?;
    }
    experiment.initialization = match (&overrides.initialization, &ex.initialization) {
        (Some(i), _) => *i,
        (None, Some(name)) => initialization(name, "experiment.initialization")?,
        (None, None) => Initialization::default(),
    };
    if let Some(v) = ex.tolerance {
        experiment.tolerance = v;
    }
    if let Some(v) = ex.max_outer {
        experiment.max_outer = v;
    }
    experiment.workers = overrides.workers.or(ex.workers);
    experiment.validate()?;

    let tolerance = solve.tolerance.unwrap_or(experiment.tolerance);
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(field_error("solve.tolerance", "must be > 0"));
    }
    let max_outer = solve.max_outer.unwrap_or(experiment.max_outer);
    if max_outer == 0 {
        return Err(field_error("solve.max_outer", "must be >= 1"));
    }
    Ok(Settings {
        scenario,
        time,
        offsets,
        target_rate: solve.target_rate.unwrap_or(experiment.target_rate),
        power_budget: resolve_or(&solve.power_budget, "solve.power_budget", Kind::Power, 1e-3)?,
        optimize: solve.optimize.unwrap_or(true),
        initialization: solve_init,
        tolerance,
        max_outer,
        experiment,
    })
}
