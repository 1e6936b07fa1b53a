//! Flat `key=value` experiment files.
//!
//! One or more `key=value` pairs per line, `#` starts a comment. `M`, `N`
//! and `N_vec` are required; every other key has a default:
//!
//! | key | default | | key | default |
//! |-----|---------|-|-----|---------|
//! | `k` | 0 | | `L` | 10 |
//! | `beta` | 0.2 | | `S` | 5 |
//! | `los_formula` | normalized | | `mutation_fraction` | 0.10 |
//! | `P_dB` | 10 | | `theta_dB` | 0 |
//! | `alpha` | 0.001 | | `epsilon`, `mu`, `rho_max_dB` | 1, 0, inf |
//! | `N_it` | 500 | | `realizations` | 500 |
//! | `seed` | 1 | | `objective` | throughput |
//! | `sweep` | none | | `baselines` | none |
//! | `exhaustive_cap` | 1000000 | | `record_timing` | false |
//!
//! `sweep` takes `KEY:v1,v2,...` over any scenario key; `baselines` takes a
//! comma list of `exhaustive` and `random`.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metrics::{Objective, ObjectiveKind};
use crate::model::{ConfigViolation, SystemConfig};
use crate::search::DEFAULT_EXHAUSTIVE_CAP;

pub const REQUIRED_KEYS: [&str; 3] = ["M", "N", "N_vec"];

/// Keys describing one simulation point; these may also be swept.
pub const SCENARIO_KEYS: [&str; 18] = [
    "M",
    "N",
    "N_vec",
    "k",
    "beta",
    "los_formula",
    "P_dB",
    "alpha",
    "N_it",
    "L",
    "S",
    "mutation_fraction",
    "theta_dB",
    "epsilon",
    "mu",
    "rho_max_dB",
    "realizations",
    "seed",
];

pub const EXPERIMENT_KEYS: [&str; 5] = [
    "objective",
    "sweep",
    "baselines",
    "exhaustive_cap",
    "record_timing",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Baseline {
    Exhaustive,
    Random,
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Baseline::Exhaustive => "exhaustive",
            Baseline::Random => "random",
        })
    }
}

impl FromStr for Baseline {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "exhaustive" => Ok(Baseline::Exhaustive),
            "random" => Ok(Baseline::Random),
            other => Err(format!("unknown baseline `{}`", other)),
        }
    }
}

/// One swept scenario key and its values, kept as written.
#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub key: String,
    pub values: Vec<String>,
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.key, self.values.join(","))
    }
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (key, values) = s
            .split_once(':')
            .ok_or_else(|| format!("expected KEY:v1,v2,... got `{}`", s))?;
        let key = key.trim();
        if !SCENARIO_KEYS.contains(&key) {
            return Err(format!("cannot sweep unknown key `{}`", key));
        }
        let values: Vec<String> = values
            .split(',')
            .map(|v| v.trim().to_string())
            .filter(|v| !v.is_empty())
            .collect();
        if values.is_empty() {
            return Err(format!("sweep over `{}` has no values", key));
        }
        Ok(Sweep {
            key: key.to_string(),
            values,
        })
    }
}

/// A scenario plus what to sweep, optimise and compare against.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub base: SystemConfig,
    pub sweep: Option<Sweep>,
    pub objective: ObjectiveKind,
    pub baselines: Vec<Baseline>,
    pub exhaustive_cap: u64,
    /// Write wall-clock seconds into the summary CSV (off keeps CSVs reproducible).
    pub record_timing: bool,
}

/// One resolved simulation point of an experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    /// The swept value as written, or `base` when nothing is swept.
    pub label: String,
    pub config: SystemConfig,
}

impl ExperimentConfig {
    pub fn new(base: SystemConfig) -> Self {
        Self {
            base,
            sweep: None,
            objective: ObjectiveKind::Throughput,
            baselines: Vec::new(),
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
            record_timing: false,
        }
    }

    pub fn objective_for(&self, cfg: &SystemConfig) -> Objective {
        Objective::new(self.objective, cfg.alpha, cfg.theta_db)
    }

    /// Applies one `key=value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let bad = || Error::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
        };
        match key {
            "objective" => self.objective = value.parse().map_err(|_| bad())?,
            "sweep" => {
                self.sweep = if value.is_empty() || value == "none" {
                    None
                } else {
                    Some(value.parse().map_err(|e: String| Error::InvalidValue {
                        key: key.into(),
                        value: e,
                    })?)
                }
            }
            "baselines" => {
                self.baselines = if value.is_empty() || value == "none" {
                    Vec::new()
                } else {
                    value
                        .split(',')
                        .map(str::parse)
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad())?
                }
            }
            "exhaustive_cap" => self.exhaustive_cap = value.parse().map_err(|_| bad())?,
            "record_timing" => self.record_timing = value.parse().map_err(|_| bad())?,
            _ => set_scenario_key(&mut self.base, key, value)?,
        }
        Ok(())
    }

    /// Every simulation point, in sweep order.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        match &self.sweep {
            None => Ok(vec![SweepPoint {
                label: "base".into(),
                config: self.base.clone(),
            }]),
            Some(sweep) => sweep
                .values
                .iter()
                .map(|v| {
                    let mut config = self.base.clone();
                    set_scenario_key(&mut config, &sweep.key, v)?;
                    Ok(SweepPoint {
                        label: v.clone(),
                        config,
                    })
                })
                .collect(),
        }
    }

    /// Validates every sweep point.
    pub fn validate(&self) -> Result<()> {
        let mut all: Vec<ConfigViolation> = Vec::new();
        for point in self.points()? {
            all.extend(crate::model::validate_config(&point.config));
        }
        if all.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(all))
        }
    }

    /// Resolved configuration as ordered `key=value` pairs (round-trips through the parser).
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let mut pairs = scenario_pairs(&self.base);
        pairs.push(("objective", self.objective.to_string()));
        pairs.push((
            "sweep",
            self.sweep.as_ref().map_or("none".into(), Sweep::to_string),
        ));
        pairs.push((
            "baselines",
            if self.baselines.is_empty() {
                "none".into()
            } else {
                self.baselines
                    .iter()
                    .map(Baseline::to_string)
                    .collect::<Vec<_>>()
                    .join(",")
            },
        ));
        pairs.push(("exhaustive_cap", self.exhaustive_cap.to_string()));
        pairs.push(("record_timing", self.record_timing.to_string()));
        pairs
    }

    pub fn to_config_text(&self) -> String {
        self.to_pairs()
            .into_iter()
            .map(|(k, v)| format!("{}={}\n", k, v))
            .collect()
    }
}

pub fn scenario_pairs(cfg: &SystemConfig) -> Vec<(&'static str, String)> {
    vec![
        ("M", cfg.antennas.to_string()),
        ("N", cfg.users.to_string()),
        ("N_vec", cfg.codebook_size.to_string()),
        ("k", cfg.rician_k.to_string()),
        ("beta", cfg.los_beta.to_string()),
        ("los_formula", cfg.los_formula.to_string()),
        ("P_dB", cfg.power_db.to_string()),
        ("alpha", cfg.alpha.to_string()),
        ("N_it", cfg.max_iterations.to_string()),
        ("L", cfg.population.to_string()),
        ("S", cfg.mutants.to_string()),
        ("mutation_fraction", cfg.mutation_fraction.to_string()),
        ("theta_dB", cfg.theta_db.to_string()),
        ("epsilon", cfg.pa.epsilon.to_string()),
        ("mu", cfg.pa.mu.to_string()),
        ("rho_max_dB", cfg.pa.rho_max_db.to_string()),
        ("realizations", cfg.realizations.to_string()),
        ("seed", cfg.seed.to_string()),
    ]
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    match value.parse::<f64>() {
        Ok(x) if !x.is_nan() => Ok(x),
        _ => Err(Error::InvalidValue {
            key: key.into(),
            value: value.into(),
        }),
    }
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value.parse().map_err(|_| Error::InvalidValue {
        key: key.into(),
        value: value.into(),
    })
}

/// Sets a scenario key on `cfg`; unknown keys are an error.
pub fn set_scenario_key(cfg: &mut SystemConfig, key: &str, value: &str) -> Result<()> {
    let value = value.trim();
    match key {
        "M" => cfg.antennas = parse_usize(key, value)?,
        "N" => cfg.users = parse_usize(key, value)?,
        "N_vec" => cfg.codebook_size = parse_usize(key, value)?,
        "k" => {
            cfg.rician_k = value.parse().map_err(|_| Error::InvalidValue {
                key: key.into(),
                value: value.into(),
            })?
        }
        "beta" => cfg.los_beta = parse_f64(key, value)?,
        "los_formula" => {
            cfg.los_formula = value.parse().map_err(|_| Error::InvalidValue {
                key: key.into(),
                value: value.into(),
            })?
        }
        "P_dB" => cfg.power_db = parse_f64(key, value)?,
        "alpha" => cfg.alpha = parse_f64(key, value)?,
        "N_it" => cfg.max_iterations = parse_usize(key, value)?,
        "L" => cfg.population = parse_usize(key, value)?,
        "S" => cfg.mutants = parse_usize(key, value)?,
        "mutation_fraction" => cfg.mutation_fraction = parse_f64(key, value)?,
        "theta_dB" => cfg.theta_db = parse_f64(key, value)?,
        "epsilon" => cfg.pa.epsilon = parse_f64(key, value)?,
        "mu" => cfg.pa.mu = parse_f64(key, value)?,
        "rho_max_dB" => cfg.pa.rho_max_db = parse_f64(key, value)?,
        "realizations" => cfg.realizations = parse_usize(key, value)?,
        "seed" => {
            cfg.seed = value.parse().map_err(|_| Error::InvalidValue {
                key: key.into(),
                value: value.into(),
            })?
        }
        other => return Err(Error::UnknownKey(other.to_string())),
    }
    Ok(())
}

/// Parses config text without validating the result. `origin` names the
/// source in error messages.
pub fn parse_config_str(text: &str, origin: &str) -> Result<ExperimentConfig> {
    let mut seen: HashSet<String> = HashSet::new();
    let mut ec = ExperimentConfig::new(SystemConfig::with_dimensions(0, 0, 0));

    for (lineno, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        for token in content.split_whitespace() {
            let parse_err = |message: String| Error::Parse {
                path: origin.to_string(),
                line: lineno + 1,
                message,
            };
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected key=value, got `{}`", token)))?;
            let key = key.trim();
            if !SCENARIO_KEYS.contains(&key) && !EXPERIMENT_KEYS.contains(&key) {
                return Err(parse_err(format!("unknown key `{}`", key)));
            }
            if !seen.insert(key.to_string()) {
                return Err(parse_err(format!("duplicate key `{}`", key)));
            }
            ec.set(key, value).map_err(|e| parse_err(e.to_string()))?;
        }
    }

    let missing: Vec<String> = REQUIRED_KEYS
        .iter()
        .filter(|k| !seen.contains(**k))
        .map(|k| k.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingKeys(missing));
    }
    Ok(ec)
}

/// Splits a `KEY=VALUE` override.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::InvalidArgument(format!("override must be KEY=VALUE, got `{}`", s)))?;
    let k = k.trim();
    if !SCENARIO_KEYS.contains(&k) && !EXPERIMENT_KEYS.contains(&k) {
        return Err(Error::UnknownKey(k.to_string()));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

/// Reads `path`, applies `overrides` in order, then validates.
pub fn load_config(path: &Path, overrides: &[(String, String)]) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut ec = parse_config_str(&text, &path.display().to_string())?;
    for (k, v) in overrides {
        ec.set(k, v)?;
    }
    ec.validate()?;
    Ok(ec)
}

/// Reads and validates a config file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    load_config(path, &[])
}
