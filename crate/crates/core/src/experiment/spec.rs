//! Experiment specification files (TOML).
//!
//! ```toml
//! num_runs = 100
//! seed_base = 7
//! report_path = "report.json"   # optional
//! secrecy = false               # exhaustive secrecy scan of accepted runs
//!
//! [base]
//! m = 2
//! n = 2
//! block_size = 1024
//! sample_fraction = 0.25
//! error_threshold = 0.11
//! pns_mode = "ge2"              # or "gt2"
//! pns_idealized = true
//!
//! [[base.attacks]]
//! to = "bob-1"                  # the segment delivering into bob-1
//! kind = "intercept-resend-random"
//! coverage = 1.0
//!
//! [[sweep]]
//! path = "error_threshold"      # dotted path into [base]; array items by index
//! values = [0.05, 0.11, 0.2]
//! ```
//!
//! `base.rng_seed` is ignored by the runner: each run is seeded from
//! `seed_base` (see [`crate::experiment::derive_seed`]).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::protocol::ProtocolConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub path: String,
    pub values: Vec<toml::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default = "one")]
    pub num_runs: usize,
    #[serde(default)]
    pub seed_base: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_path: Option<PathBuf>,
    #[serde(default)]
    pub secrecy: bool,
    pub base: ProtocolConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepAxis>,
}

fn one() -> usize {
    1
}

/// A value assigned to a swept path, rendered as TOML.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweptValue {
    pub path: String,
    pub value: String,
}

/// One point of the sweep's cartesian product.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub index: usize,
    pub swept: Vec<SweptValue>,
    pub config: ProtocolConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("num_runs must be at least 1")]
    NoRuns,
    #[error("{field}: {source}")]
    Invalid { field: String, source: ConfigError },
    #[error("sweep path `{0}` does not name a field of [base]")]
    UnknownPath(String),
    #[error("sweep over `{path}` has no values")]
    EmptySweep { path: String },
    #[error("sweep `{path}` = {value}: {message}")]
    BadValue {
        path: String,
        value: String,
        message: String,
    },
}

impl ExperimentSpec {
    pub fn new(base: ProtocolConfig, num_runs: usize) -> Self {
        Self {
            num_runs,
            seed_base: 0,
            report_path: None,
            secrecy: false,
            base,
            sweep: Vec::new(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, SpecError> {
        let spec: ExperimentSpec =
            toml::from_str(text).map_err(|e| SpecError::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("experiment specs are representable in TOML")
    }

    /// Checks the run count and every expanded configuration.
    pub fn validate(&self) -> Result<(), SpecError> {
        if self.num_runs == 0 {
            return Err(SpecError::NoRuns);
        }
        self.configurations().map(|_| ())
    }

    /// Expands the sweep into validated configurations; without a sweep,
    /// the base configuration alone.
    pub fn configurations(&self) -> Result<Vec<Configuration>, SpecError> {
        let base = toml::Value::try_from(&self.base).expect("configs serialize to TOML");
        let mut points: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
        for (axis, sweep) in self.sweep.iter().enumerate() {
            if sweep.values.is_empty() {
                return Err(SpecError::EmptySweep {
                    path: sweep.path.clone(),
                });
            }
            points = points
                .into_iter()
                .flat_map(|p| {
                    (0..sweep.values.len()).map(move |v| {
                        let mut q = p.clone();
                        q.push((axis, v));
                        q
                    })
                })
                .collect();
        }

        points
            .into_iter()
            .enumerate()
            .map(|(index, point)| {
                let mut value = base.clone();
                let mut swept = Vec::with_capacity(point.len());
                for (axis, v) in point {
                    let sweep = &self.sweep[axis];
                    let new = &sweep.values[v];
                    let slot = lookup_mut(&mut value, &sweep.path)
                        .ok_or_else(|| SpecError::UnknownPath(sweep.path.clone()))?;
                    *slot = new.clone();
                    swept.push(SweptValue {
                        path: sweep.path.clone(),
                        value: new.to_string(),
                    });
                }
                let config: ProtocolConfig = value.try_into().map_err(|e: toml::de::Error| {
                    let last = swept.last().cloned().unwrap_or(SweptValue {
                        path: String::new(),
                        value: String::new(),
                    });
                    SpecError::BadValue {
                        path: last.path,
                        value: last.value,
                        message: e.message().to_string(),
                    }
                })?;
                config.validate().map_err(|source| SpecError::Invalid {
                    field: if swept.is_empty() {
                        format!("base.{}", source.field())
                    } else {
                        let at: Vec<String> = swept
                            .iter()
                            .map(|s| format!("{}={}", s.path, s.value))
                            .collect();
                        format!("base.{} (sweep {})", source.field(), at.join(", "))
                    },
                    source,
                })?;
                Ok(Configuration {
                    index,
                    swept,
                    config,
                })
            })
            .collect()
    }
}

fn lookup_mut<'a>(root: &'a mut toml::Value, path: &str) -> Option<&'a mut toml::Value> {
    path.split('.').try_fold(root, |node, key| match node {
        toml::Value::Table(table) => table.get_mut(key),
        toml::Value::Array(items) => key.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
        _ => None,
    })
}

pub fn load_spec(path: &Path) -> Result<ExperimentSpec, SpecError> {
    let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ExperimentSpec::from_toml_str(&text)
}
