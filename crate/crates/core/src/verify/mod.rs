//! Batch verification: configuration, sampling, the check suite and its
//! reports.

mod checks;
pub mod tables;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::GeomError;
use crate::surface::ChartBox;
use crate::zoo::ModelSpec;

pub use checks::{run_suite, CHECKS};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] GeomError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
}

/// `start:stop:step`, inclusive of `stop` up to rounding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for LGrid {
    fn default() -> Self {
        Self {
            start: -1.0,
            stop: 1.0,
            step: 0.05,
        }
    }
}

impl LGrid {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(ConfigError::Invalid(format!(
                "l-grid step must be positive: got {}",
                self.step
            )));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || self.stop < self.start {
            return Err(ConfigError::Invalid(format!(
                "l-grid needs finite start <= stop: got {}:{}",
                self.start, self.stop
            )));
        }
        if (self.stop - self.start) / self.step > 1e6 {
            return Err(ConfigError::Invalid("l-grid has more than 10^6 points".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl FromStr for LGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:stop:step, got '{s}'"));
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("bad number '{p}' in '{s}'"));
        Ok(Self {
            start: num(parts[0])?,
            stop: num(parts[1])?,
            step: num(parts[2])?,
        })
    }
}

impl fmt::Display for LGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

pub const DEFAULT_SAMPLES: usize = 200;

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub model: ModelSpec,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u32,
    /// Overrides on input; every tolerance in effect after [`SuiteConfig::resolve`].
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub l_grid: LGrid,
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing)]
    pub format: Format,
}

impl SuiteConfig {
    pub fn new(model: ModelSpec) -> Self {
        Self {
            model,
            samples: DEFAULT_SAMPLES,
            seed: 0,
            tolerances: BTreeMap::new(),
            l_grid: LGrid::default(),
            output: None,
            format: Format::Json,
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })
    }

    /// Validates the configuration and fills in default tolerances.
    pub fn resolve(mut self) -> Result<Self, ConfigError> {
        if self.samples == 0 {
            return Err(ConfigError::Invalid("samples must be at least 1".into()));
        }
        self.l_grid.validate()?;
        for (name, tol) in &self.tolerances {
            if !CHECKS.iter().any(|c| c.name == name) {
                return Err(ConfigError::Invalid(format!("unknown tolerance name '{name}'")));
            }
            if !(*tol > 0.0) || !tol.is_finite() {
                return Err(ConfigError::Invalid(format!(
                    "tolerance {name} must be positive: got {tol}"
                )));
            }
        }
        for c in CHECKS {
            self.tolerances.entry(c.name.to_string()).or_insert(c.tolerance);
        }
        Ok(self)
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances
            .get(name)
            .copied()
            .or_else(|| CHECKS.iter().find(|c| c.name == name).map(|c| c.tolerance))
            .unwrap_or_else(|| panic!("no tolerance registered for '{name}'"))
    }
}

/// Parses `name=value`.
pub fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got '{s}'"))?;
    let v = value
        .trim()
        .parse::<f64>()
        .map_err(|_| format!("bad tolerance value '{value}'"))?;
    Ok((name.trim().to_string(), v))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    /// Absent for skipped checks and checks that could not be evaluated.
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    /// `None` when skipped.
    pub pass: Option<bool>,
    pub n_samples: usize,
    pub notes: String,
    /// Informational checks are reported but do not affect the exit status.
    pub informational: bool,
}

impl CheckResult {
    pub fn measured(name: &str, residual: f64, tolerance: f64, n_samples: usize) -> Self {
        Self {
            name: name.to_string(),
            max_residual: Some(residual),
            tolerance,
            pass: Some(residual <= tolerance),
            n_samples,
            notes: String::new(),
            informational: false,
        }
    }

    pub fn skipped(name: &str, tolerance: f64, reason: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            max_residual: None,
            tolerance,
            pass: None,
            n_samples: 0,
            notes: format!("skipped: {}", reason.into()),
            informational: false,
        }
    }

    pub fn errored(name: &str, tolerance: f64, n_samples: usize, err: impl fmt::Display) -> Self {
        Self {
            name: name.to_string(),
            max_residual: None,
            tolerance,
            pass: Some(false),
            n_samples,
            notes: format!("error: {err}"),
            informational: false,
        }
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        let notes = notes.into();
        if self.notes.is_empty() {
            self.notes = notes;
        } else if !notes.is_empty() {
            self.notes = format!("{}; {notes}", self.notes);
        }
        self
    }

    pub fn informational(mut self) -> Self {
        self.informational = true;
        self
    }

    pub fn is_failure(&self) -> bool {
        self.pass == Some(false) && !self.informational
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: usize,
    /// Failing checks that count against the run.
    pub failed: usize,
    pub skipped: usize,
    /// Failing informational checks.
    pub informational_failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: SuiteConfig,
    pub results: Vec<CheckResult>,
    pub summary: Summary,
}

impl Report {
    pub fn new(config: SuiteConfig, mut results: Vec<CheckResult>) -> Self {
        results.sort_by(|a, b| a.name.cmp(&b.name));
        let mut summary = Summary::default();
        for r in &results {
            match r.pass {
                None => summary.skipped += 1,
                Some(true) => summary.passed += 1,
                Some(false) if r.informational => summary.informational_failed += 1,
                Some(false) => summary.failed += 1,
            }
        }
        Self {
            config,
            results,
            summary,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| r.is_failure())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,max_residual,tolerance,pass,n_samples,informational,notes\n");
        for r in &self.results {
            let residual = r.max_residual.map(|v| format!("{v:e}")).unwrap_or_default();
            let pass = match r.pass {
                Some(true) => "true",
                Some(false) => "false",
                None => "skipped",
            };
            out.push_str(&format!(
                "{},{},{:e},{},{},{},{}\n",
                r.name,
                residual,
                r.tolerance,
                pass,
                r.n_samples,
                r.informational,
                csv_field(&r.notes)
            ));
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// `n` points of an Owen-scrambled Sobol sequence mapped onto `domain`.
pub fn sobol_points(domain: &ChartBox, n: usize, seed: u32) -> Vec<[f64; 3]> {
    (0..n as u32)
        .map(|i| {
            let s: [f64; 3] = std::array::from_fn(|d| sobol_burley::sample(i, d as u32, seed) as f64);
            domain.at_unit(s)
        })
        .collect()
}
