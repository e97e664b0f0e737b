//! Run manifests: everything needed to audit or repeat a run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::decay::{FitModel, RateFit};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// A named pass/fail verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub expected: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    /// `|value - expected| <= tolerance`.
    pub fn near(name: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            passed: (value - expected).abs() <= tolerance,
            value: Some(value),
            expected: Some(expected),
            tolerance: Some(tolerance),
            detail: format!("{value:.6} vs {expected} +- {tolerance}"),
        }
    }

    /// `value <= limit`.
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            passed: value <= limit,
            value: Some(value),
            expected: None,
            tolerance: Some(limit),
            detail: format!("{value:.3e} <= {limit:e}"),
        }
    }

    /// `value < limit`.
    pub fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            passed: value < limit,
            value: Some(value),
            expected: None,
            tolerance: Some(limit),
            detail: format!("{value:.4} < {limit}"),
        }
    }

    pub fn flag(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, value: None, expected: None, tolerance: None, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedRate {
    pub label: String,
    pub model: FitModel,
    #[serde(with = "number")]
    pub exponent_or_rate: f64,
    #[serde(with = "number")]
    pub amplitude: f64,
    #[serde(with = "number")]
    pub offset: f64,
    #[serde(with = "number")]
    pub rms_residual: f64,
    pub window: (f64, f64),
    pub samples: usize,
    pub expected: Option<f64>,
}

impl FittedRate {
    pub fn new(label: impl Into<String>, fit: &RateFit, expected: Option<f64>) -> Self {
        FittedRate {
            label: label.into(),
            model: fit.model,
            exponent_or_rate: fit.exponent_or_rate,
            amplitude: fit.amplitude,
            offset: fit.offset,
            rms_residual: fit.rms_residual,
            window: fit.window,
            samples: fit.samples,
            expected,
        }
    }

    pub fn as_fit(&self) -> RateFit {
        RateFit {
            model: self.model,
            exponent_or_rate: self.exponent_or_rate,
            amplitude: self.amplitude,
            offset: self.offset,
            rms_residual: self.rms_residual,
            window: self.window,
            samples: self.samples,
        }
    }
}

/// JSON has no NaN or infinity; those are written as the strings `NaN`, `inf` and `-inf`.
mod number {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Path relative to the manifest's directory.
    pub path: String,
    pub description: String,
}

/// A plot the report renders from a CSV output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "plot", rename_all = "kebab-case")]
pub enum PlotSpec {
    /// Log-log series with the fitted law over its window.
    RateFit { file: String, data: String, x: String, y: String, fit: FittedRate },
    /// Log-log convergence of an error against a parameter, with the fitted slope.
    Order { file: String, data: String, x: String, ys: Vec<String>, slopes: Vec<Option<f64>> },
    /// Margin against time, one line per value of `group`; the smallest margin is marked.
    Margin { file: String, data: String, x: String, y: String, group: Option<String> },
    /// Semilog plot of `|y|` with the fitted exponential rate.
    Layer { file: String, data: String, x: String, y: String, rate: Option<f64>, amplitude: Option<f64>, tau: f64 },
}

impl PlotSpec {
    pub fn file(&self) -> &str {
        match self {
            PlotSpec::RateFit { file, .. }
            | PlotSpec::Order { file, .. }
            | PlotSpec::Margin { file, .. }
            | PlotSpec::Layer { file, .. } => file,
        }
    }

    pub fn data(&self) -> &str {
        match self {
            PlotSpec::RateFit { data, .. }
            | PlotSpec::Order { data, .. }
            | PlotSpec::Margin { data, .. }
            | PlotSpec::Layer { data, .. } => data,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub kind: String,
    pub seed: u64,
    /// The full configuration after overrides and defaults.
    pub config: serde_json::Value,
    pub versions: BTreeMap<String, String>,
    pub outputs: Vec<OutputFile>,
    pub fitted_rates: Vec<FittedRate>,
    pub checks: Vec<Check>,
    pub plots: Vec<PlotSpec>,
    pub timings: Vec<Timing>,
    pub tags: Vec<String>,
    pub all_passed: bool,
}

/// Version of every module; they ship together in one crate.
pub fn module_versions() -> BTreeMap<String, String> {
    let v = env!("CARGO_PKG_VERSION").to_string();
    ["spectral", "roots", "propagator", "decay", "limit", "jmgt", "gn", "experiment"]
        .into_iter()
        .map(|m| (m.to_string(), v.clone()))
        .collect()
}

impl Manifest {
    /// Writes `dir/manifest.json` through a temporary file and a rename.
    pub fn write_atomic(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        let tmp = dir.join(format!("{MANIFEST_FILE}.tmp"));
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}
