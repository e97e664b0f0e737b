//! Experiment configuration files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::decay::FitModel;
use crate::error::{Error, Result};
use crate::limit::{ForcingSpec, LayerOptions, LimitNorm, SweepOptions};
use crate::params::Params;
use crate::propagator::geometric_times;
use crate::spectral::{DataSpec, GridSpec};

/// One experiment: physical parameters, discretisation, data, what to run and where to write.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: Option<Params>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub data: Option<DataSpec>,
    pub experiment: Experiment,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory below the output root; defaults to the config name.
    #[serde(default)]
    pub dir: Option<String>,
    /// Write full-field snapshots where the experiment supports them.
    #[serde(default)]
    pub snapshots: bool,
    /// Run the experiment a second time and compare every CSV byte for byte.
    #[serde(default)]
    pub check_determinism: bool,
}

/// Frequencies `|xi|`, geometric or evenly spaced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiRange {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub linear: bool,
}

impl XiRange {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.points >= 1 && self.max >= self.min && self.min >= 0.0) {
            return Err(Error::Config(format!("bad frequency range {self:?}")));
        }
        if self.points == 1 {
            return Ok(vec![self.min]);
        }
        let step = (self.max - self.min) / (self.points - 1) as f64;
        if self.linear {
            Ok((0..self.points).map(|i| self.min + step * i as f64).collect())
        } else if self.min > 0.0 {
            Ok(geometric_times(self.min, self.max, self.points))
        } else {
            Err(Error::Config("geometric frequency range needs min > 0".into()))
        }
    }
}

/// Output times: an explicit list or a geometric grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum TimeGrid {
    List(Vec<f64>),
    Geometric {
        t_min: f64,
        t_max: f64,
        points: usize,
        #[serde(default)]
        include_zero: bool,
    },
}

impl TimeGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            TimeGrid::List(v) if !v.is_empty() => Ok(v.clone()),
            TimeGrid::List(_) => Err(Error::Config("empty time list".into())),
            TimeGrid::Geometric { t_min, t_max, points, include_zero } => {
                if !(*t_min > 0.0 && t_max > t_min && *points >= 2) {
                    return Err(Error::Config("geometric times need 0 < t_min < t_max and points >= 2".into()));
                }
                let mut t = if *include_zero { vec![0.0] } else { Vec::new() };
                t.extend(geometric_times(*t_min, *t_max, *points));
                Ok(t)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootAuditSpec {
    pub samples: usize,
    #[serde(default = "tol_roots")]
    pub tolerance: f64,
}

fn tol_roots() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticSpec {
    pub low_min: f64,
    pub low_max: f64,
    #[serde(default = "eleven")]
    pub points: usize,
    pub high_xi: f64,
    #[serde(default = "three")]
    pub expected_order: f64,
    #[serde(default = "tol_order")]
    pub order_tolerance: f64,
    #[serde(default = "tol_high")]
    pub high_tolerance: f64,
}

fn eleven() -> usize {
    11
}

fn three() -> f64 {
    3.0
}

fn tol_order() -> f64 {
    0.3
}

fn tol_high() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rk4AuditSpec {
    pub modes: usize,
    pub t_end: f64,
    #[serde(default = "tol_rk4")]
    pub tolerance: f64,
}

fn tol_rk4() -> f64 {
    1e-7
}

/// Which evolution a linear run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    #[default]
    ThirdOrder,
    ViscousWave,
}

/// A fitted norm, optionally checked against an expected exponent or residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSpec {
    pub norm: String,
    #[serde(default = "power")]
    pub model: FitModel,
    pub window: [f64; 2],
    #[serde(default)]
    pub expected: Option<f64>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub max_residual: Option<f64>,
    /// Dimensions this fit applies to; all grids when absent.
    #[serde(default)]
    pub dims: Option<Vec<usize>>,
}

fn power() -> FitModel {
    FitModel::Power
}

/// `norm / D_n(t)` must stay within a factor `max_spread` over the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthRatioSpec {
    pub norm: String,
    pub window: [f64; 2],
    pub max_spread: f64,
    #[serde(default)]
    pub dims: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderCheck {
    pub norm: LimitNorm,
    pub expected: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualSpec {
    pub taus: Vec<f64>,
    #[serde(default = "one")]
    pub t: f64,
    #[serde(default = "two")]
    pub expected: f64,
    #[serde(default = "tol_residual")]
    pub tolerance: f64,
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

fn tol_residual() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonOrderSpec {
    pub epsilons: [f64; 2],
    #[serde(default = "one")]
    pub t_end: f64,
    #[serde(default = "two")]
    pub expected: f64,
    #[serde(default = "tol_eps")]
    pub tolerance: f64,
}

fn tol_eps() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitProbeSpec {
    pub taus: Vec<f64>,
    pub t_end: f64,
    #[serde(default)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub s_min: String,
    pub s_max: String,
    pub step: String,
}

fn half() -> String {
    "1/2".into()
}

fn eps0() -> String {
    "0.05".into()
}

fn both_m() -> Vec<u32> {
    vec![1, 2]
}

fn layer_rate_tolerance() -> f64 {
    0.05
}

fn layer_floor() -> f64 {
    1e-10
}

fn energy_tolerance() -> f64 {
    1e-8
}

fn twenty_modes() -> XiRange {
    XiRange { min: 0.01, max: 10.0, points: 20, linear: false }
}

fn exponent_tolerance() -> f64 {
    0.2
}

fn bounded_ratio() -> f64 {
    1.1
}

fn loghalf_tolerance() -> f64 {
    0.15
}

fn samples() -> usize {
    200
}

fn threshold() -> f64 {
    0.1
}

fn guard() -> f64 {
    1e3
}

/// What to run. The `kind` key selects the variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    /// Root table over a frequency range, with optional random audit and asymptotics.
    Roots {
        #[serde(default)]
        xi: Option<XiRange>,
        #[serde(default)]
        audit: Option<RootAuditSpec>,
        #[serde(default)]
        asymptotics: Option<AsymptoticSpec>,
    },
    /// Linear evolution with norm ledger; optional kernel against Runge-Kutta audit.
    LinearRun {
        times: TimeGrid,
        #[serde(default)]
        solver: Solver,
        norms: Vec<String>,
        #[serde(default)]
        rk4_audit: Option<Rk4AuditSpec>,
    },
    /// Linear evolution on one or several grids with rate fits.
    DecayFit {
        times: TimeGrid,
        /// Extra grids; the `[grid]` section is used when empty.
        #[serde(default)]
        grids: Vec<GridSpec>,
        #[serde(default)]
        fits: Vec<FitSpec>,
        #[serde(default)]
        growth_ratios: Vec<GrowthRatioSpec>,
    },
    /// Sup-in-time distance to the viscous wave solution over relaxation times.
    LimitSweep {
        taus: Vec<f64>,
        sweep: SweepOptions,
        #[serde(default)]
        grids: Vec<GridSpec>,
        #[serde(default)]
        checks: Vec<OrderCheck>,
    },
    /// Initial-layer probe over relaxation times, with companion compatible checks.
    LayerProbe {
        taus: Vec<f64>,
        layer: LayerOptions,
        #[serde(default = "layer_rate_tolerance")]
        rate_tolerance: f64,
        #[serde(default = "layer_floor")]
        compatible_max: f64,
        #[serde(default)]
        residual: Option<ResidualSpec>,
    },
    /// Per-mode energy bound with the singular-limit forcing.
    EnergyCheck {
        taus: Vec<f64>,
        #[serde(default = "twenty_modes")]
        xi: XiRange,
        #[serde(default)]
        forcing: ForcingSpec,
        t_end: f64,
        #[serde(default = "energy_tolerance")]
        tolerance: f64,
    },
    /// Nonlinear small-data runs, one per data size.
    JmgtRun {
        epsilons: Vec<f64>,
        s: f64,
        t_end: f64,
        dt: f64,
        #[serde(default = "samples")]
        samples: usize,
        #[serde(default)]
        fit_from: Option<f64>,
        #[serde(default = "threshold")]
        data_threshold: f64,
        #[serde(default = "guard")]
        guard_factor: f64,
        #[serde(default = "exponent_tolerance")]
        exponent_tolerance: f64,
        #[serde(default = "bounded_ratio")]
        bounded_ratio: f64,
        #[serde(default = "loghalf_tolerance")]
        loghalf_tolerance: f64,
        /// Which rate checks gate the exit status; all when empty.
        #[serde(default)]
        required_norms: Vec<String>,
        #[serde(default)]
        epsilon_order: Option<EpsilonOrderSpec>,
        #[serde(default)]
        limit_probe: Option<LimitProbeSpec>,
    },
    /// Exact feasibility of the interpolation parameters.
    GnCheck {
        #[serde(default)]
        n: Vec<u32>,
        /// Regularity indices as decimals or fractions.
        #[serde(default)]
        s: Vec<String>,
        #[serde(default = "both_m")]
        m: Vec<u32>,
        #[serde(default)]
        scan: Option<ScanSpec>,
        #[serde(default = "eps0")]
        eps0: String,
        #[serde(default = "half")]
        s_star_fraction: String,
    },
    /// Residual of the truncated relaxation expansion.
    Expansion {
        taus: Vec<f64>,
        #[serde(default = "one")]
        t: f64,
        #[serde(default = "two_terms")]
        order: usize,
        #[serde(default)]
        expected_order: Option<f64>,
        #[serde(default = "tol_residual")]
        tolerance: f64,
    },
}

fn two_terms() -> usize {
    2
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Roots { .. } => "roots",
            Experiment::LinearRun { .. } => "linear-run",
            Experiment::DecayFit { .. } => "decay-fit",
            Experiment::LimitSweep { .. } => "limit-sweep",
            Experiment::LayerProbe { .. } => "layer-probe",
            Experiment::EnergyCheck { .. } => "energy-check",
            Experiment::JmgtRun { .. } => "jmgt-run",
            Experiment::GnCheck { .. } => "gn-check",
            Experiment::Expansion { .. } => "expansion",
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Reads `path` and applies `key.path=value` overrides before validation.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut value: toml::Table = toml::from_str(&text)?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let mut cfg: Config = value.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        if cfg.name.is_none() {
            cfg.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        Ok(cfg)
    }

    pub fn params(&self) -> Result<Params> {
        self.params.ok_or_else(|| Error::Config("this experiment needs a [params] section".into()))
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        self.grid.clone().ok_or_else(|| Error::Config("this experiment needs a [grid] section".into()))
    }

    pub fn data_spec(&self) -> Result<DataSpec> {
        self.data.ok_or_else(|| Error::Config("this experiment needs a [data] section".into()))
    }

    pub fn output_dir_name(&self) -> String {
        self.output.dir.clone().or_else(|| self.name.clone()).unwrap_or_else(|| self.experiment.kind().into())
    }
}

/// `a.b.c=value`, where `value` is any TOML value or a bare string.
fn apply_override(root: &mut toml::Table, text: &str) -> Result<()> {
    let (key, raw) = text.split_once('=').ok_or_else(|| Error::Config(format!("override {text:?} lacks '='")))?;
    let parsed: toml::Value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.trim().to_string()),
    };
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, path) = parts.split_last().expect("split yields one part");
    let mut table = root;
    for p in path {
        table = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override path {key:?} crosses a non-table")))?;
    }
    table.insert(last.to_string(), parsed);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROOTS: &str = r#"
[params]
tau = 0.1
delta = 1.0

[experiment]
kind = "roots"
xi = { min = 0.01, max = 100.0, points = 5 }
"#;

    #[test]
    fn minimal_roots_config() {
        let c = Config::from_toml(ROOTS).unwrap();
        assert_eq!(c.experiment.kind(), "roots");
        assert_eq!(c.params.unwrap().tau(), 0.1);
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(Config::from_toml(&ROOTS.replace("delta = 1.0", "delta = 1.0\ndelt = 2")).is_err());
        assert!(Config::from_toml(&ROOTS.replace("points = 5", "points = 5, pionts = 3")).is_err());
        assert!(Config::from_toml(&ROOTS.replace("kind = \"roots\"", "kind = \"roots\"\nsample = 3")).is_err());
        assert!(Config::from_toml(&format!("{ROOTS}\n[output]\ndri = \"x\"")).is_err());
        assert!(Config::from_toml(&ROOTS.replace("\"roots\"", "\"root\"")).is_err());
    }

    #[test]
    fn overrides_edit_nested_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.toml");
        std::fs::write(&path, ROOTS).unwrap();
        let c = Config::load(&path, &["params.tau=0.05".into(), "output.dir=elsewhere".into()]).unwrap();
        assert_eq!(c.params.unwrap().tau(), 0.05);
        assert_eq!(c.output_dir_name(), "elsewhere");
        assert_eq!(Config::load(&path, &[]).unwrap().output_dir_name(), "r");
        assert!(Config::load(&path, &["params.bogus=1".into()]).is_err());
    }

    #[test]
    fn time_grids() {
        let t: TimeGrid = toml::from_str::<toml::Table>("v = [0.0, 1.0]").unwrap()["v"].clone().try_into().unwrap();
        assert_eq!(t.values().unwrap(), vec![0.0, 1.0]);
        let g = TimeGrid::Geometric { t_min: 1.0, t_max: 100.0, points: 3, include_zero: true };
        let v = g.values().unwrap();
        assert_eq!(v.len(), 4);
        assert!((v[2] - 10.0).abs() < 1e-12);
    }
}
