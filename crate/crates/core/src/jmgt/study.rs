use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::integrator::{forcing_keys, jmgt_evolve, JmgtOptions, JmgtRun};
use super::nonlinear::NonlinearEvaluator;
use super::xs::{xs_keys, xs_norm};
use crate::decay::{expected_rate, fit_rate, window, Estimate, FitModel, RateFit};
use crate::error::{Error, Result};
use crate::gn::{decay_exponent_audit, GnOptions, Rational};
use crate::params::Params;
use crate::propagator::{mgt_evolve, Recording};
use crate::spectral::{norm, synthesize_data, DataSpec, FieldTriple, Grid, NormSpec, Slot};

/// Largest deviation of a fitted exponent from the predicted one.
pub const EXPONENT_TOLERANCE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmallDataOptions {
    /// Data shape, multiplied by each epsilon.
    pub shape: DataSpec,
    #[serde(default)]
    pub seed: u64,
    pub s: f64,
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Start of the fit window; the default keeps 1.6 decades of `1+t`.
    #[serde(default)]
    pub fit_from: Option<f64>,
    #[serde(default = "default_threshold")]
    pub data_threshold: f64,
    #[serde(default = "default_guard")]
    pub guard_factor: f64,
    /// Largest log-space residual for the logarithmic law of the solution in two dimensions.
    #[serde(default = "default_loghalf")]
    pub loghalf_tolerance: f64,
}

fn default_samples() -> usize {
    200
}

fn default_threshold() -> f64 {
    0.1
}

fn default_guard() -> f64 {
    1e3
}

fn default_loghalf() -> f64 {
    0.15
}

impl SmallDataOptions {
    pub fn new(shape: DataSpec, s: f64, t_end: f64, dt: f64) -> Self {
        SmallDataOptions {
            shape,
            seed: 0,
            s,
            t_end,
            dt,
            samples: default_samples(),
            fit_from: None,
            data_threshold: default_threshold(),
            guard_factor: default_guard(),
            loghalf_tolerance: default_loghalf(),
        }
    }

    pub fn fit_start(&self) -> f64 {
        self.fit_from.unwrap_or((1.0 + self.t_end) / 10f64.powf(1.6) - 1.0).max(0.0)
    }

    pub fn jmgt(&self) -> JmgtOptions {
        JmgtOptions {
            dt: self.dt,
            t_end: self.t_end,
            s: self.s,
            samples: self.samples,
            guard_factor: self.guard_factor,
            data_threshold: self.data_threshold,
            keep_snapshots: false,
            track_forcing: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCheck {
    pub norm: String,
    pub expected: f64,
    pub fit: RateFit,
    pub within: bool,
}

/// Fitted decay of one nonlinearity norm; `no_slower` when it is at most
/// [`EXPONENT_TOLERANCE`] above the audited exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcingCheck {
    pub norm: String,
    pub audited: f64,
    pub fit: RateFit,
    pub no_slower: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum EntryStatus {
    Completed,
    /// All data vanish; every norm stays zero.
    ZeroData,
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallDataEntry {
    pub epsilon: f64,
    pub status: EntryStatus,
    /// Running evolution-space sup over the last decade, `S(t_end) / S(t_end/10)`.
    pub xs_ratio: Option<f64>,
    pub bounded: Option<bool>,
    pub rates: Vec<RateCheck>,
    pub solution_fit: Option<RateFit>,
    pub solution_ok: Option<bool>,
    /// Measured decay of the nonlinearity against the audited exponents.
    pub forcing_rates: Vec<ForcingCheck>,
    pub tags: Vec<String>,
    pub warning: Option<String>,
    /// Recorded norms; absent for zero data and failed runs.
    #[serde(skip)]
    pub series: Option<StudySeries>,
}

/// Norm histories of one completed run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StudySeries {
    pub times: Vec<f64>,
    /// Ledger columns in key order.
    pub columns: Vec<(String, Vec<f64>)>,
    pub xs: Vec<f64>,
    pub xs_running_sup: Vec<f64>,
}

impl SmallDataEntry {
    fn failed(epsilon: f64, reason: String) -> Self {
        SmallDataEntry {
            epsilon,
            status: EntryStatus::Failed { reason },
            xs_ratio: None,
            bounded: None,
            rates: Vec::new(),
            solution_fit: None,
            solution_ok: None,
            forcing_rates: Vec::new(),
            tags: Vec::new(),
            warning: None,
            series: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == EntryStatus::ZeroData
            || (self.status == EntryStatus::Completed
                && self.bounded == Some(true)
                && self.rates.iter().all(|r| r.within)
                && self.solution_ok != Some(false))
    }
}

/// Bound on the running evolution-space sup over the last decade.
pub const BOUNDED_RATIO: f64 = 1.1;

/// Runs the nonlinear solver for each data size and checks boundedness and decay rates.
pub fn smalldata_study(
    params: &Params,
    grid: &Arc<Grid>,
    epsilons: &[f64],
    opts: &SmallDataOptions,
) -> Result<Vec<SmallDataEntry>> {
    let n = grid.dim();
    if !(n == 2 || n == 3) || !grid.is_torus() {
        return Err(Error::Precondition("the small-data study runs on two- or three-dimensional tori".into()));
    }
    if opts.s <= n as f64 / 2.0 - 1.0 {
        return Err(Error::Precondition(format!("need s > n/2 - 1, got s = {}", opts.s)));
    }
    epsilons
        .iter()
        .map(|&eps| {
            let data = synthesize_data(grid, params, &opts.shape.scaled(eps), opts.seed)?;
            if eps == 0.0 {
                let mut e = SmallDataEntry::failed(eps, String::new());
                e.status = EntryStatus::ZeroData;
                return Ok(e);
            }
            match jmgt_evolve(params, &data, &opts.jmgt()) {
                Ok(run) => analyse(eps, &run, n, opts),
                Err(e) => Ok(SmallDataEntry::failed(eps, e.to_string())),
            }
        })
        .collect()
}

fn analyse(eps: f64, run: &JmgtRun, n: usize, opts: &SmallDataOptions) -> Result<SmallDataEntry> {
    let traj = &run.trajectory;
    let xs = xs_norm(traj, n, opts.s)?;
    let xs_ratio = xs.last_decade_ratio();
    let lo = opts.fit_start();
    let keys = xs_keys(opts.s);
    let fit_key = |i: usize, model| -> Result<RateFit> {
        let y = traj.series(&keys[i]).expect("recorded key");
        let (t, y) = window(&traj.times, &y, lo, opts.t_end);
        fit_rate(&t, &y, model)
    };
    let mut rates = Vec::new();
    for (i, est, l) in [
        (1, Estimate::NonlinearTimeDerivative, 1),
        (2, Estimate::NonlinearTimeDerivative, 2),
        (3, Estimate::NonlinearSobolev, 0),
        (4, Estimate::NonlinearSobolev, 1),
        (5, Estimate::NonlinearSobolev, 2),
    ] {
        let expected = expected_rate(n, est, l, opts.s)?.as_power().expect("power law");
        let fit = fit_key(i, FitModel::Power)?;
        rates.push(RateCheck {
            norm: keys[i].to_string(),
            expected,
            within: (fit.exponent_or_rate - expected).abs() <= EXPONENT_TOLERANCE,
            fit,
        });
    }
    let solution = expected_rate(n, Estimate::NonlinearSolution, 0, opts.s)?;
    let (solution_fit, solution_ok) = match solution.as_power() {
        None => {
            let f = fit_key(0, FitModel::LogHalf)?;
            let ok = f.rms_residual < opts.loghalf_tolerance;
            (f, ok)
        }
        Some(p) => {
            let f = fit_key(0, FitModel::Power)?;
            let ok = (f.exponent_or_rate - p).abs() <= EXPONENT_TOLERANCE;
            (f, ok)
        }
    };
    let s_exact: Rational = opts.s.to_string().parse()?;
    let audit = decay_exponent_audit(n as u32, s_exact.0, &GnOptions::default())?;
    let mut forcing_rates = Vec::new();
    for (key, row) in forcing_keys(opts.s).iter().zip(&audit) {
        let y: Vec<f64> = traj.ledger.iter().map(|r| r[key]).collect();
        let (t, y) = window(&traj.times, &y, lo, opts.t_end);
        let fit = fit_rate(&t, &y, FitModel::Power)?;
        forcing_rates.push(ForcingCheck {
            norm: key.clone(),
            audited: row.value,
            no_slower: fit.exponent_or_rate <= row.value + EXPONENT_TOLERANCE,
            fit,
        });
    }
    Ok(SmallDataEntry {
        epsilon: eps,
        status: EntryStatus::Completed,
        bounded: xs_ratio.map(|r| r < BOUNDED_RATIO),
        xs_ratio,
        rates,
        solution_fit: Some(solution_fit),
        solution_ok: Some(solution_ok),
        forcing_rates,
        tags: run.tags.clone(),
        series: Some(StudySeries {
            times: traj.times.clone(),
            columns: traj
                .ledger
                .first()
                .map(|row| row.keys().map(|k| (k.clone(), traj.ledger.iter().map(|r| r[k]).collect())).collect())
                .unwrap_or_default(),
            xs: xs.values,
            xs_running_sup: xs.running_sup,
        }),
        warning: xs.warning,
    })
}

/// Distance at `t_end` between the nonlinear and the linear solution from the same data,
/// summed over the `L2` norms of the three slots.
pub fn nonlinear_deviation(params: &Params, data: &FieldTriple, opts: &JmgtOptions) -> Result<f64> {
    let mut o = opts.clone();
    o.samples = 2;
    o.keep_snapshots = true;
    o.track_forcing = false;
    let run = jmgt_evolve(params, data, &o)?;
    let last = run.trajectory.snapshots.last().ok_or_else(|| Error::InsufficientData("no snapshot".into()))?;
    let lin = mgt_evolve(params, data, &[o.t_end], &Recording::default().with_snapshots())?;
    let diff = last.sub(&lin.snapshots[0])?;
    Slot::ALL.iter().try_fold(0.0, |acc, s| Ok(acc + norm(diff.slot(*s), NormSpec::L2)?))
}

/// Observed `p` in `deviation ~ eps^p` from two data sizes of the same shape.
pub fn epsilon_order(
    params: &Params,
    grid: &Arc<Grid>,
    shape: &DataSpec,
    seed: u64,
    epsilons: [f64; 2],
    opts: &JmgtOptions,
) -> Result<(f64, [f64; 2])> {
    if !(epsilons[0] > 0.0 && epsilons[1] > 0.0 && epsilons[0] != epsilons[1]) {
        return Err(Error::Precondition("need two distinct positive data sizes".into()));
    }
    let mut dev = [0.0; 2];
    for (d, &eps) in dev.iter_mut().zip(&epsilons) {
        let data = synthesize_data(grid, params, &shape.scaled(eps), seed)?;
        *d = nonlinear_deviation(params, &data, opts)?;
    }
    Ok(((dev[0] / dev[1]).ln() / (epsilons[0] / epsilons[1]).ln(), dev))
}

fn state_norm(v: &FieldTriple, s: f64) -> Result<f64> {
    Slot::ALL.iter().try_fold(0.0, |acc, slot| {
        let f = v.slot(*slot);
        let top = s + 2.0 - slot.order() as f64;
        Ok(acc + norm(f, NormSpec::L2)? + norm(f, NormSpec::Hdot(top))?)
    })
}

/// `||f(a) - f(b)||_2 / (|a - b| (|a| + |b|))` with `|.|` the sum over slots of
/// `L2 + Hdot(s + 2 - l)` norms, the empirical constant of the contraction estimate.
pub fn contraction_constant(eval: &NonlinearEvaluator, a: &FieldTriple, b: &FieldTriple, s: f64) -> Result<f64> {
    let num = norm(&eval.eval(a)?.sub(&eval.eval(b)?)?, NormSpec::L2)?;
    let den = state_norm(&a.sub(b)?, s)? * (state_norm(a, s)? + state_norm(b, s)?);
    if den == 0.0 {
        return Err(Error::Precondition("coincident or zero states".into()));
    }
    Ok(num / den)
}
