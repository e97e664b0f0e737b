use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nonlinear::NonlinearEvaluator;
use super::xs::xs_keys;
use crate::error::{Error, Result};
use crate::params::Params;
use crate::propagator::{kernel::apply, ModePropagator, NormKey, StateTrajectory};
use crate::spectral::{norm, FieldTriple, NormSpec, Slot};

/// Tag attached to one-dimensional nonlinear runs.
pub const UNSUPPORTED_BY_THEOREM: &str = "UNSUPPORTED-BY-THEOREM";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JmgtOptions {
    pub dt: f64,
    pub t_end: f64,
    /// Regularity index of the tracked Sobolev norms.
    pub s: f64,
    /// Approximate number of recorded samples, geometrically spaced in the step index.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Abort when a tracked norm exceeds this multiple of its initial value.
    #[serde(default = "default_guard")]
    pub guard_factor: f64,
    /// Largest admissible sup norm of the data slots.
    #[serde(default = "default_threshold")]
    pub data_threshold: f64,
    #[serde(default)]
    pub keep_snapshots: bool,
    /// Also record `forcing:L1`, `forcing:L2` and `forcing:Hdot(s)` of the nonlinearity.
    #[serde(default)]
    pub track_forcing: bool,
}

/// Ledger names of the tracked nonlinearity norms.
pub fn forcing_keys(s: f64) -> [String; 3] {
    ["forcing:L1".into(), "forcing:L2".into(), format!("forcing:Hdot({s})")]
}

fn default_samples() -> usize {
    200
}

fn default_guard() -> f64 {
    1e3
}

fn default_threshold() -> f64 {
    0.1
}

impl JmgtOptions {
    pub fn new(dt: f64, t_end: f64, s: f64) -> Self {
        JmgtOptions {
            dt,
            t_end,
            s,
            samples: default_samples(),
            guard_factor: default_guard(),
            data_threshold: default_threshold(),
            keep_snapshots: false,
            track_forcing: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct JmgtRun {
    pub trajectory: StateTrajectory,
    pub keys: Vec<NormKey>,
    pub dt: f64,
    pub steps: usize,
    /// Step bound from the dry run.
    pub stability_bound: f64,
    pub tags: Vec<String>,
}

/// Step indices `0, ..., total`, about `count` of them, geometric in the index.
pub fn geometric_steps(total: usize, count: usize) -> Vec<usize> {
    let mut out = vec![0];
    if total == 0 {
        return out;
    }
    let count = count.max(2);
    let r = (total as f64).ln() / (count - 1) as f64;
    for i in 0..count {
        let k = ((r * i as f64).exp().round() as usize).min(total);
        if k > *out.last().expect("nonempty") {
            out.push(k);
        }
    }
    if *out.last().expect("nonempty") != total {
        out.push(total);
    }
    out
}

/// Per-mode exponential-integrator coefficients for one step.
pub(crate) struct StepTables {
    pub(crate) phi: Vec<[[Complex64; 3]; 3]>,
    pub(crate) w0: Vec<[Complex64; 3]>,
    pub(crate) w1: Vec<[Complex64; 3]>,
}

impl StepTables {
    pub(crate) fn new(params: &Params, xi: &[f64], dt: f64) -> Result<Self> {
        let rows: Vec<_> = xi
            .par_iter()
            .map(|&r| {
                let m = ModePropagator::new(params, r)?;
                let (w0, w1) = m.forcing_weights(dt)?;
                Ok((m.kernels(dt)?.matrix(), w0, w1))
            })
            .collect::<Result<_>>()?;
        let mut t = StepTables { phi: Vec::new(), w0: Vec::new(), w1: Vec::new() };
        for (p, a, b) in rows {
            t.phi.push(p);
            t.w0.push(a);
            t.w1.push(b);
        }
        Ok(t)
    }
}

fn split(modes: &[[Complex64; 3]]) -> [Vec<Complex64>; 3] {
    [0, 1, 2].map(|l| modes.iter().map(|m| m[l]).collect())
}

/// Step bound `tau / L` with `L` the largest Lipschitz estimate of the
/// nonlinearity over the data and one trial step of length `tau/10`.
pub fn stability_bound(params: &Params, data: &FieldTriple) -> Result<f64> {
    let eval = NonlinearEvaluator::new(data.grid().clone(), params.b_over_a())?;
    let trial_dt = params.tau() / 10.0;
    let tables = StepTables::new(params, data.grid().xi_abs(), trial_dt)?;
    let modes: Vec<[Complex64; 3]> = (0..data.grid().len()).map(|k| data.mode(k)).collect();
    let trial = etd2_step(&eval, &tables, &modes);
    let trial = FieldTriple::from_modes(data.grid().clone(), &trial);
    let l = eval.lipschitz_estimate(data)?.max(eval.lipschitz_estimate(&trial)?);
    Ok(if l > 0.0 { params.tau() / l } else { f64::INFINITY })
}

/// One second-order exponential time-differencing step.
pub(crate) fn etd2_step(eval: &NonlinearEvaluator, t: &StepTables, v: &[[Complex64; 3]]) -> Vec<[Complex64; 3]> {
    let [u, ut, utt] = split(v);
    let f0 = eval.eval_coeffs(&u, &ut, &utt);
    let a: Vec<[Complex64; 3]> = (0..v.len())
        .into_par_iter()
        .map(|k| {
            let lin = apply(&t.phi[k], v[k]);
            [0, 1, 2].map(|l| lin[l] + t.w0[k][l] * f0[k])
        })
        .collect();
    let [au, aut, autt] = split(&a);
    let fa = eval.eval_coeffs(&au, &aut, &autt);
    (0..v.len())
        .into_par_iter()
        .map(|k| [0, 1, 2].map(|l| a[k][l] + t.w1[k][l] * (fa[k] - f0[k])))
        .collect()
}

fn sup_norm(v: &FieldTriple) -> Result<f64> {
    Slot::ALL.iter().map(|s| norm(v.slot(*s), NormSpec::LinfBound)).try_fold(0.0f64, |m, x| Ok(m.max(x?)))
}

/// Pseudospectral exponential integrator for the nonlinear third-order equation
/// on a torus. The linear part is propagated exactly; the nonlinearity enters
/// through the forcing weights with a predictor-corrector treatment within each step.
pub fn jmgt_evolve(params: &Params, data: &FieldTriple, opts: &JmgtOptions) -> Result<JmgtRun> {
    let grid = data.grid().clone();
    if !grid.is_torus() {
        return Err(Error::Unsupported("the nonlinear solver needs the torus backend".into()));
    }
    if !(opts.t_end > 0.0 && opts.t_end.is_finite()) {
        return Err(Error::Precondition(format!("bad end time {}", opts.t_end)));
    }
    let size = sup_norm(data)?;
    if size > opts.data_threshold {
        return Err(Error::Precondition(format!(
            "data sup norm {size:.3e} exceeds the small-data threshold {:.3e}",
            opts.data_threshold
        )));
    }
    let bound = stability_bound(params, data)?;
    let limit = (params.tau() / 10.0).min(bound);
    if !(opts.dt > 0.0 && opts.dt <= limit) {
        return Err(Error::StepTooLarge { dt: opts.dt, limit });
    }
    let steps = (opts.t_end / opts.dt).round() as usize;
    if ((steps as f64) * opts.dt - opts.t_end).abs() > 1e-9 * opts.t_end {
        return Err(Error::Precondition(format!("t_end {} is not a multiple of dt {}", opts.t_end, opts.dt)));
    }
    let mut tags = Vec::new();
    if grid.dim() == 1 {
        tags.push(UNSUPPORTED_BY_THEOREM.to_string());
    }
    let keys = xs_keys(opts.s);
    let eval = NonlinearEvaluator::new(grid.clone(), params.b_over_a())?;
    let tables = StepTables::new(params, grid.xi_abs(), opts.dt)?;
    let record = geometric_steps(steps, opts.samples);

    let mut v: Vec<[Complex64; 3]> = (0..grid.len()).map(|k| data.mode(k)).collect();
    let slot_l2 = |v: &[[Complex64; 3]]| -> Result<[f64; 3]> {
        let s = FieldTriple::from_modes(grid.clone(), v);
        Ok([norm(&s.u, NormSpec::L2)?, norm(&s.u_t, NormSpec::L2)?, norm(&s.u_tt, NormSpec::L2)?])
    };
    let initial = slot_l2(&v)?;
    let floor = initial.iter().copied().fold(0.0, f64::max);
    let limits = initial.map(|x| opts.guard_factor * if x > 0.0 { x } else { floor });
    let mut ledger_initial: Option<BTreeMap<String, f64>> = None;

    let mut traj = StateTrajectory { times: Vec::new(), snapshots: Vec::new(), ledger: Vec::new() };
    let mut next = 0;
    for step in 0..=steps {
        if step > 0 {
            v = etd2_step(&eval, &tables, &v);
            let t = step as f64 * opts.dt;
            let now = slot_l2(&v)?;
            for (x, lim) in now.iter().zip(&limits) {
                if !x.is_finite() || (*lim > 0.0 && x > lim) {
                    return Err(Error::BlowUp { t, norm: *x, limit: *lim });
                }
            }
        }
        if record.get(next) == Some(&step) {
            next += 1;
            let state = FieldTriple::from_modes(grid.clone(), &v);
            let mut row = crate::propagator::evolve::ledger_row(&state, &keys)?;
            let t = step as f64 * opts.dt;
            if let Some(first) = &ledger_initial {
                for (k, x) in &row {
                    let base = first[k];
                    if base > 0.0 && *x > opts.guard_factor * base {
                        return Err(Error::BlowUp { t, norm: *x, limit: opts.guard_factor * base });
                    }
                }
            } else {
                ledger_initial = Some(row.clone());
            }
            if opts.track_forcing {
                row.extend(forcing_keys(opts.s).into_iter().zip(eval.forcing_norms(&state, opts.s)?));
            }
            traj.times.push(t);
            traj.ledger.push(row);
            if opts.keep_snapshots {
                traj.snapshots.push(state);
            }
        }
    }
    Ok(JmgtRun { trajectory: traj, keys, dt: opts.dt, steps, stability_bound: bound, tags })
}
