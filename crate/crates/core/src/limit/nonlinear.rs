use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::loglog_slope;
use crate::error::{Error, Result};
use crate::jmgt::{jmgt_evolve, kuznetsov_nonlinear_evolve, nonlinear_compatible_second, JmgtOptions};
use crate::params::Params;
use crate::spectral::{norm, FieldTriple, NormSpec};

/// Tag carried by every nonlinear limit report; the observed order has no reference value.
pub const EXPLORATORY: &str = "EXPLORATORY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearProbeOptions {
    pub t_end: f64,
    /// Common step; defaults to a tenth of the smallest relaxation time.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_threshold")]
    pub data_threshold: f64,
    /// Replace `psi_2` by the value the nonlinear viscous wave equation forces at `t = 0`.
    #[serde(default = "yes")]
    pub match_second: bool,
}

fn default_samples() -> usize {
    60
}

fn default_threshold() -> f64 {
    0.1
}

fn yes() -> bool {
    true
}

impl NonlinearProbeOptions {
    pub fn new(t_end: f64) -> Self {
        NonlinearProbeOptions {
            t_end,
            dt: None,
            samples: default_samples(),
            data_threshold: default_threshold(),
            match_second: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearProbeReport {
    pub tag: String,
    pub delta: f64,
    pub dt: f64,
    pub taus: Vec<f64>,
    /// `sup_t ||psi^tau - phi||_2` over the recorded times.
    pub sup_diff: Vec<f64>,
    pub observed_order: Option<f64>,
}

/// Nonlinear counterpart of the linear relaxation sweep: third-order solutions
/// against the nonlinear viscous wave equation, same integrator and step.
pub fn nonlinear_limit_probe(
    params: &Params,
    data: &FieldTriple,
    taus: &[f64],
    opts: &NonlinearProbeOptions,
) -> Result<NonlinearProbeReport> {
    let delta = params.delta();
    let b = params.b_over_a();
    if taus.is_empty() || taus.iter().any(|t| !(*t > 0.0 && *t < delta)) {
        return Err(Error::Precondition("relaxation times must satisfy 0 < tau < delta".into()));
    }
    let tau_min = taus.iter().copied().fold(f64::INFINITY, f64::min);
    let dt = opts.dt.unwrap_or(tau_min / 10.0);
    let steps = (opts.t_end / dt).round() as usize;
    let data = if opts.match_second { nonlinear_compatible_second(data, delta, b)? } else { data.clone() };
    let limit = kuznetsov_nonlinear_evolve(delta, b, &data, dt, steps, opts.samples)?;
    let sup_diff = taus
        .par_iter()
        .map(|&tau| {
            let p = params.with_tau(tau)?;
            let mut o = JmgtOptions::new(dt, opts.t_end, 0.0);
            o.samples = opts.samples;
            o.data_threshold = opts.data_threshold;
            o.keep_snapshots = true;
            let run = jmgt_evolve(&p, &data, &o)?;
            run.trajectory
                .snapshots
                .iter()
                .zip(&limit.snapshots)
                .try_fold(0.0f64, |m, (a, b)| Ok(m.max(norm(&a.u.sub(&b.u)?, NormSpec::L2)?)))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(NonlinearProbeReport {
        tag: EXPLORATORY.into(),
        delta,
        dt,
        taus: taus.to_vec(),
        observed_order: loglog_slope(taus, &sup_diff),
        sup_diff,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::spectral::{synthesize_data, DataSpec, Grid};

    fn small(eps: f64) -> (Params, FieldTriple) {
        let p = Params::dissipative(0.1, 1.0).unwrap().with_b_over_a(2.0);
        let g = Arc::new(Grid::torus(2, 16, 2.0 * PI).unwrap());
        let d = synthesize_data(&g, &p, &DataSpec::gaussian([1.0, 0.5, 0.0], 0.5).compatible(), 0).unwrap();
        let s = norm(&d.u, NormSpec::LinfBound).unwrap();
        (p, d.scale(eps / s))
    }

    #[test]
    fn zero_data_give_zero_difference() {
        let (p, d) = small(0.0);
        let r = nonlinear_limit_probe(&p, &d, &[0.1, 0.05], &NonlinearProbeOptions::new(1.0)).unwrap();
        assert_eq!(r.tag, EXPLORATORY);
        assert!(r.sup_diff.iter().all(|x| *x == 0.0));
        assert!(r.observed_order.is_none());
    }

    #[test]
    fn small_data_report_an_order() {
        let (p, d) = small(1e-3);
        let r = nonlinear_limit_probe(&p, &d, &[0.1, 0.05, 0.025], &NonlinearProbeOptions::new(2.0)).unwrap();
        let order = r.observed_order.unwrap();
        assert!(order.is_finite() && order > 0.5, "order {order}");
    }

    #[test]
    fn large_data_are_rejected() {
        let (p, d) = small(1.0);
        assert!(nonlinear_limit_probe(&p, &d, &[0.1], &NonlinearProbeOptions::new(1.0)).is_err());
        assert!(nonlinear_limit_probe(&p, &d, &[1.5], &NonlinearProbeOptions::new(1.0)).is_err());
    }
}
