use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{compatibility_defect, loglog_slope};
use crate::error::{Error, Result};
use crate::params::Params;
use crate::propagator::{geometric_times, kuznetsov_state_at, GridPropagator};
use crate::spectral::{energy_norm, norm, FieldTriple, NormSpec};

/// Norm in which `psi^tau - phi` is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitNorm {
    L2,
    /// `||u||_{H^1} + ||u_t||_2` in the combined form `(||u||^2 + ||grad u||^2 + ||u_t||^2)^{1/2}`.
    Energy,
    /// Sup-norm bound; the Fourier `L1` norm on the radial backend.
    LinfBound,
}

impl LimitNorm {
    fn measure(self, diff: &FieldTriple) -> Result<f64> {
        match self {
            LimitNorm::L2 => norm(&diff.u, NormSpec::L2),
            LimitNorm::Energy => energy_norm(&diff.u, &diff.u_t),
            LimitNorm::LinfBound => norm(&diff.u, NormSpec::LinfBound),
        }
    }
}

impl fmt::Display for LimitNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LimitNorm::L2 => "L2",
            LimitNorm::Energy => "energy",
            LimitNorm::LinfBound => "Linf",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepOptions {
    pub t_end: f64,
    /// Number of sample times; at least 200.
    #[serde(default = "default_points")]
    pub points: usize,
    /// First positive sample time of the geometric grid.
    #[serde(default = "default_t_min")]
    pub t_min: f64,
    #[serde(default = "default_norms")]
    pub norms: Vec<LimitNorm>,
    /// Permit data violating the compatibility condition.
    #[serde(default)]
    pub allow_incompatible: bool,
}

fn default_points() -> usize {
    400
}

fn default_t_min() -> f64 {
    1e-3
}

fn default_norms() -> Vec<LimitNorm> {
    vec![LimitNorm::L2, LimitNorm::Energy, LimitNorm::LinfBound]
}

impl SweepOptions {
    pub fn new(t_end: f64) -> Self {
        SweepOptions {
            t_end,
            points: default_points(),
            t_min: default_t_min(),
            norms: default_norms(),
            allow_incompatible: false,
        }
    }

    /// `0` followed by a geometric grid on `[t_min, t_end]`.
    pub fn times(&self) -> Vec<f64> {
        let mut t = vec![0.0];
        t.extend(geometric_times(self.t_min, self.t_end, self.points - 1));
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub tau: f64,
    /// Sup over the sample times, one per requested norm.
    pub sup_diff: Vec<f64>,
    /// Time at which each sup was attained.
    pub argmax: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub delta: f64,
    pub norms: Vec<LimitNorm>,
    pub times: Vec<f64>,
    pub entries: Vec<SweepEntry>,
    /// Fitted `p` in `sup_diff ~ tau^p`, per norm.
    pub orders: Vec<Option<f64>>,
    /// Per norm: the sup difference never increases as `tau` decreases.
    pub monotone: Vec<bool>,
    pub compatibility_defect: f64,
}

impl SweepReport {
    pub fn order(&self, which: LimitNorm) -> Option<f64> {
        let i = self.norms.iter().position(|n| *n == which)?;
        self.orders[i]
    }

    pub fn series(&self, which: LimitNorm) -> Option<Vec<f64>> {
        let i = self.norms.iter().position(|n| *n == which)?;
        Some(self.entries.iter().map(|e| e.sup_diff[i]).collect())
    }
}

/// Sup-in-time distance between the third-order solution and the viscous wave
/// solution from the same `(psi_0, psi_1)`, for each `tau` in `taus`.
pub fn singular_limit_sweep(data: &FieldTriple, delta: f64, taus: &[f64], opts: &SweepOptions) -> Result<SweepReport> {
    if opts.points < 200 {
        return Err(Error::Precondition(format!("need at least 200 sample times, got {}", opts.points)));
    }
    if !(opts.t_min > 0.0 && opts.t_end > opts.t_min) {
        return Err(Error::Precondition(format!("bad time window [{}, {}]", opts.t_min, opts.t_end)));
    }
    if taus.is_empty() || taus.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Precondition("tau list must be nonempty and decreasing".into()));
    }
    if opts.norms.is_empty() {
        return Err(Error::Precondition("no norms requested".into()));
    }
    let params: Vec<Params> = taus.iter().map(|&t| Params::dissipative(t, delta)).collect::<Result<_>>()?;
    let defect = norm(&compatibility_defect(data, delta)?, NormSpec::L2)?;
    let scale = norm(&data.u_tt, NormSpec::L2)?.max(norm(&data.u, NormSpec::L2)?);
    if defect > 1e-12 * scale.max(f64::MIN_POSITIVE) && !opts.allow_incompatible {
        return Err(Error::Precondition(format!(
            "data violate the compatibility condition (defect {defect:.3e}); set allow_incompatible to override"
        )));
    }
    let times = opts.times();
    let phi: Vec<FieldTriple> = times.iter().map(|&t| kuznetsov_state_at(delta, data, t)).collect::<Result<_>>()?;
    let entries: Vec<SweepEntry> = params
        .par_iter()
        .map(|p| {
            let prop = GridPropagator::new(p, data.grid().clone())?;
            let mut sup = vec![0.0; opts.norms.len()];
            let mut argmax = vec![0.0; opts.norms.len()];
            for (t, reference) in times.iter().zip(&phi) {
                let diff = prop.state_at(data, *t)?.sub(reference)?;
                for (k, which) in opts.norms.iter().enumerate() {
                    let v = which.measure(&diff)?;
                    if v > sup[k] {
                        sup[k] = v;
                        argmax[k] = *t;
                    }
                }
            }
            Ok(SweepEntry { tau: p.tau(), sup_diff: sup, argmax })
        })
        .collect::<Result<_>>()?;
    let orders = (0..opts.norms.len())
        .map(|k| {
            let y: Vec<f64> = entries.iter().map(|e| e.sup_diff[k]).collect();
            loglog_slope(taus, &y)
        })
        .collect();
    let monotone = (0..opts.norms.len())
        .map(|k| entries.windows(2).all(|w| w[1].sup_diff[k] <= w[0].sup_diff[k]))
        .collect();
    Ok(SweepReport {
        delta,
        norms: opts.norms.clone(),
        times,
        entries,
        orders,
        monotone,
        compatibility_defect: defect,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::spectral::{synthesize_data, DataSpec, Grid, Profile};

    fn data(compatible: bool) -> FieldTriple {
        let g = Arc::new(Grid::radial_composite(1, 14.0, 14, 16).unwrap());
        let p = Params::new(0.1, 1.0).unwrap();
        let spec = DataSpec::gaussian([1.0, 0.0, 0.0], 0.5);
        let spec = if compatible {
            spec.compatible()
        } else {
            spec.incompatible(Profile::Gaussian { amplitude: 1.0, width: 1.0 })
        };
        synthesize_data(&g, &p, &spec, 0).unwrap()
    }

    #[test]
    fn repeated_tau_gives_identical_entries() {
        let r = singular_limit_sweep(&data(true), 1.0, &[0.05, 0.05], &SweepOptions::new(5.0)).unwrap();
        assert_eq!(r.entries[0].sup_diff, r.entries[1].sup_diff);
        assert!(r.orders.iter().all(Option::is_none));
    }

    #[test]
    fn incompatible_data_need_the_override() {
        let d = data(false);
        assert!(singular_limit_sweep(&d, 1.0, &[0.1, 0.05], &SweepOptions::new(5.0)).is_err());
        let mut o = SweepOptions::new(5.0);
        o.allow_incompatible = true;
        assert!(singular_limit_sweep(&d, 1.0, &[0.1, 0.05], &o).is_ok());
    }

    #[test]
    fn guards() {
        let d = data(true);
        let mut o = SweepOptions::new(5.0);
        o.points = 50;
        assert!(singular_limit_sweep(&d, 1.0, &[0.1, 0.05], &o).is_err());
        assert!(singular_limit_sweep(&d, 1.0, &[0.05, 0.1], &SweepOptions::new(5.0)).is_err());
        assert!(singular_limit_sweep(&d, 1.0, &[1.5], &SweepOptions::new(5.0)).is_err());
    }

    #[test]
    fn one_dimensional_sweep_converges_linearly() {
        let r = singular_limit_sweep(&data(true), 1.0, &[0.1, 0.05, 0.025, 0.0125], &SweepOptions::new(40.0)).unwrap();
        let p = r.order(LimitNorm::L2).unwrap();
        assert!((p - 1.0).abs() <= 0.1, "order {p}");
        assert!(r.monotone.iter().all(|m| *m));
    }
}
