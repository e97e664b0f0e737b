use serde::{Deserialize, Serialize};

use crate::decay::dn_coefficient;
use crate::error::{Error, Result};
use crate::propagator::{NormKey, StateTrajectory};
use crate::spectral::{NormSpec, Slot};

/// Time weights of the evolution-space norm at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XsWeights {
    pub n: usize,
    pub s: f64,
    pub t: f64,
    /// `1 / D_n(t)` on `||psi||`.
    pub solution: f64,
    /// `(1+t)^{(l-1)/2 + n/4}` on `||d_t^l psi||`, `l = 1, 2`.
    pub time_derivative: [f64; 2],
    /// `(1+t)^{1/2 + s/2 + n/4}` on `|| |D|^{s+2-l} d_t^l psi ||`, `l = 0, 1, 2`.
    pub sobolev: f64,
}

impl XsWeights {
    pub fn at(n: usize, s: f64, t: f64) -> Self {
        let nf = n as f64;
        let tw = |l: f64| (1.0 + t).powf((l - 1.0) / 2.0 + nf / 4.0);
        XsWeights {
            n,
            s,
            t,
            solution: 1.0 / dn_coefficient(n, t),
            time_derivative: [tw(1.0), tw(2.0)],
            sobolev: (1.0 + t).powf(0.5 + s / 2.0 + nf / 4.0),
        }
    }
}

/// The six norms entering the evolution-space norm with regularity `s`.
pub fn xs_keys(s: f64) -> Vec<NormKey> {
    vec![
        NormKey::new(Slot::Psi, NormSpec::L2),
        NormKey::new(Slot::PsiT, NormSpec::L2),
        NormKey::new(Slot::PsiTt, NormSpec::L2),
        NormKey::new(Slot::Psi, NormSpec::Hdot(s + 2.0)),
        NormKey::new(Slot::PsiT, NormSpec::Hdot(s + 1.0)),
        NormKey::new(Slot::PsiTt, NormSpec::Hdot(s)),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XsSeries {
    pub times: Vec<f64>,
    /// Weighted sum at each time.
    pub values: Vec<f64>,
    /// Running supremum of `values`, the evolution-space norm up to each time.
    pub running_sup: Vec<f64>,
    /// Set when `s <= n/2 - 1`, outside the range of the global existence result.
    pub warning: Option<String>,
}

impl XsSeries {
    /// `S(t_end) / S(t_end / 10)` for the running sup `S`.
    pub fn last_decade_ratio(&self) -> Option<f64> {
        let t_end = *self.times.last()?;
        let i = self.times.iter().rposition(|t| *t <= t_end / 10.0)?;
        let base = self.running_sup[i];
        (base > 0.0).then(|| self.running_sup.last().copied().unwrap_or(0.0) / base)
    }
}

/// Weighted sum of the six evolution-space norms along a trajectory in dimension `n`.
pub fn xs_norm(traj: &StateTrajectory, n: usize, s: f64) -> Result<XsSeries> {
    let keys = xs_keys(s);
    let series: Vec<Vec<f64>> = keys
        .iter()
        .map(|k| traj.series(k).ok_or_else(|| Error::Precondition(format!("trajectory lacks norm {k}"))))
        .collect::<Result<_>>()?;
    let warning = (s <= n as f64 / 2.0 - 1.0)
        .then(|| format!("s = {s} <= n/2 - 1 = {}: outside the small-data existence hypotheses", n as f64 / 2.0 - 1.0));
    let mut values = Vec::with_capacity(traj.times.len());
    for (i, &t) in traj.times.iter().enumerate() {
        let w = XsWeights::at(n, s, t);
        let v = w.solution * series[0][i]
            + w.time_derivative[0] * series[1][i]
            + w.time_derivative[1] * series[2][i]
            + w.sobolev * (series[3][i] + series[4][i] + series[5][i]);
        values.push(v);
    }
    let running_sup = values
        .iter()
        .scan(0.0f64, |m, v| {
            *m = m.max(*v);
            Some(*m)
        })
        .collect();
    Ok(XsSeries { times: traj.times.clone(), values, running_sup, warning })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    #[test]
    fn weights_at_the_origin_are_one() {
        let w = XsWeights::at(3, 1.0, 0.0);
        assert_eq!(w.time_derivative, [1.0, 1.0]);
        assert_eq!(w.sobolev, 1.0);
        assert_eq!(w.solution, 1.0);
        let w = XsWeights::at(2, 0.6, 3.0);
        assert!((w.time_derivative[0] - 4f64.powf(0.5)).abs() < 1e-15);
        assert!((w.time_derivative[1] - 4f64.powf(1.0)).abs() < 1e-15);
        assert!((w.sobolev - 4f64.powf(1.3)).abs() < 1e-12);
        assert!(w.solution > 0.0);
    }

    #[test]
    fn zero_trajectory_has_zero_norm() {
        let row: BTreeMap<String, f64> = xs_keys(0.6).iter().chain(&xs_keys(0.4)).map(|k| (k.to_string(), 0.0)).collect();
        let traj = StateTrajectory { times: vec![0.0, 1.0, 2.0], snapshots: Vec::new(), ledger: vec![row; 3] };
        let x = xs_norm(&traj, 2, 0.6).unwrap();
        assert!(x.values.iter().chain(&x.running_sup).all(|v| *v == 0.0));
        assert!(x.warning.is_none());
        assert!(xs_norm(&traj, 3, 0.4).unwrap().warning.is_some());
    }
}
