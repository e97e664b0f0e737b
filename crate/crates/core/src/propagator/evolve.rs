//! Whole-field linear evolution and trajectories with norm ledgers.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::ModePropagator;
use super::kuznetsov::kuznetsov_state;
use crate::error::{Error, Result};
use crate::params::Params;
use crate::spectral::{norm, FieldTriple, Grid, NormSpec, Slot};

/// A norm applied to one time derivative of the solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormKey {
    pub slot: Slot,
    pub spec: NormSpec,
}

impl NormKey {
    pub fn new(slot: Slot, spec: NormSpec) -> Self {
        NormKey { slot, spec }
    }
}

impl fmt::Display for NormKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.slot.name(), self.spec)
    }
}

impl std::str::FromStr for NormKey {
    type Err = Error;

    /// Parses the [`fmt::Display`] form, e.g. `psi_t:L2` or `psi:Hdot(2.5)`.
    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad norm key {text:?}; expected e.g. psi_t:L2 or psi:Hdot(1.5)"));
        let (slot, spec) = text.trim().split_once(':').ok_or_else(bad)?;
        let slot = Slot::ALL.into_iter().find(|s| s.name() == slot.trim()).ok_or_else(bad)?;
        let spec = match spec.trim() {
            "L2" => NormSpec::L2,
            "Linf" => NormSpec::LinfBound,
            "L1F" => NormSpec::L1Fourier,
            other => {
                let inner = other.strip_prefix("Hdot(").and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
                NormSpec::Hdot(inner.trim().parse().map_err(|_| bad())?)
            }
        };
        Ok(NormKey { slot, spec })
    }
}

/// Solution samples with per-time norms.
#[derive(Debug, Clone)]
pub struct StateTrajectory {
    pub times: Vec<f64>,
    /// Empty unless snapshots were requested.
    pub snapshots: Vec<FieldTriple>,
    pub ledger: Vec<BTreeMap<String, f64>>,
}

impl StateTrajectory {
    /// One norm over time; `None` if the key was not recorded.
    pub fn series(&self, key: &NormKey) -> Option<Vec<f64>> {
        let name = key.to_string();
        self.ledger.iter().map(|row| row.get(&name).copied()).collect()
    }
}

/// What to keep while evolving.
#[derive(Debug, Clone, Default)]
pub struct Recording {
    pub norms: Vec<NormKey>,
    pub keep_snapshots: bool,
}

impl Recording {
    pub fn norms(norms: Vec<NormKey>) -> Self {
        Recording { norms, keep_snapshots: false }
    }

    pub fn with_snapshots(mut self) -> Self {
        self.keep_snapshots = true;
        self
    }
}

pub(crate) fn ledger_row(state: &FieldTriple, keys: &[NormKey]) -> Result<BTreeMap<String, f64>> {
    keys.iter().map(|k| Ok((k.to_string(), norm(state.slot(k.slot), k.spec)?))).collect()
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::Precondition("output times must be finite and nonnegative".into()));
    }
    Ok(())
}

/// Per-mode propagators for a whole grid.
#[derive(Debug, Clone)]
pub struct GridPropagator {
    grid: Arc<Grid>,
    modes: Vec<ModePropagator>,
}

impl GridPropagator {
    pub fn new(params: &Params, grid: Arc<Grid>) -> Result<Self> {
        let modes = grid
            .xi_abs()
            .par_iter()
            .map(|&xi| ModePropagator::new(params, xi))
            .collect::<Result<Vec<_>>>()?;
        Ok(GridPropagator { grid, modes })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn modes(&self) -> &[ModePropagator] {
        &self.modes
    }

    pub fn degenerate_count(&self) -> usize {
        self.modes.iter().filter(|m| m.is_degenerate()).count()
    }

    /// Exact state at time `t` from initial data.
    pub fn state_at(&self, data: &FieldTriple, t: f64) -> Result<FieldTriple> {
        self.grid.ensure_same(data.grid())?;
        let modes: Vec<[Complex64; 3]> = self
            .modes
            .par_iter()
            .enumerate()
            .map(|(k, m)| m.apply(t, data.mode(k)))
            .collect::<Result<_>>()?;
        Ok(FieldTriple::from_modes(self.grid.clone(), &modes))
    }
}

/// Linear third-order evolution sampled at `times` (each evaluated directly from the data).
pub fn mgt_evolve(params: &Params, data: &FieldTriple, times: &[f64], rec: &Recording) -> Result<StateTrajectory> {
    check_times(times)?;
    let prop = GridPropagator::new(params, data.grid().clone())?;
    let mut out = StateTrajectory { times: times.to_vec(), snapshots: Vec::new(), ledger: Vec::new() };
    for &t in times {
        let s = prop.state_at(data, t)?;
        out.ledger.push(ledger_row(&s, &rec.norms)?);
        if rec.keep_snapshots {
            out.snapshots.push(s);
        }
    }
    Ok(out)
}

/// Exact state of the viscous wave equation at time `t` from `(u, u_t)`.
pub fn kuznetsov_state_at(delta: f64, data: &FieldTriple, t: f64) -> Result<FieldTriple> {
    let grid = data.grid().clone();
    let xi = grid.xi_abs();
    let modes: Vec<[Complex64; 3]> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let m = data.mode(k);
            kuznetsov_state(delta, xi[k], t, [m[0], m[1]])
        })
        .collect();
    Ok(FieldTriple::from_modes(grid, &modes))
}

/// Viscous wave evolution; only `u` and `u_t` of the data are used.
pub fn kuznetsov_evolve(
    params: &Params,
    data: &FieldTriple,
    times: &[f64],
    rec: &Recording,
) -> Result<StateTrajectory> {
    check_times(times)?;
    if !(params.delta() > 0.0) {
        return Err(Error::Precondition("viscous wave evolution needs delta > 0".into()));
    }
    let mut out = StateTrajectory { times: times.to_vec(), snapshots: Vec::new(), ledger: Vec::new() };
    for &t in times {
        let s = kuznetsov_state_at(params.delta(), data, t)?;
        out.ledger.push(ledger_row(&s, &rec.norms)?);
        if rec.keep_snapshots {
            out.snapshots.push(s);
        }
    }
    Ok(out)
}

/// `n` times geometrically spaced on `[t0, t1]`, `t0 > 0`.
pub fn geometric_times(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![t1];
    }
    let r = (t1 / t0).ln() / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { t1 } else { t0 * (r * i as f64).exp() }).collect()
}

pub fn default_norms() -> Vec<NormKey> {
    let mut keys = Vec::new();
    for slot in Slot::ALL {
        keys.push(NormKey::new(slot, NormSpec::L2));
    }
    keys
}
