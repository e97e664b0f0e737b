use num_complex::Complex64;

use super::integrator::StepTables;
use crate::error::{Error, Result};
use crate::params::Params;
use crate::spectral::{FieldTriple, SpectralField};

/// `int_0^t K(t - s) f(s) ds` for forcing sampled at `t_i = i dt`, with `f`
/// linear between samples. Returns `(u, u_t, u_tt)` of the response at every sample.
///
/// The forcing is the right side of `tau u_ttt + ... = f`.
pub fn duhamel_apply(forcing: &[SpectralField], params: &Params, dt: f64) -> Result<Vec<FieldTriple>> {
    let first = forcing.first().ok_or_else(|| Error::InsufficientData("empty forcing series".into()))?;
    let grid = first.grid().clone();
    if let Some(bad) = forcing.iter().position(|f| grid.ensure_same(f.grid()).is_err()) {
        return Err(Error::GridMismatch(format!("forcing sample {bad} lives on a different grid")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Precondition(format!("bad step {dt}")));
    }
    let tables = StepTables::new(params, grid.xi_abs(), dt)?;
    let zero = Complex64::new(0.0, 0.0);
    let mut v = vec![[zero; 3]; grid.len()];
    let mut out = vec![FieldTriple::zeros(grid.clone())];
    for w in forcing.windows(2) {
        let (f0, f1) = (w[0].coeffs(), w[1].coeffs());
        for (k, state) in v.iter_mut().enumerate() {
            let lin = crate::propagator::kernel::apply(&tables.phi[k], *state);
            *state = [0, 1, 2].map(|l| lin[l] + tables.w0[k][l] * f0[k] + tables.w1[k][l] * (f1[k] - f0[k]));
        }
        out.push(FieldTriple::from_modes(grid.clone(), &v));
    }
    Ok(out)
}
