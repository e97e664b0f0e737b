use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{norm, FieldTriple, Grid, GridKind, NormSpec, Quantity, SpectralField, TorusFft};

/// Modes kept by the 2/3 rule: every axis index satisfies `|k| <= n/3`.
pub fn dealias_mask(grid: &Grid) -> Result<Vec<bool>> {
    let GridKind::Torus { n, .. } = grid.kind() else {
        return Err(Error::Unsupported("products need the torus backend".into()));
    };
    let cut = (*n / 3) as i64;
    Ok((0..grid.len())
        .map(|m| grid.torus_index(m).is_some_and(|k| k[..grid.dim()].iter().all(|&i| i.abs() <= cut)))
        .collect())
}

/// Pseudospectral evaluator of `(B/A) psi_t psi_tt + 2 grad psi . grad psi_t`.
#[derive(Debug)]
pub struct NonlinearEvaluator {
    fft: TorusFft,
    mask: Vec<bool>,
    wave: Vec<[f64; 3]>,
    b_over_a: f64,
}

impl NonlinearEvaluator {
    pub fn new(grid: Arc<Grid>, b_over_a: f64) -> Result<Self> {
        let mask = dealias_mask(&grid)?;
        let wave = (0..grid.len()).map(|m| grid.wavevector(m).unwrap_or([0.0; 3])).collect();
        Ok(NonlinearEvaluator { fft: TorusFft::new(grid)?, mask, wave, b_over_a })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.fft.grid()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    fn masked(&self, c: &[Complex64], axis: Option<usize>) -> Vec<Complex64> {
        c.iter()
            .zip(&self.mask)
            .zip(&self.wave)
            .map(|((z, keep), k)| match (keep, axis) {
                (false, _) => Complex64::new(0.0, 0.0),
                (true, None) => *z,
                (true, Some(a)) => z * Complex64::new(0.0, k[a]),
            })
            .collect()
    }

    /// Physical `psi_t`, `psi_tt`, then `d_a psi` and `d_a psi_t` for every axis.
    fn physical(&self, u: &[Complex64], ut: &[Complex64], utt: &[Complex64]) -> Vec<Vec<f64>> {
        let dim = self.grid().dim();
        let mut inputs = vec![self.masked(ut, None), self.masked(utt, None)];
        for a in 0..dim {
            inputs.push(self.masked(u, Some(a)));
            inputs.push(self.masked(ut, Some(a)));
        }
        inputs.par_iter().map(|c| self.fft.inverse(c)).collect()
    }

    pub(crate) fn eval_coeffs(&self, u: &[Complex64], ut: &[Complex64], utt: &[Complex64]) -> Vec<Complex64> {
        let p = self.physical(u, ut, utt);
        let b = self.b_over_a;
        let values: Vec<f64> = (0..p[0].len())
            .into_par_iter()
            .map(|j| {
                let grad: f64 = p[2..].chunks(2).map(|pair| pair[0][j] * pair[1][j]).sum();
                b * p[0][j] * p[1][j] + 2.0 * grad
            })
            .collect();
        let mut f = self.fft.forward(&values);
        for (z, keep) in f.iter_mut().zip(&self.mask) {
            if !keep {
                *z = Complex64::new(0.0, 0.0);
            }
        }
        f
    }

    pub fn eval(&self, state: &FieldTriple) -> Result<SpectralField> {
        self.grid().ensure_same(state.grid())?;
        let f = self.eval_coeffs(state.u.coeffs(), state.u_t.coeffs(), state.u_tt.coeffs());
        Ok(SpectralField::from_coeffs(self.grid().clone(), f, Quantity::Forcing))
    }

    /// `L1`, `L2` and `Hdot(s)` norms of the nonlinearity at `state`.
    pub fn forcing_norms(&self, state: &FieldTriple, s: f64) -> Result<[f64; 3]> {
        let f = self.eval(state)?;
        let grid = self.grid();
        let cell = grid.mode_measure()[0] / grid.len() as f64;
        let l1 = self.fft.inverse(f.coeffs()).iter().map(|v| v.abs()).sum::<f64>() * cell;
        Ok([l1, norm(&f, NormSpec::L2)?, norm(&f, NormSpec::Hdot(s))?])
    }

    /// Pointwise bound on the derivative of the nonlinearity with respect to the state:
    /// `|B/A| (max|psi_t| + max|psi_tt|) + 2 k_max (max|grad psi| + max|grad psi_t|)`.
    pub fn lipschitz_estimate(&self, state: &FieldTriple) -> Result<f64> {
        self.grid().ensure_same(state.grid())?;
        let p = self.physical(state.u.coeffs(), state.u_t.coeffs(), state.u_tt.coeffs());
        let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let k_max = self
            .wave
            .iter()
            .zip(&self.mask)
            .filter(|(_, keep)| **keep)
            .map(|(k, _)| k.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        let grad: f64 = p[2..].iter().map(|v| sup(v)).sum();
        Ok(self.b_over_a.abs() * (sup(&p[0]) + sup(&p[1])) + 2.0 * k_max * grad)
    }
}

/// One evaluation of the nonlinearity on a torus state.
pub fn nonlinearity(state: &FieldTriple, b_over_a: f64) -> Result<SpectralField> {
    NonlinearEvaluator::new(state.grid().clone(), b_over_a)?.eval(state)
}
