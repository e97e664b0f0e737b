use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::integrator::geometric_steps;
use super::nonlinear::dealias_mask;
use crate::error::{Error, Result};
use crate::propagator::{kuznetsov_propagator, StateTrajectory};
use crate::spectral::{FieldTriple, Grid, Rule, TorusFft};

/// Nonlinear viscous wave equation
/// `phi_tt - Laplace phi - delta Laplace phi_t = (B/A) phi_t phi_tt + 2 grad phi . grad phi_t`,
/// the formal zero-relaxation limit of the nonlinear third-order equation.
#[derive(Debug)]
pub struct KuznetsovNonlinear {
    fft: TorusFft,
    mask: Vec<bool>,
    wave: Vec<[f64; 3]>,
    delta: f64,
    b_over_a: f64,
}

type Pair = [Complex64; 2];

impl KuznetsovNonlinear {
    pub fn new(grid: Arc<Grid>, delta: f64, b_over_a: f64) -> Result<Self> {
        let mask = dealias_mask(&grid)?;
        if !(delta > 0.0) {
            return Err(Error::Precondition(format!("delta must be positive, got {delta}")));
        }
        let wave = (0..grid.len()).map(|m| grid.wavevector(m).unwrap_or([0.0; 3])).collect();
        Ok(KuznetsovNonlinear { fft: TorusFft::new(grid)?, mask, wave, delta, b_over_a })
    }

    fn masked(&self, c: impl Iterator<Item = Complex64>) -> Vec<Complex64> {
        c.zip(&self.mask).map(|(z, k)| if *k { z } else { Complex64::new(0.0, 0.0) }).collect()
    }

    /// Nonlinear forcing `g` and `phi_tt`, from the pointwise solve
    /// `phi_tt (1 - (B/A) phi_t) = Laplace phi + delta Laplace phi_t + 2 grad phi . grad phi_t`.
    pub fn forcing(&self, u: &[Complex64], ut: &[Complex64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let grid = self.fft.grid();
        let xi = grid.xi_abs();
        let lin: Vec<Complex64> = (0..u.len()).map(|k| -(u[k] + ut[k] * self.delta) * (xi[k] * xi[k])).collect();
        let mut inputs = vec![self.masked(ut.iter().copied()), self.masked(lin.iter().copied())];
        for a in 0..grid.dim() {
            inputs.push(self.masked(u.iter().zip(&self.wave).map(|(z, w)| z * Complex64::new(0.0, w[a]))));
            inputs.push(self.masked(ut.iter().zip(&self.wave).map(|(z, w)| z * Complex64::new(0.0, w[a]))));
        }
        let p: Vec<Vec<f64>> = inputs.par_iter().map(|c| self.fft.inverse(c)).collect();
        let b = self.b_over_a;
        let values = (0..p[0].len())
            .map(|j| {
                let q: f64 = p[2..].chunks(2).map(|pair| 2.0 * pair[0][j] * pair[1][j]).sum();
                let denom = 1.0 - b * p[0][j];
                if denom <= 0.0 {
                    return Err(Error::Precondition("1 - (B/A) phi_t vanished; data too large".into()));
                }
                Ok((p[1][j] + q) / denom - p[1][j])
            })
            .collect::<Result<Vec<f64>>>()?;
        let g = self.masked(self.fft.forward(&values).into_iter());
        let phi_tt = lin.iter().zip(&g).map(|(l, g)| l + g).collect();
        Ok((g, phi_tt))
    }
}

struct KuzTables {
    p: Vec<[[f64; 2]; 2]>,
    w0: Vec<[f64; 2]>,
    w1: Vec<[f64; 2]>,
}

fn tables(delta: f64, xi: &[f64], dt: f64) -> Result<KuzTables> {
    let rows: Vec<_> = xi
        .par_iter()
        .map(|&r| {
            let panels = ((dt * (delta * r * r + r + 1.0)).ceil() as usize).clamp(1, 4096);
            let rule = Rule::composite(0.0, dt, panels, 10)?;
            let (mut w0, mut w1) = ([0.0; 2], [0.0; 2]);
            for (s, w) in rule.nodes.iter().zip(&rule.weights) {
                let q = kuznetsov_propagator(delta, r, dt - s);
                for l in 0..2 {
                    w0[l] += w * q[l][1];
                    w1[l] += w * q[l][1] * s / dt;
                }
            }
            Ok((kuznetsov_propagator(delta, r, dt), w0, w1))
        })
        .collect::<Result<_>>()?;
    let mut t = KuzTables { p: Vec::new(), w0: Vec::new(), w1: Vec::new() };
    for (p, a, b) in rows {
        t.p.push(p);
        t.w0.push(a);
        t.w1.push(b);
    }
    Ok(t)
}

fn step(sys: &KuznetsovNonlinear, t: &KuzTables, v: &[Pair]) -> Result<Vec<Pair>> {
    let lin = |k: usize, s: Pair| [0, 1].map(|l| s[0] * t.p[k][l][0] + s[1] * t.p[k][l][1]);
    let (u, ut): (Vec<_>, Vec<_>) = v.iter().map(|p| (p[0], p[1])).unzip();
    let (g0, _) = sys.forcing(&u, &ut)?;
    let a: Vec<Pair> = (0..v.len()).map(|k| {
        let l0 = lin(k, v[k]);
        [0, 1].map(|l| l0[l] + g0[k] * t.w0[k][l])
    }).collect();
    let (au, aut): (Vec<_>, Vec<_>) = a.iter().map(|p| (p[0], p[1])).unzip();
    let (ga, _) = sys.forcing(&au, &aut)?;
    Ok((0..v.len()).map(|k| [0, 1].map(|l| a[k][l] + (ga[k] - g0[k]) * t.w1[k][l])).collect())
}

/// Evolves `(phi, phi_t)` from the first two data slots with the same exponential
/// integrator as the third-order solver; records full states at geometric step indices.
pub fn kuznetsov_nonlinear_evolve(
    delta: f64,
    b_over_a: f64,
    data: &FieldTriple,
    dt: f64,
    steps: usize,
    samples: usize,
) -> Result<StateTrajectory> {
    let grid = data.grid().clone();
    let sys = KuznetsovNonlinear::new(grid.clone(), delta, b_over_a)?;
    let tab = tables(delta, grid.xi_abs(), dt)?;
    let record = geometric_steps(steps, samples);
    let mut v: Vec<Pair> = (0..grid.len()).map(|k| [data.u.coeffs()[k], data.u_t.coeffs()[k]]).collect();
    let mut traj = StateTrajectory { times: Vec::new(), snapshots: Vec::new(), ledger: Vec::new() };
    let mut next = 0;
    for s in 0..=steps {
        if s > 0 {
            v = step(&sys, &tab, &v)?;
        }
        if record.get(next) == Some(&s) {
            next += 1;
            let (u, ut): (Vec<_>, Vec<_>) = v.iter().map(|p| (p[0], p[1])).unzip();
            let (_, utt) = sys.forcing(&u, &ut)?;
            let modes: Vec<[Complex64; 3]> = (0..u.len()).map(|k| [u[k], ut[k], utt[k]]).collect();
            traj.times.push(s as f64 * dt);
            traj.snapshots.push(FieldTriple::from_modes(grid.clone(), &modes));
            traj.ledger.push(Default::default());
        }
    }
    Ok(traj)
}

/// `psi_2` matching the nonlinear viscous wave equation at `t = 0`.
pub fn nonlinear_compatible_second(data: &FieldTriple, delta: f64, b_over_a: f64) -> Result<FieldTriple> {
    let sys = KuznetsovNonlinear::new(data.grid().clone(), delta, b_over_a)?;
    let (_, utt) = sys.forcing(data.u.coeffs(), data.u_t.coeffs())?;
    let mut out = data.clone();
    out.u_tt.coeffs_mut().copy_from_slice(&utt);
    Ok(out)
}
