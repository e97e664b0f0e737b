use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::propagator::{kuznetsov_propagator, kuznetsov_state};
use crate::spectral::{FieldTriple, Quantity, Rule, SpectralField};

use super::compatibility_defect;

const NODES: usize = 10;

/// Terms of the formal small-relaxation expansion at a list of times.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionTerms {
    pub tau: f64,
    pub times: Vec<f64>,
    /// Leading term: the viscous wave solution.
    #[serde(skip)]
    pub leading: Vec<FieldTriple>,
    /// Coefficient of `tau`, started from zero data.
    #[serde(skip)]
    pub first: Option<Vec<FieldTriple>>,
    /// Interior part of the `tau^2` coefficient.
    #[serde(skip)]
    pub second: Option<Vec<FieldTriple>>,
    /// Layer part of the `tau^2` coefficient, `(z - 1 + e^{-z}) psi_c` at `z = t/tau`.
    #[serde(skip)]
    pub second_layer: Vec<SpectralField>,
}

impl ExpansionTerms {
    /// Sum of the available terms for `u` at output index `i`.
    pub fn truncation(&self, i: usize) -> Result<SpectralField> {
        let mut sum = self.leading[i].u.clone();
        if let Some(first) = &self.first {
            sum = sum.combine(1.0, &first[i].u, self.tau)?;
        }
        if let Some(second) = &self.second {
            let t2 = self.tau * self.tau;
            sum = sum.combine(1.0, &second[i].u, t2)?.combine(1.0, &self.second_layer[i], t2)?;
        }
        Ok(sum)
    }
}

/// `z - 1 + e^{-z}` without cancellation for small `z`.
fn layer_shape(z: f64) -> f64 {
    if z < 1e-2 {
        let mut s = 0.0;
        let mut term = z * z / 2.0;
        for k in 3..12 {
            s += term;
            term *= -z / k as f64;
        }
        s
    } else {
        z - 1.0 + (-z).exp()
    }
}

/// Advances `(v, v_t)` of `v_tt + r^2 v + delta r^2 v_t = source` by `h`.
fn duhamel_advance(
    delta: f64,
    xi: f64,
    state: [Complex64; 2],
    t0: f64,
    h: f64,
    source: &dyn Fn(f64) -> Complex64,
) -> [Complex64; 2] {
    if h <= 0.0 {
        return state;
    }
    let p = kuznetsov_propagator(delta, xi, h);
    let mut u = state[0] * p[0][0] + state[1] * p[0][1];
    let mut ut = state[0] * p[1][0] + state[1] * p[1][1];
    let speed = delta * xi * xi + xi + 1.0;
    let panels = ((h * speed).ceil() as usize).clamp(1, 4096);
    let rule = Rule::composite(0.0, h, panels, NODES).expect("valid panel rule");
    for (s, w) in rule.nodes.iter().zip(&rule.weights) {
        let q = kuznetsov_propagator(delta, xi, h - s);
        let f = source(t0 + s) * *w;
        u += f * q[0][1];
        ut += f * q[1][1];
    }
    [u, ut]
}

struct ModeTerms {
    leading: Vec<[Complex64; 3]>,
    first: Vec<[Complex64; 3]>,
    second: Vec<[Complex64; 3]>,
}

fn mode_terms(delta: f64, xi: f64, data: [Complex64; 2], times: &[f64], order: usize) -> ModeTerms {
    let x2 = xi * xi;
    let phi = |s: f64| kuznetsov_state(delta, xi, s, data);
    // source of the first correction: -delta r^4 (phi + delta phi_t)
    let f1 = |s: f64| {
        let p = phi(s);
        -(p[0] + p[1] * delta) * (delta * x2 * x2)
    };
    let df1 = |s: f64| {
        let p = phi(s);
        -(p[1] + p[2] * delta) * (delta * x2 * x2)
    };
    let closing = |v: [Complex64; 2], src: Complex64| [v[0], v[1], src - (v[0] + v[1] * delta) * x2];
    let zero = Complex64::new(0.0, 0.0);
    let mut out = ModeTerms { leading: Vec::new(), first: Vec::new(), second: Vec::new() };
    let (mut v1, mut v2) = ([zero; 2], [zero; 2]);
    let mut t_prev = 0.0;
    for &t in times {
        out.leading.push(phi(t));
        if order < 2 {
            continue;
        }
        let h = t - t_prev;
        if order >= 3 {
            let base = v1;
            let t0 = t_prev;
            // source of the second correction: delta r^2 v1_tt - d/dt(first source)
            let f2 = move |s: f64| {
                let w = duhamel_advance(delta, xi, base, t0, s - t0, &f1);
                let w_tt = f1(s) - (w[0] + w[1] * delta) * x2;
                w_tt * (delta * x2) - df1(s)
            };
            v2 = duhamel_advance(delta, xi, v2, t_prev, h, &f2);
        }
        v1 = duhamel_advance(delta, xi, v1, t_prev, h, &f1);
        out.first.push(closing(v1, f1(t)));
        if order >= 3 {
            let v1_tt = f1(t) - (v1[0] + v1[1] * delta) * x2;
            out.second.push(closing(v2, v1_tt * (delta * x2) - df1(t)));
        }
        t_prev = t;
    }
    out
}

/// Terms of the expansion of the third-order solution in powers of `tau` up to
/// `tau^{order-1}` (`order` is 1, 2 or 3), with the `tau^2` layer term always included.
///
/// The interior corrections are computed step to step by exact propagation plus
/// Gauss-Legendre panels for the source integral.
pub fn expansion_terms(data: &FieldTriple, delta: f64, tau: f64, order: usize, times: &[f64]) -> Result<ExpansionTerms> {
    if !(1..=3).contains(&order) {
        return Err(Error::Unsupported(format!("expansion order {order}; supported orders are 1 to 3")));
    }
    if !(delta > 0.0 && tau > 0.0) {
        return Err(Error::Precondition(format!("need tau, delta > 0, got {tau}, {delta}")));
    }
    if times.first().is_some_and(|t| *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition("times must be nonnegative and nondecreasing".into()));
    }
    let grid = data.grid().clone();
    let modes: Vec<ModeTerms> = grid
        .xi_abs()
        .par_iter()
        .enumerate()
        .map(|(k, &xi)| {
            let d = data.mode(k);
            mode_terms(delta, xi, [d[0], d[1]], times, order)
        })
        .collect();
    let collect = |pick: &dyn Fn(&ModeTerms) -> &Vec<[Complex64; 3]>| -> Vec<FieldTriple> {
        (0..times.len())
            .map(|i| {
                let m: Vec<[Complex64; 3]> = modes.iter().map(|mt| pick(mt)[i]).collect();
                FieldTriple::from_modes(grid.clone(), &m)
            })
            .collect()
    };
    let psi_c = compatibility_defect(data, delta)?;
    let second_layer = times
        .iter()
        .map(|&t| psi_c.scale(layer_shape(t / tau)).with_quantity(Quantity::Psi))
        .collect();
    Ok(ExpansionTerms {
        tau,
        times: times.to_vec(),
        leading: collect(&|m| &m.leading),
        first: (order >= 2).then(|| collect(&|m| &m.first)),
        second: (order >= 3).then(|| collect(&|m| &m.second)),
        second_layer,
    })
}
