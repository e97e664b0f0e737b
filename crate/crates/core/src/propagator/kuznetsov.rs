//! Second-order viscous wave equation `u_tt - Laplace u - delta Laplace u_t = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance from `2/delta` below which the two roots are treated as merged.
pub const CONFLUENCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KuznetsovRoots {
    pub plus: Complex64,
    pub minus: Complex64,
    pub confluent: bool,
}

/// Roots of `l^2 + delta r^2 l + r^2 = 0`.
pub fn kuznetsov_roots(delta: f64, xi: f64) -> Result<KuznetsovRoots> {
    if !(delta > 0.0) {
        return Err(Error::Precondition(format!("delta must be positive, got {delta}")));
    }
    if !(xi.is_finite() && xi > 0.0) {
        return Err(Error::Precondition(format!(
            "|xi| must be positive, got {xi}; the zero mode is u0 + t u1"
        )));
    }
    let x2 = xi * xi;
    let m = -0.5 * delta * x2;
    let threshold = 2.0 / delta;
    if (xi - threshold).abs() <= CONFLUENCE_TOL {
        let r = Complex64::new(m, 0.0);
        return Ok(KuznetsovRoots { plus: r, minus: r, confluent: true });
    }
    let (plus, minus) = if xi > threshold {
        let minus = m - 0.5 * xi * (delta * delta * x2 - 4.0).sqrt();
        (Complex64::new(x2 / minus, 0.0), Complex64::new(minus, 0.0))
    } else {
        let w = 0.5 * xi * (4.0 - delta * delta * x2).sqrt();
        (Complex64::new(m, w), Complex64::new(m, -w))
    };
    Ok(KuznetsovRoots { plus, minus, confluent: false })
}

/// Propagator `[[E0, E1], [E0', E1']]` acting on `(u, u_t)`, valid through the
/// confluent frequency.
pub fn kuznetsov_propagator(delta: f64, xi: f64, t: f64) -> [[f64; 2]; 2] {
    let x2 = xi * xi;
    let m = -0.5 * delta * x2;
    let d2 = m * m - x2;
    let (e0, e1, e1t) = if d2 > 0.0 && d2.sqrt() * t >= 0.5 {
        let d = d2.sqrt();
        let minus = m - d;
        let plus = if minus == 0.0 { 0.0 } else { x2 / minus };
        let ep = clamp_exp(plus * t);
        let em = clamp_exp(minus * t);
        let two_d = 2.0 * d;
        ((plus * em - minus * ep) / two_d, (ep - em) / two_d, (plus * ep - minus * em) / two_d)
    } else {
        // cosh/sinh or cos/sin form, smooth in d^2
        let (c, s) = if d2 >= 0.0 {
            let d = d2.sqrt();
            let x = d * t;
            (x.cosh(), t * sinhc(x))
        } else {
            let w = (-d2).sqrt();
            let x = w * t;
            (x.cos(), t * sinc(x))
        };
        let e = clamp_exp(m * t);
        (e * (c - m * s), e * s, e * (c + m * s))
    };
    [[e0, e1], [-x2 * e1, e1t]]
}

fn clamp_exp(x: f64) -> f64 {
    if x < -690.0 {
        0.0
    } else {
        x.exp()
    }
}

fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `(u, u_t, u_tt)` at time `t`; `u_tt = -r^2 (u + delta u_t)`.
pub fn kuznetsov_state(delta: f64, xi: f64, t: f64, data: [Complex64; 2]) -> [Complex64; 3] {
    let p = kuznetsov_propagator(delta, xi, t);
    let u = data[0] * p[0][0] + data[1] * p[0][1];
    let ut = data[0] * p[1][0] + data[1] * p[1][1];
    [u, ut, -(u + ut * delta) * (xi * xi)]
}
