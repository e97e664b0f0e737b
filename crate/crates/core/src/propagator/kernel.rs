//! Closed-form solution kernels of one mode.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ode::{fundamental_matrix_rk4, OdeLimits};
use crate::error::{Error, Result};
use crate::params::Params;
use crate::roots::{mode_roots, ModeRoots};

/// `k[j][l]` is the `l`-th time derivative of the kernel multiplying the
/// `j`-th initial datum, so `u^(l)(t) = sum_j k[j][l] * data[j]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelEval {
    pub t: f64,
    pub k: [[Complex64; 3]; 3],
}

impl KernelEval {
    /// Propagator matrix acting on `(u, u_t, u_tt)`.
    pub fn matrix(&self) -> [[Complex64; 3]; 3] {
        let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
        for (l, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.k[j][l];
            }
        }
        m
    }

    pub fn apply(&self, data: [Complex64; 3]) -> [Complex64; 3] {
        apply(&self.matrix(), data)
    }
}

pub fn apply(m: &[[Complex64; 3]; 3], v: [Complex64; 3]) -> [Complex64; 3] {
    [0, 1, 2].map(|l| m[l][0] * v[0] + m[l][1] * v[1] + m[l][2] * v[2])
}

/// `exp(z)` with results below `1e-300` in modulus flushed to zero.
pub fn exp_clamped(z: Complex64) -> Complex64 {
    if z.re < -690.0 {
        Complex64::new(0.0, 0.0)
    } else {
        z.exp()
    }
}

/// Kernels from distinct roots by partial fractions.
pub fn kernel_eval(roots: &ModeRoots, t: f64) -> Result<KernelEval> {
    if roots.degenerate {
        return Err(Error::Precondition(format!(
            "roots at |xi| = {} are degenerate; use the ODE reference",
            roots.xi
        )));
    }
    Ok(PartialFractions::new(roots).eval(t))
}

/// Per-root weights of the three kernels.
#[derive(Debug, Clone, Copy)]
struct PartialFractions {
    lambda: [Complex64; 3],
    weight: [[Complex64; 3]; 3],
}

impl PartialFractions {
    fn new(roots: &ModeRoots) -> Self {
        let l = roots.roots;
        let mut weight = [[Complex64::new(0.0, 0.0); 3]; 3];
        for r in 0..3 {
            let (a, b) = ((r + 1) % 3, (r + 2) % 3);
            let inv = 1.0 / ((l[r] - l[a]) * (l[r] - l[b]));
            weight[r] = [l[a] * l[b] * inv, -(l[a] + l[b]) * inv, inv];
        }
        PartialFractions { lambda: l, weight }
    }

    fn eval(&self, t: f64) -> KernelEval {
        let mut k = [[Complex64::new(0.0, 0.0); 3]; 3];
        for r in 0..3 {
            let lam = self.lambda[r];
            let e = exp_clamped(lam * t);
            let pow = [Complex64::new(1.0, 0.0), lam, lam * lam];
            for j in 0..3 {
                for l in 0..3 {
                    k[j][l] += self.weight[r][j] * pow[l] * e;
                }
            }
        }
        KernelEval { t, k }
    }

    /// `int_0^dt g(dt - s) w(s) ds` for the forcing kernel and its derivatives,
    /// with weight `w = 1` (`phi1`) and `w = s/dt` (`phi2`).
    fn forcing_weights(&self, dt: f64) -> ([Complex64; 3], [Complex64; 3]) {
        let mut w0 = [Complex64::new(0.0, 0.0); 3];
        let mut w1 = [Complex64::new(0.0, 0.0); 3];
        for r in 0..3 {
            let lam = self.lambda[r];
            let (p1, p2) = phi12(lam * dt);
            let pow = [Complex64::new(1.0, 0.0), lam, lam * lam];
            for l in 0..3 {
                w0[l] += self.weight[r][2] * pow[l] * p1 * dt;
                w1[l] += self.weight[r][2] * pow[l] * p2 * dt;
            }
        }
        (w0, w1)
    }
}

/// `phi1(z) = (e^z - 1)/z` and `phi2(z) = (e^z - 1 - z)/z^2`.
pub fn phi12(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 0.1 {
        let mut p1 = Complex64::new(0.0, 0.0);
        let mut p2 = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for k in 0..18 {
            // term = z^k / k!
            p1 += term / (k as f64 + 1.0);
            p2 += term / ((k as f64 + 1.0) * (k as f64 + 2.0));
            term *= z / (k as f64 + 1.0);
        }
        (p1, p2)
    } else {
        let e = exp_clamped(z);
        let p1 = (e - 1.0) / z;
        (p1, (p1 - 1.0) / z)
    }
}

/// Exact propagation of one mode over arbitrary times.
#[derive(Debug, Clone)]
pub enum ModePropagator {
    /// `|xi| = 0`: roots `0, 0, -1/tau`.
    Zero { tau: f64 },
    Distinct { roots: ModeRoots, tau: f64, lambda: [Complex64; 3], weight: [[Complex64; 3]; 3] },
    /// Nearly coincident roots: the fundamental matrix is integrated numerically.
    Degenerate { params: Params, xi: f64 },
}

impl ModePropagator {
    pub fn new(params: &Params, xi: f64) -> Result<Self> {
        if xi == 0.0 {
            return Ok(ModePropagator::Zero { tau: params.tau() });
        }
        let roots = mode_roots(params, xi)?;
        if roots.degenerate {
            return Ok(ModePropagator::Degenerate { params: *params, xi });
        }
        let pf = PartialFractions::new(&roots);
        Ok(ModePropagator::Distinct { roots, tau: params.tau(), lambda: pf.lambda, weight: pf.weight })
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, ModePropagator::Degenerate { .. })
    }

    pub fn kernels(&self, t: f64) -> Result<KernelEval> {
        match self {
            ModePropagator::Zero { tau } => Ok(zero_mode_kernels(*tau, t)),
            ModePropagator::Distinct { lambda, weight, .. } => {
                Ok(PartialFractions { lambda: *lambda, weight: *weight }.eval(t))
            }
            ModePropagator::Degenerate { params, xi } => {
                let m = fundamental_matrix_rk4(params, *xi, t, OdeLimits::default())?;
                let mut k = [[Complex64::new(0.0, 0.0); 3]; 3];
                for j in 0..3 {
                    for l in 0..3 {
                        k[j][l] = m[l][j];
                    }
                }
                Ok(KernelEval { t, k })
            }
        }
    }

    pub fn apply(&self, t: f64, data: [Complex64; 3]) -> Result<[Complex64; 3]> {
        Ok(self.kernels(t)?.apply(data))
    }

    /// Weights `(W0, W1)` such that a forcing `f(s) = f0 + (f1 - f0) s / dt` on
    /// `[0, dt]` adds `W0 f0 + W1 (f1 - f0)` to `(u, u_t, u_tt)(dt)`.
    ///
    /// The equation is `tau u_ttt + ... = f`, so the forcing enters with `1/tau`.
    pub fn forcing_weights(&self, dt: f64) -> Result<([Complex64; 3], [Complex64; 3])> {
        let (w0, w1) = match self {
            ModePropagator::Distinct { lambda, weight, .. } => {
                PartialFractions { lambda: *lambda, weight: *weight }.forcing_weights(dt)
            }
            ModePropagator::Zero { tau } => zero_mode_forcing_weights(*tau, dt),
            ModePropagator::Degenerate { params, xi } => {
                super::ode::forcing_weights_rk4(params, *xi, dt, OdeLimits::default())?
            }
        };
        let inv_tau = 1.0 / self.tau();
        Ok((w0.map(|w| w * inv_tau), w1.map(|w| w * inv_tau)))
    }

    pub fn tau(&self) -> f64 {
        match self {
            ModePropagator::Zero { tau } | ModePropagator::Distinct { tau, .. } => *tau,
            ModePropagator::Degenerate { params, .. } => params.tau(),
        }
    }
}

/// `e^{-x} - 1 + x` without cancellation.
fn em1px(x: f64) -> f64 {
    if x < 1e-2 {
        let mut s = 0.0;
        let mut term = x * x / 2.0;
        for k in 3..12 {
            s += term;
            term *= -x / k as f64;
        }
        s
    } else {
        (-x).exp_m1() + x
    }
}

/// Kernels of the zero mode, `u = psi0 + t psi1 + tau^2 (e^{-t/tau} - 1 + t/tau) psi2`.
pub fn zero_mode_kernels(tau: f64, t: f64) -> KernelEval {
    let x = t / tau;
    let c = |v: f64| Complex64::new(v, 0.0);
    let decay = if x > 690.0 { 0.0 } else { (-x).exp() };
    KernelEval {
        t,
        k: [
            [c(1.0), c(0.0), c(0.0)],
            [c(t), c(1.0), c(0.0)],
            [c(tau * tau * em1px(x)), c(-tau * (-x).exp_m1()), c(decay)],
        ],
    }
}

/// Closed-form integrals of the zero-mode forcing kernel `tau^2 (e^{-u/tau} - 1 + u/tau)`
/// and its derivatives, before the `1/tau` factor.
fn zero_mode_forcing_weights(tau: f64, dt: f64) -> ([Complex64; 3], [Complex64; 3]) {
    // g(u) = tau^2 (e^{-u/tau} - 1 + u/tau), g' = tau (1 - e^{-u/tau}), g'' = e^{-u/tau}
    // W0 = int_0^dt g^(l)(u) du, W1 = int_0^dt g^(l)(u) (dt - u)/dt du
    let x = dt / tau;
    let e1 = em1px(x); // e^{-x} - 1 + x
    let e2 = {
        // e^{-x} - 1 + x - x^2/2
        if x < 1e-2 {
            let mut s = 0.0;
            let mut term = -x * x * x / 6.0;
            for k in 4..14 {
                s += term;
                term *= -x / k as f64;
            }
            s
        } else {
            e1 - x * x / 2.0
        }
    };
    let e3 = {
        // e^{-x} - 1 + x - x^2/2 + x^3/6
        if x < 5e-2 {
            let mut s = 0.0;
            let mut term = x.powi(4) / 24.0;
            for k in 5..16 {
                s += term;
                term *= -x / k as f64;
            }
            s
        } else {
            e2 + x * x * x / 6.0
        }
    };
    let c = |v: f64| Complex64::new(v, 0.0);
    // int_0^dt g'' = 1 - e^{-x} ; int g' = tau (x - (1 - e^{-x})) tau ; int g = tau^3 ( x^2/2 - x + 1 - e^{-x} )
    let w0 = [c(-tau.powi(3) * e2), c(tau * tau * e1), c(-tau * (-x).exp_m1())];
    // int_0^dt g^(l)(u) (dt - u)/dt du = (1/dt) int_0^dt G^(l)(u) du with G^(l) the antiderivative vanishing at 0
    let w1 = [c(tau.powi(4) * e3 / dt), c(-tau.powi(3) * e2 / dt), c(tau * tau * e1 / dt)];
    (w0, w1)
}
