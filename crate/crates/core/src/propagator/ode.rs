//! Classical Runge-Kutta reference for a single mode.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::Params;
use crate::roots::mode_roots;

type State = [Complex64; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeLimits {
    /// Target `h * max|lambda|` when the step is chosen internally.
    pub stiffness: f64,
    pub max_steps: usize,
}

impl Default for OdeLimits {
    fn default() -> Self {
        OdeLimits { stiffness: 0.01, max_steps: 200_000_000 }
    }
}

/// Samples of a mode integrated with a fixed step.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    /// Running `int_0^t |f(s)|^2 ds` by Simpson's rule on each step.
    pub forcing_energy: Vec<f64>,
}

/// Largest root modulus, which bounds the stiffness of the mode.
pub fn spectral_radius(params: &Params, xi: f64) -> Result<f64> {
    Ok(mode_roots(params, xi)?.roots.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

fn rhs(params: &Params, x2: f64, y: &State, f: Complex64) -> State {
    let tau = params.tau();
    let s = params.delta() + tau;
    [y[1], y[2], (f - y[2] - y[1] * (s * x2) - y[0] * x2) / tau]
}

fn axpy(y: &State, h: f64, k: &State) -> State {
    [y[0] + k[0] * h, y[1] + k[1] * h, y[2] + k[2] * h]
}

fn rk4_step(params: &Params, x2: f64, y: &State, h: f64, f: [Complex64; 3]) -> State {
    let k1 = rhs(params, x2, y, f[0]);
    let k2 = rhs(params, x2, &axpy(y, 0.5 * h, &k1), f[1]);
    let k3 = rhs(params, x2, &axpy(y, 0.5 * h, &k2), f[1]);
    let k4 = rhs(params, x2, &axpy(y, h, &k3), f[2]);
    [0, 1, 2].map(|i| y[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0))
}

/// Integrates `tau u_ttt + u_tt + (delta + tau) r^2 u_t + r^2 u = f(t)` from the
/// data `(u, u_t, u_tt)` up to `t_end`.
///
/// Refuses `dt > tau/20` and steps for which `dt * max|lambda| > 2.5`.
pub fn mode_ode_reference(
    params: &Params,
    xi: f64,
    data: State,
    forcing: impl Fn(f64) -> Complex64,
    t_end: f64,
    dt: f64,
) -> Result<ModeTrajectory> {
    let limit = params.tau() / 20.0;
    if !(dt > 0.0 && dt <= limit) {
        return Err(Error::StepTooLarge { dt, limit });
    }
    let rho = spectral_radius(params, xi)?;
    if dt * rho > 2.5 {
        return Err(Error::StepTooLarge { dt, limit: 2.5 / rho });
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Precondition(format!("bad end time {t_end}")));
    }
    let n = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    let h = if n == 0 { 0.0 } else { t_end / n as f64 };
    let x2 = xi * xi;
    let mut out = ModeTrajectory {
        times: Vec::with_capacity(n + 1),
        states: Vec::with_capacity(n + 1),
        forcing_energy: Vec::with_capacity(n + 1),
    };
    let mut y = data;
    let mut energy = 0.0;
    let mut f0 = forcing(0.0);
    out.times.push(0.0);
    out.states.push(y);
    out.forcing_energy.push(0.0);
    for i in 0..n {
        let t = i as f64 * h;
        let fm = forcing(t + 0.5 * h);
        let f1 = forcing(t + h);
        y = rk4_step(params, x2, &y, h, [f0, fm, f1]);
        energy += h / 6.0 * (f0.norm_sqr() + 4.0 * fm.norm_sqr() + f1.norm_sqr());
        out.times.push(t + h);
        out.states.push(y);
        out.forcing_energy.push(energy);
        f0 = f1;
    }
    Ok(out)
}

fn internal_steps(params: &Params, xi: f64, t: f64, limits: OdeLimits) -> Result<(usize, f64)> {
    let rho = spectral_radius(params, xi)?;
    let hmax = (params.tau() / 20.0).min(limits.stiffness / rho.max(f64::MIN_POSITIVE));
    let n = (t / hmax).ceil().max(1.0) as usize;
    if n > limits.max_steps {
        return Err(Error::Precondition(format!("{n} reference steps exceed the limit {}", limits.max_steps)));
    }
    Ok((n, t / n as f64))
}

/// Fundamental matrix `m[l][j]`: the `l`-th derivative at time `t` of the
/// solution started from the `j`-th unit datum.
pub fn fundamental_matrix_rk4(params: &Params, xi: f64, t: f64, limits: OdeLimits) -> Result<[[Complex64; 3]; 3]> {
    let (n, h) = internal_steps(params, xi, t, limits)?;
    let x2 = xi * xi;
    let zero = Complex64::new(0.0, 0.0);
    let mut m = [[zero; 3]; 3];
    for j in 0..3 {
        let mut y = [zero; 3];
        y[j] = Complex64::new(1.0, 0.0);
        for _ in 0..n {
            y = rk4_step(params, x2, &y, h, [zero; 3]);
        }
        for l in 0..3 {
            m[l][j] = y[l];
        }
    }
    Ok(m)
}

/// Responses at `dt` to a unit forcing and to the ramp `s/dt`, without the `1/tau` factor.
pub fn forcing_weights_rk4(params: &Params, xi: f64, dt: f64, limits: OdeLimits) -> Result<(State, State)> {
    let (n, h) = internal_steps(params, xi, dt, limits)?;
    // the equation divides the forcing by tau; multiply back to report the bare integral
    let tau = params.tau();
    let x2 = xi * xi;
    let zero = Complex64::new(0.0, 0.0);
    let mut w0 = [zero; 3];
    let mut w1 = [zero; 3];
    for i in 0..n {
        let t = i as f64 * h;
        let one = Complex64::new(tau, 0.0);
        w0 = rk4_step(params, x2, &w0, h, [one; 3]);
        let ramp = |s: f64| Complex64::new(tau * s / dt, 0.0);
        w1 = rk4_step(params, x2, &w1, h, [ramp(t), ramp(t + 0.5 * h), ramp(t + h)]);
    }
    Ok((w0, w1))
}
/// Largest mismatch, relative to the trajectory amplitude, between the exact
/// kernel propagation and the Runge-Kutta reference over random modes and data.
pub fn kernel_rk4_audit(modes: usize, t_end: f64, seed: u64) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..modes {
        let tau = rng.gen_range(0.05..0.5);
        let delta = tau * rng.gen_range(1.5..10.0);
        let xi = 10f64.powf(rng.gen_range(-1.5..0.7));
        let par = Params::dissipative(tau, delta)?;
        let data: State = [0, 1, 2].map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let prop = crate::propagator::ModePropagator::new(&par, xi)?;
        let dt = (tau / 20.0).min(0.004 / spectral_radius(&par, xi)?);
        let traj = mode_ode_reference(&par, xi, data, |_| Complex64::new(0.0, 0.0), t_end, dt)?;
        let amp = traj.states.iter().flat_map(|s| s.iter().map(|z| z.norm())).fold(1.0, f64::max);
        let last = traj.times.len() - 1;
        for (i, (&t, s)) in traj.times.iter().zip(&traj.states).enumerate() {
            if i % 97 == 0 || i == last {
                let exact = prop.apply(t, data)?;
                for l in 0..3 {
                    worst = worst.max((exact[l] - s[l]).norm() / amp);
                }
            }
        }
    }
    Ok(worst)
}

