use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use mgtlab::error::Error;
use mgtlab::jmgt::{
    contraction_constant, duhamel_apply, jmgt_evolve, JmgtOptions, NonlinearEvaluator, UNSUPPORTED_BY_THEOREM,
};
use mgtlab::params::Params;
use mgtlab::propagator::{mgt_evolve, Recording};
use mgtlab::spectral::{
    norm, synthesize_data, DataSpec, FieldTriple, Grid, NormSpec, Profile, Quantity, Slot, SpectralField,
};

fn params() -> Params {
    Params::dissipative(0.1, 1.0).unwrap().with_b_over_a(2.0)
}

fn sup(v: &FieldTriple) -> f64 {
    Slot::ALL.iter().map(|s| norm(v.slot(*s), NormSpec::LinfBound).unwrap()).fold(0.0, f64::max)
}

/// Gaussian data on a square torus with sup norm `size`.
fn data(dim: usize, n: usize, length: f64, size: f64) -> FieldTriple {
    let grid = Arc::new(Grid::torus(dim, n, length).unwrap());
    let spec = DataSpec::gaussian([1.0, 0.5, 0.0], 0.5).compatible();
    let raw = synthesize_data(&grid, &params(), &spec, 0).unwrap();
    raw.scale(size / sup(&raw))
}

fn final_state(p: &Params, d: &FieldTriple, dt: f64, t_end: f64) -> FieldTriple {
    let mut o = JmgtOptions::new(dt, t_end, 1.0);
    o.samples = 4;
    o.keep_snapshots = true;
    o.data_threshold = 1.0;
    jmgt_evolve(p, d, &o).unwrap().trajectory.snapshots.pop().unwrap()
}

fn l2_slots(v: &FieldTriple) -> f64 {
    Slot::ALL.iter().map(|s| norm(v.slot(*s), NormSpec::L2).unwrap()).sum()
}

#[test]
fn spatially_constant_data_follow_the_linear_flow() {
    let grid = Arc::new(Grid::torus(2, 16, 2.0 * PI).unwrap());
    let mut d = FieldTriple::zeros(grid.clone());
    d.u.coeffs_mut()[0] = Complex64::new(0.05, 0.0);
    d.u_t.coeffs_mut()[0] = Complex64::new(-0.02, 0.0);
    d.u_tt.coeffs_mut()[0] = Complex64::new(0.03, 0.0);
    let p = params().with_b_over_a(0.0);
    let got = final_state(&p, &d, 0.01, 1.0);
    let lin = mgt_evolve(&p, &d, &[1.0], &Recording::default().with_snapshots()).unwrap();
    let err = l2_slots(&got.sub(&lin.snapshots[0]).unwrap());
    assert!(err < 1e-8, "err {err:e}");
}

#[test]
fn tiny_data_follow_the_linear_flow() {
    let d = data(2, 32, 2.0 * PI, 1e-9);
    let got = final_state(&params(), &d, 0.01, 1.0);
    let lin = mgt_evolve(&params(), &d, &[1.0], &Recording::default().with_snapshots()).unwrap();
    let rel = l2_slots(&got.sub(&lin.snapshots[0]).unwrap()) / l2_slots(&lin.snapshots[0]);
    assert!(rel < 1e-8, "relative deviation {rel:e}");
}

#[test]
fn nonlinear_deviation_is_quadratic_in_the_data_size() {
    let base = data(2, 32, 2.0 * PI, 1.0);
    let dev = |eps: f64| {
        let d = base.scale(eps);
        let got = final_state(&params(), &d, 0.01, 1.0);
        let lin = mgt_evolve(&params(), &d, &[1.0], &Recording::default().with_snapshots()).unwrap();
        l2_slots(&got.sub(&lin.snapshots[0]).unwrap())
    };
    let order = (dev(1e-3) / dev(5e-4)).log2();
    assert!((order - 2.0).abs() < 0.1, "order {order}");
}

#[test]
fn time_step_convergence_is_second_order() {
    let d = data(2, 32, 2.0 * PI, 0.08);
    let p = params();
    let a = final_state(&p, &d, 0.01, 1.0);
    let b = final_state(&p, &d, 0.005, 1.0);
    let c = final_state(&p, &d, 0.0025, 1.0);
    let e1 = l2_slots(&a.sub(&b).unwrap());
    let e2 = l2_slots(&b.sub(&c).unwrap());
    let order = (e1 / e2).log2();
    assert!((order - 2.0).abs() < 0.25, "order {order}, e1 {e1:e}, e2 {e2:e}");
}

#[test]
fn one_dimensional_runs_are_tagged() {
    let d = data(1, 32, 2.0 * PI, 0.01);
    let mut o = JmgtOptions::new(0.01, 0.1, 1.0);
    o.samples = 3;
    let run = jmgt_evolve(&params(), &d, &o).unwrap();
    assert!(run.tags.iter().any(|t| t == UNSUPPORTED_BY_THEOREM));
    let d2 = data(2, 16, 2.0 * PI, 0.01);
    assert!(jmgt_evolve(&params(), &d2, &o).unwrap().tags.is_empty());
}

#[test]
fn large_data_and_large_steps_are_rejected() {
    let d = data(2, 16, 2.0 * PI, 0.5);
    let o = JmgtOptions::new(0.01, 0.1, 1.0);
    assert!(matches!(jmgt_evolve(&params(), &d, &o), Err(Error::Precondition(_))));
    let d = data(2, 16, 2.0 * PI, 0.01);
    let o = JmgtOptions::new(0.02, 0.1, 1.0);
    assert!(matches!(jmgt_evolve(&params(), &d, &o), Err(Error::StepTooLarge { .. })));
    let radial = FieldTriple::zeros(Arc::new(Grid::radial(2, 10.0, 32).unwrap()));
    assert!(matches!(jmgt_evolve(&params(), &radial, &o), Err(Error::Unsupported(_))));
}

#[test]
fn growth_guard_stops_runs_with_a_tight_factor() {
    // u starts small and moving, so its norm grows on the first step
    let grid = Arc::new(Grid::torus(2, 16, 2.0 * PI).unwrap());
    let spec = DataSpec::gaussian([0.01, 1.0, 0.0], 0.5);
    let raw = synthesize_data(&grid, &params(), &spec, 0).unwrap();
    let d = raw.scale(0.05 / sup(&raw));
    let mut o = JmgtOptions::new(0.01, 1.0, 1.0);
    o.guard_factor = 1.0 + 1e-12;
    match jmgt_evolve(&params(), &d, &o) {
        Err(Error::BlowUp { t, .. }) => assert!(t > 0.0),
        other => panic!("expected a guard trip, got {other:?}"),
    }
}

// Zero data on the zero mode: tau u_ttt + u_tt = f.
fn constant_mode_field(grid: &Arc<Grid>, value: f64) -> SpectralField {
    let mut f = SpectralField::zeros(grid.clone(), Quantity::Forcing);
    f.coeffs_mut()[0] = Complex64::new(value, 0.0);
    f
}

#[test]
fn duhamel_of_zero_forcing_vanishes() {
    let grid = Arc::new(Grid::torus(2, 8, 2.0 * PI).unwrap());
    let f = vec![SpectralField::zeros(grid, Quantity::Forcing); 5];
    let out = duhamel_apply(&f, &params(), 0.1).unwrap();
    assert_eq!(out.len(), 5);
    assert!(out.iter().all(|s| l2_slots(s) == 0.0));
    assert!(duhamel_apply(&[], &params(), 0.1).is_err());
}

#[test]
fn duhamel_of_constant_and_linear_forcing_on_the_zero_mode() {
    let grid = Arc::new(Grid::torus(1, 8, 2.0 * PI).unwrap());
    let tau = params().tau();
    let dt = 0.05;
    let steps = 40;
    let e = |t: f64| (-t / tau).exp();
    // f = 1
    let f: Vec<_> = (0..=steps).map(|_| constant_mode_field(&grid, 1.0)).collect();
    let out = duhamel_apply(&f, &params(), dt).unwrap();
    for (i, s) in out.iter().enumerate() {
        let t = i as f64 * dt;
        let want = [
            t * t / 2.0 - tau * t + tau * tau * (1.0 - e(t)),
            t - tau * (1.0 - e(t)),
            1.0 - e(t),
        ];
        for (l, w) in want.iter().enumerate() {
            assert!((s.mode(0)[l].re - w).abs() < 1e-12, "t {t} slot {l}");
        }
    }
    // f = t is reproduced exactly by the piecewise-linear rule
    let f: Vec<_> = (0..=steps).map(|i| constant_mode_field(&grid, i as f64 * dt)).collect();
    let out = duhamel_apply(&f, &params(), dt).unwrap();
    for (i, s) in out.iter().enumerate() {
        let t = i as f64 * dt;
        let utt = t - tau + tau * e(t);
        let ut = t * t / 2.0 - tau * t + tau * tau * (1.0 - e(t));
        let u = t.powi(3) / 6.0 - tau * t * t / 2.0 + tau * tau * t - tau.powi(3) * (1.0 - e(t));
        for (l, w) in [u, ut, utt].iter().enumerate() {
            assert!((s.mode(0)[l].re - w).abs() < 1e-12, "t {t} slot {l}");
        }
    }
}

#[test]
fn duhamel_of_an_impulse_matches_the_propagator_column() {
    // f = 1/dt on the first step only, linear ramp down: total impulse 1/2
    let grid = Arc::new(Grid::torus(1, 8, 2.0 * PI).unwrap());
    let dt = 1e-3;
    let mut f: Vec<_> = (0..=2000).map(|_| constant_mode_field(&grid, 0.0)).collect();
    f[0] = constant_mode_field(&grid, 2.0 / dt);
    let out = duhamel_apply(&f, &params(), dt).unwrap();
    // impulse response of tau u_ttt + u_tt: u_tt = e^{-t/tau}/tau
    let tau = params().tau();
    let t = 2.0;
    let got = out.last().unwrap().mode(0)[2].re;
    let want = (-t / tau).exp() / tau;
    assert!((got - want).abs() < 1e-2 * want.abs().max(1e-8) + 1e-9, "{got} vs {want}");
}

#[test]
fn contraction_constant_is_bounded_and_scale_free() {
    let eval = NonlinearEvaluator::new(Arc::new(Grid::torus(2, 32, 2.0 * PI).unwrap()), 2.0).unwrap();
    let a = data(2, 32, 2.0 * PI, 0.05);
    let grid = a.grid().clone();
    let spec = DataSpec {
        psi0: Profile::Random { amplitude: 1.0, k_min: 1.0, k_max: 4.0 },
        psi1: Profile::Random { amplitude: 1.0, k_min: 1.0, k_max: 4.0 },
        psi2: Profile::Random { amplitude: 1.0, k_min: 1.0, k_max: 4.0 },
        ..DataSpec::gaussian([0.0; 3], 1.0)
    };
    let b = synthesize_data(&grid, &params(), &spec, 7).unwrap();
    let b = b.scale(0.05 / sup(&b));
    let k1 = contraction_constant(&eval, &a, &b, 1.0).unwrap();
    let k2 = contraction_constant(&eval, &a.scale(0.1), &b.scale(0.1), 1.0).unwrap();
    assert!(k1.is_finite() && k1 > 0.0 && k1 < 10.0, "K = {k1}");
    assert!((k1 / k2 - 1.0).abs() < 1e-10, "quadratic nonlinearity gives the same constant: {k1} vs {k2}");
    assert!(contraction_constant(&eval, &a, &a, 1.0).is_err());
}
