use std::sync::Arc;

use mgtlab::limit::{expansion_terms, layer_probe, singular_limit_sweep, LayerOptions, LimitNorm, SweepOptions};
use mgtlab::propagator::{mgt_evolve, Recording};
use mgtlab::spectral::{norm, synthesize_data, DataSpec, Grid, NormSpec, Profile};
use mgtlab::Params;

fn compatible(dim: usize) -> mgtlab::spectral::FieldTriple {
    let g = Arc::new(Grid::radial_composite(dim, 12.0, 12, 16).unwrap());
    let p = Params::new(0.1, 1.0).unwrap();
    synthesize_data(&g, &p, &DataSpec::gaussian([1.0, 0.5, 0.0], 0.5).compatible(), 0).unwrap()
}

#[test]
fn expansion_residual_is_second_order() {
    let data = compatible(2);
    let taus = [0.1, 0.05, 0.025];
    let residual: Vec<f64> = taus
        .iter()
        .map(|&tau| {
            let p = Params::new(tau, 1.0).unwrap();
            let exact = mgt_evolve(&p, &data, &[1.0], &Recording::default().with_snapshots()).unwrap();
            let e = expansion_terms(&data, 1.0, tau, 2, &[0.25, 0.5, 0.75, 1.0]).unwrap();
            let approx = e.truncation(3).unwrap();
            norm(&exact.snapshots[0].u.sub(&approx).unwrap(), NormSpec::L2).unwrap()
        })
        .collect();
    let slope = (residual[0] / residual[2]).ln() / (taus[0] / taus[2]).ln();
    assert!((slope - 2.0).abs() <= 0.2, "residuals {residual:?}, order {slope}");
}

#[test]
fn two_dimensional_sup_norm_bound_converges_linearly() {
    let data = compatible(2);
    let r = singular_limit_sweep(&data, 1.0, &[0.1, 0.05, 0.025, 0.0125], &SweepOptions::new(40.0)).unwrap();
    let p2 = r.order(LimitNorm::L2).unwrap();
    let pinf = r.order(LimitNorm::LinfBound).unwrap();
    assert!((p2 - 1.0).abs() <= 0.1, "L2 order {p2}");
    assert!((pinf - 1.0).abs() <= 0.15, "Linf order {pinf}");
}

#[test]
fn layer_amplitude_is_independent_of_tau() {
    let g = Arc::new(Grid::radial_composite(1, 12.0, 12, 16).unwrap());
    let spec = DataSpec::gaussian([1.0, 0.0, 0.0], 0.5).incompatible(Profile::Gaussian { amplitude: 1.0, width: 4.0 });
    let amps: Vec<f64> = [0.1, 0.05]
        .iter()
        .map(|&tau| {
            let p = Params::new(tau, 1.0).unwrap();
            let d = synthesize_data(&g, &p, &spec, 0).unwrap();
            let r = layer_probe(&p, &d, &LayerOptions::new(2.0)).unwrap();
            assert!((r.rate_ratio.unwrap() - 1.0).abs() <= 0.05);
            r.fit.unwrap().amplitude
        })
        .collect();
    assert!((amps[0] / amps[1] - 1.0).abs() < 0.1, "{amps:?}");
}
