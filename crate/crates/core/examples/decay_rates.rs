//! Linear decay of Gaussian data on radial grids in one, two and three dimensions.

use std::sync::Arc;

use mgtlab::decay::{dn_coefficient, fit_rate, window, FitModel};
use mgtlab::propagator::{geometric_times, mgt_evolve, NormKey, Recording};
use mgtlab::spectral::{synthesize_data, DataSpec, Grid, NormSpec, Slot};
use mgtlab::Params;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = Params::dissipative(0.1, 1.0)?;
    let spec = DataSpec::gaussian([1.0, 1.0, 0.0], 0.5).compatible();
    let times = geometric_times(0.1, 1000.0, 161);
    let keys = vec![
        NormKey::new(Slot::Psi, NormSpec::L2),
        NormKey::new(Slot::PsiT, NormSpec::L2),
        NormKey::new(Slot::PsiTt, NormSpec::L2),
        NormKey::new(Slot::Psi, NormSpec::Hdot(2.0)),
    ];
    for dim in 1..=3 {
        let grid = Arc::new(Grid::radial_composite(dim, 6.0, 600, 16)?);
        let data = synthesize_data(&grid, &params, &spec, 0)?;
        let traj = mgt_evolve(&params, &data, &times, &Recording::norms(keys.clone()))?;
        println!("n = {dim}");
        for key in &keys {
            let series = traj.series(key).expect("recorded");
            let (t, y) = window(&times, &series, 10.0, 1000.0);
            let fit = fit_rate(&t, &y, FitModel::Power)?;
            println!("  {:<14} exponent {:+.3} (rms {:.1e})", key.to_string(), fit.exponent_or_rate, fit.rms_residual);
        }
        let psi = traj.series(&keys[0]).expect("recorded");
        let ratios: Vec<f64> = times.iter().zip(&psi).filter(|(t, _)| **t >= 10.0).map(|(t, v)| v / dn_coefficient(dim, *t)).collect();
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(*r), b.max(*r)));
        println!("  |psi| / growth coefficient in [{lo:.3e}, {hi:.3e}]");
    }
    Ok(())
}
