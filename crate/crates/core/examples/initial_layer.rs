//! Fast relaxation of the second time derivative for data with a compatibility defect.

use std::sync::Arc;

use mgtlab::limit::{layer_probe, LayerOptions};
use mgtlab::spectral::{synthesize_data, DataSpec, Grid, Profile};
use mgtlab::Params;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Arc::new(Grid::radial_composite(1, 12.0, 12, 16)?);
    let defect = Profile::Gaussian { amplitude: 1.0, width: 4.0 };
    for tau in [0.1, 0.05, 0.025] {
        let params = Params::dissipative(tau, 1.0)?;
        let data = synthesize_data(&grid, &params, &DataSpec::gaussian([1.0, 0.0, 0.0], 0.5).incompatible(defect), 0)?;
        let r = layer_probe(&params, &data, &LayerOptions::new(2.0))?;
        println!(
            "tau {tau:<6} defect {:.3e}  rate x tau {}  fast/signal {:.2e}",
            r.defect_norm,
            r.rate_ratio.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into()),
            r.fast_to_signal
        );
    }
    Ok(())
}
