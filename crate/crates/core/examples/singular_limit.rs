//! Distance to the viscous wave solution as the relaxation time shrinks.

use std::sync::Arc;

use mgtlab::limit::{singular_limit_sweep, SweepOptions};
use mgtlab::spectral::{synthesize_data, DataSpec, Grid};
use mgtlab::Params;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let taus = [0.1, 0.05, 0.025, 0.0125];
    let params = Params::dissipative(taus[0], 1.0)?;
    let spec = DataSpec::gaussian([1.0, 0.5, 0.0], 0.5).compatible();
    for dim in [1, 2] {
        let grid = Arc::new(Grid::radial_composite(dim, 12.0, 12, 16)?);
        let data = synthesize_data(&grid, &params, &spec, 0)?;
        let report = singular_limit_sweep(&data, params.delta(), &taus, &SweepOptions::new(40.0))?;
        println!("n = {dim}");
        for e in &report.entries {
            let cols: Vec<String> = e.sup_diff.iter().map(|d| format!("{d:.4e}")).collect();
            println!("  tau {:<7} {}", e.tau, cols.join("  "));
        }
        for (norm, order) in report.norms.iter().zip(&report.orders) {
            println!("  {norm:?} order {}", order.map(|p| format!("{p:.3}")).unwrap_or_else(|| "-".into()));
        }
    }
    Ok(())
}
