//! Small-data nonlinear run on a 2D torus: boundedness of the evolution norm and
//! fitted decay rates. Pass `quick` for a coarse grid and short horizon;
//! optional numbers set the box length and the Gaussian width.

use std::sync::Arc;
use std::time::Instant;

use mgtlab::jmgt::{smalldata_study, SmallDataOptions};
use mgtlab::params::Params;
use mgtlab::spectral::{DataSpec, Grid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let quick = args.iter().any(|a| a == "quick");
    let num = |i: usize, d: f64| args.iter().filter(|a| *a != "quick").nth(i).and_then(|a| a.parse().ok()).unwrap_or(d);
    let (n, t_end) = if quick { (32, 20.0) } else { (128, 200.0) };
    let (length, width) = (num(0, 300.0), num(1, 3.0));
    let params = Params::dissipative(0.1, 1.0)?.with_b_over_a(2.0);
    let grid = Arc::new(Grid::torus(2, n, length)?);
    let shape = DataSpec::gaussian([1.0, 1.0, 0.0], width).compatible().zero_mean();
    let opts = SmallDataOptions::new(shape, 0.6, t_end, 0.01);
    let start = Instant::now();
    for e in smalldata_study(&params, &grid, &[1e-3], &opts)? {
        println!("eps {:e}: {:?}, xs ratio {:?}", e.epsilon, e.status, e.xs_ratio);
        for r in &e.rates {
            println!("  {:<16} fitted {:+.3} expected {:+.3} {}", r.norm, r.fit.exponent_or_rate, r.expected, if r.within { "ok" } else { "off" });
        }
        for r in &e.forcing_rates {
            println!("  {:<16} fitted {:+.3} audited {:+.3} {}", r.norm, r.fit.exponent_or_rate, r.audited, if r.no_slower { "ok" } else { "slower" });
        }
        if let Some(f) = &e.solution_fit {
            println!("  solution {:?} exponent {:+.3} rms {:.3}", f.model, f.exponent_or_rate, f.rms_residual);
        }
    }
    println!("elapsed {:.1} s", start.elapsed().as_secs_f64());
    Ok(())
}
