//! Exact per-mode propagation against a Runge-Kutta integration of the same ODE.

use mgtlab::propagator::kernel_rk4_audit;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let modes: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(100);
    for seed in 0..3 {
        let worst = kernel_rk4_audit(modes, 10.0, seed)?;
        println!("seed {seed}: {modes} modes, largest relative mismatch {worst:.3e}");
    }
    Ok(())
}
