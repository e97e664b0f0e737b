//! Per-mode energy against the forcing bound, for the stated constant and twice it.

use mgtlab::limit::{energy_inequality_check, EnergyLedger, ForcingSpec};
use mgtlab::Params;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let xis: Vec<f64> = (0..20).map(|i| 0.01 * 1000f64.powf(i as f64 / 19.0)).collect();
    for tau in [0.1, 0.05] {
        let params = Params::dissipative(tau, 1.0)?;
        let ledgers = energy_inequality_check(&params, &ForcingSpec::default(), &xis, 20.0)?;
        let relative = |pick: fn(&EnergyLedger) -> f64| {
            ledgers.iter().map(|l| pick(l) / if l.scale > 0.0 { l.scale } else { 1.0 }).fold(f64::INFINITY, f64::min)
        };
        let stated = relative(|l| l.min_margin);
        let doubled = relative(|l| l.integrated_min_margin);
        let worst = ledgers.iter().max_by(|a, b| a.worst_ratio().total_cmp(&b.worst_ratio())).expect("modes");
        println!("tau {tau}: relative margin {stated:+.4e}, with factor 2 {doubled:+.4e}");
        println!("  worst lhs/rhs {:.4} at |xi| = {:.3}", worst.worst_ratio(), worst.xi_abs);
    }
    Ok(())
}
