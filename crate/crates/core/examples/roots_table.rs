//! Characteristic roots across frequencies, with the low and high frequency
//! asymptotics for comparison.

use mgtlab::roots::{asymptotic_roots, mode_roots, Bands};
use mgtlab::Params;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = Params::dissipative(0.1, 1.0)?;
    println!("{:>9} {:>24} {:>12} {:>12}", "|xi|", "complex pair", "real root", "asym. err");
    for k in -6..=6 {
        let xi = 10f64.powf(k as f64 / 2.0);
        let r = mode_roots(&params, xi)?;
        let err = asymptotic_roots(&params, xi, Bands::default())
            .map(|(_, a)| (0..3).map(|i| (a[i] - r.roots[i]).norm() / r.roots[i].norm()).fold(0.0, f64::max));
        println!(
            "{xi:>9.3e} {:>11.4e} {:+11.4e}i {:>12.5e} {:>12}",
            r.roots[0].re,
            r.roots[0].im,
            r.roots[2].re,
            err.map(|e| format!("{e:.2e}")).unwrap_or_else(|| "-".into())
        );
    }
    Ok(())
}
