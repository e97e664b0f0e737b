//! Interpolation exponents for the nonlinear estimates, in exact rational arithmetic.

use mgtlab::gn::{part1_params, part2_params, GnOptions, Q};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = GnOptions::default();
    for n in 2u32..=4 {
        println!("n = {n}, boundary s = {}", Q::new(n as i64 - 2, 2));
        for k in 0..=6 {
            let s = Q::new(k, 4);
            let p1 = part1_params(n, s, 2, &opts)?;
            let p2 = part2_params(n, s, &opts)?;
            println!(
                "  s = {s:<4} L2 part {:<20?} Sobolev part {:<20?} s* = {}",
                p1.feasibility, p2.feasibility, p2.s_star
            );
        }
    }
    let sol = part2_params(3, Q::new(3, 5), &opts)?;
    println!("\nn = 3, s = 3/5, Sobolev part:");
    for r in &sol.reciprocals {
        println!("  {} = {}", r.name, r.value);
    }
    for b in &sol.betas {
        println!("  {} = {} in [{}, {}]", b.name, b.value, b.lower, b.upper);
    }
    println!("  verified: {}", sol.verify());
    Ok(())
}
