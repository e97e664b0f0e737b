//! Runs an experiment config and renders its report; defaults to the shipped roots audit.

use std::path::PathBuf;

use mgtlab::experiment::{report, run, Config};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/c01_roots_audit.toml"));
    let cfg = Config::load(&path, &[])?;
    let root = std::env::temp_dir().join("mgtlab-example");
    let outcome = run(&cfg, &root)?;
    let rep = report(&outcome.manifest_path, true)?;
    print!("{}", rep.summary);
    println!("written to {}", outcome.dir.display());
    Ok(())
}
