//! Configuration-driven experiments: run a TOML description, collect CSV and
//! JSON artifacts with a manifest, and render reports.

pub mod config;
pub mod manifest;
pub mod report;
pub mod runner;
pub mod svg;
pub mod table;

pub use config::{Config, Experiment};
pub use manifest::{Check, FittedRate, Manifest, PlotSpec, MANIFEST_FILE};
pub use report::{report, Report};
pub use runner::{compare_csvs, csv_files, gn_solutions, output_root, run, run_into, validate, RunOutcome, OUTPUT_ROOT_ENV};
pub use table::Table;
