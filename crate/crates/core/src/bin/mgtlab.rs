use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mgtlab::experiment::config::{AsymptoticSpec, OutputSpec, RootAuditSpec, XiRange};
use mgtlab::experiment::{gn_solutions, output_root, report, run, Config, Experiment, RunOutcome};
use mgtlab::gn::{GnOptions, Rational};
use mgtlab::{Params, Result};

#[derive(Parser)]
#[command(name = "mgtlab", version, about = "Third-order acoustic wave experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (TOML).
    config: PathBuf,
    /// Override a key, e.g. `--set params.tau=0.05`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Directory under which the run directory is created.
    #[arg(long, env = "MGTLAB_OUTPUT_ROOT")]
    output_root: Option<PathBuf>,
    /// Skip the summary and plots after the run.
    #[arg(long)]
    no_report: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run any experiment configuration.
    Run(RunArgs),
    /// Summarise a finished run and render its plots.
    Report {
        manifest: PathBuf,
        #[arg(long)]
        no_plots: bool,
    },
    /// Root table for one parameter pair, with the random audit.
    Roots {
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1e-3)]
        xi_min: f64,
        #[arg(long, default_value_t = 1e3)]
        xi_max: f64,
        #[arg(long, default_value_t = 61)]
        points: usize,
        /// Random parameter samples for the residual and identity audit; 0 skips it.
        #[arg(long, default_value_t = 0)]
        audit: usize,
        #[arg(long, env = "MGTLAB_OUTPUT_ROOT")]
        output_root: Option<PathBuf>,
    },
    /// Exact interpolation parameters as JSON.
    GnCheck {
        #[arg(long)]
        n: u32,
        /// Regularity as a decimal or fraction, e.g. 0.6 or 3/5.
        #[arg(long)]
        s: String,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        m: Vec<u32>,
    },
    LinearRun(RunArgs),
    DecayFit(RunArgs),
    LimitSweep(RunArgs),
    LayerProbe(RunArgs),
    EnergyCheck(RunArgs),
    JmgtRun(RunArgs),
    Expansion(RunArgs),
}

fn finish(outcome: &RunOutcome, with_report: bool) -> Result<bool> {
    if with_report {
        let r = report(&outcome.manifest_path, true)?;
        print!("{}", r.summary);
    } else {
        for c in &outcome.manifest.checks {
            println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
    }
    println!("manifest: {}", outcome.manifest_path.display());
    Ok(outcome.manifest.all_passed)
}

fn run_args(args: &RunArgs, kind: Option<&str>) -> Result<bool> {
    let cfg = Config::load(&args.config, &args.overrides)?;
    if let Some(k) = kind {
        if cfg.experiment.kind() != k {
            return Err(mgtlab::Error::Config(format!("{} describes a {} experiment, not {k}", args.config.display(), cfg.experiment.kind())));
        }
    }
    let outcome = run(&cfg, &output_root(args.output_root.as_deref()))?;
    finish(&outcome, !args.no_report)
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(a) => run_args(&a, None),
        Command::LinearRun(a) => run_args(&a, Some("linear-run")),
        Command::DecayFit(a) => run_args(&a, Some("decay-fit")),
        Command::LimitSweep(a) => run_args(&a, Some("limit-sweep")),
        Command::LayerProbe(a) => run_args(&a, Some("layer-probe")),
        Command::EnergyCheck(a) => run_args(&a, Some("energy-check")),
        Command::JmgtRun(a) => run_args(&a, Some("jmgt-run")),
        Command::Expansion(a) => run_args(&a, Some("expansion")),
        Command::Report { manifest, no_plots } => {
            let r = report(&manifest, !no_plots)?;
            print!("{}", r.summary);
            Ok(r.missing.is_empty())
        }
        Command::Roots { tau, delta, xi_min, xi_max, points, audit, output_root: root } => {
            let cfg = Config {
                name: Some("roots".into()),
                seed: 0,
                params: Some(Params::new(tau, delta)?),
                grid: None,
                data: None,
                experiment: Experiment::Roots {
                    xi: Some(XiRange { min: xi_min, max: xi_max, points, linear: false }),
                    audit: (audit > 0).then_some(RootAuditSpec { samples: audit, tolerance: 1e-10 }),
                    asymptotics: None::<AsymptoticSpec>,
                },
                output: OutputSpec::default(),
            };
            let outcome = run(&cfg, &output_root(root.as_deref()))?;
            finish(&outcome, false)
        }
        Command::GnCheck { n, s, m } => {
            let s: Rational = s.parse()?;
            let sols = gn_solutions(n, s, &m, &GnOptions::default())?;
            println!("{}", serde_json::to_string_pretty(&sols)?);
            Ok(sols.iter().all(|x| !x.is_feasible() || x.verify()))
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
