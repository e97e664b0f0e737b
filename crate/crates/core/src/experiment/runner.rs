//! Dispatches a configuration to the owning module and writes its artifacts.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use super::config::{
    AsymptoticSpec, Config, EpsilonOrderSpec, Experiment, FitSpec, GrowthRatioSpec, LimitProbeSpec, OrderCheck,
    ResidualSpec, RootAuditSpec, Rk4AuditSpec, ScanSpec, Solver, TimeGrid, XiRange,
};
use super::manifest::{module_versions, Check, FittedRate, Manifest, OutputFile, PlotSpec, Timing};
use super::table::{fmt_f64, Table};
use crate::decay::{dn_coefficient, fit_rate, window, FitModel};
use crate::error::{Error, Result};
use crate::gn::{decay_exponent_audit, part1_params, part2_params, ExponentSolution, GnOptions, Rational};
use crate::jmgt::{epsilon_order, smalldata_study, EntryStatus, SmallDataEntry, SmallDataOptions};
use crate::limit::{
    energy_inequality_check, expansion_terms, layer_probe, loglog_slope, nonlinear_limit_probe, singular_limit_sweep,
    ForcingSpec, LayerOptions, NonlinearProbeOptions, SweepOptions,
};
use crate::params::{Params, Regime};
use crate::propagator::{kernel_rk4_audit, kuznetsov_evolve, mgt_evolve, GridPropagator, NormKey, Recording};
use crate::roots::{asymptotic_audit, mode_roots, root_sample_audit};
use crate::spectral::{norm, synthesize_data, DataSpec, FieldTriple, Grid, GridSpec, NormSpec, Profile, Slot};

/// Environment variable naming the directory under which runs are written.
pub const OUTPUT_ROOT_ENV: &str = "MGTLAB_OUTPUT_ROOT";

/// `explicit`, else `$MGTLAB_OUTPUT_ROOT`, else `./runs`.
pub fn output_root(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"))
}

/// Where a finished run lives.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest_path: PathBuf,
    pub manifest: Manifest,
}

/// Accumulates artifacts and verdicts while one experiment runs.
struct Ctx {
    dir: PathBuf,
    seed: u64,
    snapshots: bool,
    outputs: Vec<OutputFile>,
    rates: Vec<FittedRate>,
    checks: Vec<Check>,
    plots: Vec<PlotSpec>,
    timings: Vec<Timing>,
    tags: Vec<String>,
}

impl Ctx {
    fn path(&self, name: &str) -> Result<PathBuf> {
        let p = self.dir.join(name);
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        Ok(p)
    }

    fn csv(&mut self, name: &str, description: &str, table: &Table) -> Result<()> {
        table.write(&self.path(name)?)?;
        self.outputs.push(OutputFile { path: name.into(), description: description.into() });
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, description: &str, value: &T) -> Result<()> {
        let p = self.path(name)?;
        std::fs::write(&p, serde_json::to_string_pretty(value)?).map_err(|e| Error::io(&p, e))?;
        self.outputs.push(OutputFile { path: name.into(), description: description.into() });
        Ok(())
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f(self);
        self.timings.push(Timing { stage: stage.into(), seconds: start.elapsed().as_secs_f64() });
        out
    }

    fn fail(&mut self, name: impl Into<String>, err: &Error) {
        self.checks.push(Check::flag(name, false, err.to_string()));
    }
}

/// Rejects configurations whose parameter combinations the experiment cannot use,
/// before anything is written.
pub fn validate(cfg: &Config) -> Result<()> {
    match &cfg.experiment {
        Experiment::EnergyCheck { taus, .. } | Experiment::LayerProbe { taus, .. } => {
            let p = cfg.params()?;
            p.ensure_dissipative()?;
            for &tau in taus {
                p.with_tau(tau)?.ensure_dissipative()?;
            }
            if taus.is_empty() {
                return Err(Error::Config("taus must not be empty".into()));
            }
        }
        Experiment::LimitSweep { taus, .. } | Experiment::Expansion { taus, .. } => {
            let p = cfg.params()?;
            if !(p.delta() > 0.0) {
                return Err(Error::Precondition(format!("needs delta > 0, got {}", p.delta())));
            }
            if taus.is_empty() || taus.iter().any(|t| !(*t > 0.0 && *t < p.delta())) {
                return Err(Error::Precondition(format!(
                    "every tau must satisfy 0 < tau < delta = {}, got {taus:?}",
                    p.delta()
                )));
            }
        }
        Experiment::JmgtRun { epsilons, .. } => {
            cfg.params()?.ensure_dissipative()?;
            if epsilons.is_empty() {
                return Err(Error::Config("epsilons must not be empty".into()));
            }
        }
        Experiment::Roots { .. } | Experiment::GnCheck { .. } => {}
        Experiment::LinearRun { .. } | Experiment::DecayFit { .. } => {
            cfg.params()?;
        }
    }
    Ok(())
}

/// Runs `cfg` below `root` and writes the manifest last.
pub fn run(cfg: &Config, root: &Path) -> Result<RunOutcome> {
    let dir = root.join(cfg.output_dir_name());
    run_into(cfg, &dir)
}

/// Runs `cfg` with its output directory fixed to `dir`.
pub fn run_into(cfg: &Config, dir: &Path) -> Result<RunOutcome> {
    validate(cfg)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stale = dir.join(super::manifest::MANIFEST_FILE);
    if stale.exists() {
        std::fs::remove_file(&stale).map_err(|e| Error::io(&stale, e))?;
    }
    let start = Instant::now();
    let mut ctx = Ctx {
        dir: dir.to_path_buf(),
        seed: cfg.seed,
        snapshots: cfg.output.snapshots,
        outputs: Vec::new(),
        rates: Vec::new(),
        checks: Vec::new(),
        plots: Vec::new(),
        timings: Vec::new(),
        tags: Vec::new(),
    };
    dispatch(cfg, &mut ctx)?;
    if cfg.output.check_determinism {
        let again = dir.join(".rerun");
        let mut copy = cfg.clone();
        copy.output.check_determinism = false;
        let check = ctx.timed("determinism rerun", |_| {
            let outcome = run_into(&copy, &again)?;
            let diffs = compare_csvs(dir, &outcome.dir)?;
            Ok(Check::flag(
                "CSV outputs identical on rerun",
                diffs.is_empty(),
                if diffs.is_empty() { "all CSV files byte-identical".to_string() } else { format!("differ: {}", diffs.join(", ")) },
            ))
        })?;
        std::fs::remove_dir_all(&again).map_err(|e| Error::io(&again, e))?;
        ctx.checks.push(check);
    }
    ctx.timings.push(Timing { stage: "total".into(), seconds: start.elapsed().as_secs_f64() });
    let manifest = Manifest {
        name: cfg.name.clone().unwrap_or_else(|| cfg.output_dir_name()),
        kind: cfg.experiment.kind().into(),
        seed: cfg.seed,
        config: serde_json::to_value(cfg)?,
        versions: module_versions(),
        outputs: ctx.outputs,
        fitted_rates: ctx.rates,
        all_passed: ctx.checks.iter().all(|c| c.passed),
        checks: ctx.checks,
        plots: ctx.plots,
        timings: ctx.timings,
        tags: ctx.tags,
    };
    let manifest_path = manifest.write_atomic(dir)?;
    Ok(RunOutcome { dir: dir.to_path_buf(), manifest_path, manifest })
}

/// Relative paths of every CSV file below `dir`, sorted.
pub fn csv_files(dir: &Path) -> Result<Vec<PathBuf>> {
    fn walk(base: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
        for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let p = entry.map_err(|e| Error::io(dir, e))?.path();
            if p.is_dir() {
                if p.file_name().is_some_and(|n| n != ".rerun") {
                    walk(base, &p, out)?;
                }
            } else if p.extension().is_some_and(|e| e == "csv") {
                out.push(p.strip_prefix(base).expect("below base").to_path_buf());
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out)?;
    out.sort();
    Ok(out)
}

/// CSV files that are missing from one directory or differ in any byte.
pub fn compare_csvs(a: &Path, b: &Path) -> Result<Vec<String>> {
    let (fa, fb) = (csv_files(a)?, csv_files(b)?);
    let mut diffs: Vec<String> = fa.iter().chain(&fb).filter(|f| !(fa.contains(f) && fb.contains(f))).map(|f| f.display().to_string()).collect();
    for f in fa.iter().filter(|f| fb.contains(f)) {
        let read = |d: &Path| std::fs::read(d.join(f)).map_err(|e| Error::io(d.join(f), e));
        if read(a)? != read(b)? {
            diffs.push(f.display().to_string());
        }
    }
    diffs.sort();
    diffs.dedup();
    Ok(diffs)
}

fn dispatch(cfg: &Config, ctx: &mut Ctx) -> Result<()> {
    match &cfg.experiment {
        Experiment::Roots { xi, audit, asymptotics } => run_roots(cfg, ctx, xi.as_ref(), audit.as_ref(), asymptotics.as_ref()),
        Experiment::LinearRun { times, solver, norms, rk4_audit } => {
            run_linear(cfg, ctx, times, *solver, norms, rk4_audit.as_ref())
        }
        Experiment::DecayFit { times, grids, fits, growth_ratios } => run_decay(cfg, ctx, times, grids, fits, growth_ratios),
        Experiment::LimitSweep { taus, sweep, grids, checks } => run_sweep(cfg, ctx, taus, sweep, grids, checks),
        Experiment::LayerProbe { taus, layer, rate_tolerance, compatible_max, residual } => {
            run_layer(cfg, ctx, taus, layer, *rate_tolerance, *compatible_max, residual.as_ref())
        }
        Experiment::EnergyCheck { taus, xi, forcing, t_end, tolerance } => {
            run_energy(cfg, ctx, taus, xi, forcing, *t_end, *tolerance)
        }
        Experiment::JmgtRun { .. } => run_jmgt(cfg, ctx),
        Experiment::GnCheck { n, s, m, scan, eps0, s_star_fraction } => {
            run_gn(ctx, n, s, m, scan.as_ref(), eps0, s_star_fraction)
        }
        Experiment::Expansion { taus, t, order, expected_order, tolerance } => {
            run_expansion(cfg, ctx, taus, *t, *order, *expected_order, *tolerance)
        }
    }
}

fn build_grid(spec: &GridSpec) -> Result<Arc<Grid>> {
    Ok(Arc::new(Grid::from_spec(spec)?))
}

fn grids_or_default(cfg: &Config, grids: &[GridSpec]) -> Result<Vec<GridSpec>> {
    if grids.is_empty() {
        Ok(vec![cfg.grid_spec()?])
    } else {
        Ok(grids.to_vec())
    }
}

fn slug(text: &str) -> String {
    let mut s: String = text.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' }).collect();
    while s.contains("__") {
        s = s.replace("__", "_");
    }
    s.trim_matches('_').to_string()
}

fn row_of(values: impl IntoIterator<Item = f64>) -> Vec<String> {
    values.into_iter().map(fmt_f64).collect()
}

// roots

fn run_roots(
    cfg: &Config,
    ctx: &mut Ctx,
    xi: Option<&XiRange>,
    audit: Option<&RootAuditSpec>,
    asymptotics: Option<&AsymptoticSpec>,
) -> Result<()> {
    let params = cfg.params()?;
    let range = xi.cloned().unwrap_or(XiRange { min: 1e-3, max: 1e3, points: 61, linear: false });
    let xis = range.values()?;
    let mut table = Table::new(["xi", "re_l1", "im_l1", "re_l2", "im_l2", "re_l3", "im_l3", "discriminant", "degenerate"]);
    let mut worst_real = f64::NEG_INFINITY;
    ctx.timed("root table", |_| {
        for &x in &xis {
            let m = mode_roots(&params, x)?;
            let mut row = row_of([x]);
            for z in m.roots {
                row.extend(row_of([z.re, z.im]));
            }
            row.push(fmt_f64(m.discriminant));
            row.push(m.degenerate.to_string());
            table.push(row);
            if x > 0.0 {
                worst_real = worst_real.max(m.max_real_part());
            }
        }
        Ok(())
    })?;
    ctx.csv("roots.csv", "roots of the characteristic cubic per frequency", &table)?;
    if params.regime() == Regime::Dissipative && worst_real.is_finite() {
        ctx.checks.push(Check::flag(
            "all real parts negative for |xi| > 0",
            worst_real < 0.0,
            format!("largest real part {worst_real:.3e}"),
        ));
    }
    if let Some(a) = audit {
        let seed = ctx.seed;
        let res = ctx.timed("random root audit", |_| root_sample_audit(a.samples, seed))?;
        ctx.json("root_audit.json", "worst errors over random parameter samples", &res)?;
        ctx.checks.push(Check::at_most("cubic residual (relative)", res.worst_residual, a.tolerance));
        ctx.checks.push(Check::at_most("root sum identity", res.worst_sum, a.tolerance));
        ctx.checks.push(Check::at_most("root product identity", res.worst_product, a.tolerance));
        ctx.checks.push(Check::flag(
            "sampled real parts negative",
            res.max_real_part < 0.0,
            format!("largest real part {:.3e}", res.max_real_part),
        ));
    }
    if let Some(a) = asymptotics {
        let res = ctx.timed("asymptotic audit", |_| asymptotic_audit(&params, (a.low_min, a.low_max), a.points, a.high_xi))?;
        let mut t = Table::new(["xi", "low_frequency_error"]);
        for (x, e) in res.low_xi.iter().zip(&res.low_error) {
            t.push_f64(&[*x, *e]);
        }
        ctx.csv("asymptotics.csv", "error of the small-frequency root expansion", &t)?;
        ctx.json("asymptotics.json", "small- and large-frequency expansion audit", &res)?;
        ctx.plots.push(PlotSpec::Order {
            file: "asymptotics.svg".into(),
            data: "asymptotics.csv".into(),
            x: "xi".into(),
            ys: vec!["low_frequency_error".into()],
            slopes: vec![Some(res.low_order)],
        });
        ctx.checks.push(Check::near("small-frequency expansion order", res.low_order, a.expected_order, a.order_tolerance));
        ctx.checks.push(Check::at_most("large-frequency real root relative error", res.high_relative_error, a.high_tolerance));
    }
    Ok(())
}

// linear run

fn parse_keys(norms: &[String]) -> Result<Vec<NormKey>> {
    let mut keys: Vec<NormKey> = Vec::new();
    for n in norms {
        let k: NormKey = n.parse()?;
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    Ok(keys)
}

fn trajectory_table(times: &[f64], keys: &[NormKey], ledger: &[std::collections::BTreeMap<String, f64>]) -> Table {
    let names: Vec<String> = keys.iter().map(|k| k.to_string()).collect();
    let mut table = Table::new(std::iter::once("t".to_string()).chain(names.iter().cloned()));
    for (t, row) in times.iter().zip(ledger) {
        table.push(row_of(std::iter::once(*t).chain(names.iter().map(|n| row[n]))));
    }
    table
}

fn run_linear(
    cfg: &Config,
    ctx: &mut Ctx,
    times: &TimeGrid,
    solver: Solver,
    norms: &[String],
    rk4: Option<&Rk4AuditSpec>,
) -> Result<()> {
    let params = cfg.params()?;
    let grid = build_grid(&cfg.grid_spec()?)?;
    let data = synthesize_data(&grid, &params, &cfg.data_spec()?, cfg.seed)?;
    let keys = parse_keys(norms)?;
    let times = times.values()?;
    let rec = Recording { norms: keys.clone(), keep_snapshots: ctx.snapshots };
    let traj = ctx.timed("evolution", |_| match solver {
        Solver::ThirdOrder => mgt_evolve(&params, &data, &times, &rec),
        Solver::ViscousWave => kuznetsov_evolve(&params, &data, &times, &rec),
    })?;
    if solver == Solver::ThirdOrder {
        let degenerate = GridPropagator::new(&params, grid.clone())?.degenerate_count();
        if degenerate > 0 {
            ctx.tags.push(format!("{degenerate} modes with coincident roots"));
        }
    }
    ctx.csv("norms.csv", "norm ledger over time", &trajectory_table(&traj.times, &keys, &traj.ledger))?;
    let finite = traj.ledger.iter().all(|r| r.values().all(|v| v.is_finite()));
    ctx.checks.push(Check::flag("norms finite", finite, format!("{} samples", traj.times.len())));
    for (i, snap) in traj.snapshots.iter().enumerate() {
        write_snapshot(ctx, &format!("snapshots/t{i:04}"), snap)?;
    }
    if let Some(a) = rk4 {
        let seed = ctx.seed;
        let worst = ctx.timed("kernel against Runge-Kutta", |_| kernel_rk4_audit(a.modes, a.t_end, seed))?;
        ctx.json(
            "rk4_audit.json",
            "largest kernel/Runge-Kutta discrepancy over random modes",
            &serde_json::json!({ "modes": a.modes, "t_end": a.t_end, "seed": seed, "worst": worst }),
        )?;
        ctx.checks.push(Check::at_most("kernel vs Runge-Kutta", worst, a.tolerance));
    }
    Ok(())
}

/// One CSV per slot with columns `mode, re, im`.
fn write_snapshot(ctx: &mut Ctx, stem: &str, state: &FieldTriple) -> Result<()> {
    for slot in Slot::ALL {
        let mut t = Table::new(["mode", "re", "im"]);
        for (k, c) in state.slot(slot).coeffs().iter().enumerate() {
            t.push(vec![k.to_string(), fmt_f64(c.re), fmt_f64(c.im)]);
        }
        ctx.csv(&format!("{stem}_{}.csv", slot.name()), "field coefficients", &t)?;
    }
    Ok(())
}

// decay fit

fn applies(dims: &Option<Vec<usize>>, dim: usize) -> bool {
    dims.as_ref().is_none_or(|d| d.contains(&dim))
}

fn run_decay(
    cfg: &Config,
    ctx: &mut Ctx,
    times: &TimeGrid,
    grids: &[GridSpec],
    fits: &[FitSpec],
    ratios: &[GrowthRatioSpec],
) -> Result<()> {
    let params = cfg.params()?;
    let spec = cfg.data_spec()?;
    let times = times.values()?;
    for (gi, gspec) in grids_or_default(cfg, grids)?.iter().enumerate() {
        let grid = build_grid(gspec)?;
        let dim = grid.dim();
        let my_fits: Vec<&FitSpec> = fits.iter().filter(|f| applies(&f.dims, dim)).collect();
        let my_ratios: Vec<&GrowthRatioSpec> = ratios.iter().filter(|r| applies(&r.dims, dim)).collect();
        let names: Vec<String> = my_fits.iter().map(|f| f.norm.clone()).chain(my_ratios.iter().map(|r| r.norm.clone())).collect();
        let keys = parse_keys(&names)?;
        let data = synthesize_data(&grid, &params, &spec, cfg.seed)?;
        let traj = ctx.timed(&format!("evolution n={dim}"), |_| mgt_evolve(&params, &data, &times, &Recording::norms(keys.clone())))?;
        let file = format!("decay_g{gi}_n{dim}.csv");
        ctx.csv(&file, &format!("norm ledger, dimension {dim}"), &trajectory_table(&traj.times, &keys, &traj.ledger))?;
        for f in my_fits {
            let key: NormKey = f.norm.parse()?;
            let label = format!("n={dim} {key} {}", model_name(f.model));
            let series = traj.series(&key).expect("recorded");
            let (t, y) = window(&traj.times, &series, f.window[0], f.window[1]);
            let fit = match fit_rate(&t, &y, f.model) {
                Ok(fit) => fit,
                Err(e) => {
                    ctx.fail(label, &e);
                    continue;
                }
            };
            let rate = FittedRate::new(label.clone(), &fit, f.expected);
            if let (Some(e), Some(tol)) = (f.expected, f.tolerance) {
                ctx.checks.push(Check::near(format!("{label} exponent"), fit.exponent_or_rate, e, tol));
            }
            if let Some(max) = f.max_residual {
                ctx.checks.push(Check::below(format!("{label} residual"), fit.rms_residual, max));
            }
            ctx.plots.push(PlotSpec::RateFit {
                file: format!("fit_g{gi}_{}.svg", slug(&format!("{key}_{}", model_name(f.model)))),
                data: file.clone(),
                x: "t".into(),
                y: key.to_string(),
                fit: rate.clone(),
            });
            ctx.rates.push(rate);
        }
        for r in my_ratios {
            let key: NormKey = r.norm.parse()?;
            let series = traj.series(&key).expect("recorded");
            let (t, y) = window(&traj.times, &series, r.window[0], r.window[1]);
            let ratio: Vec<f64> = t.iter().zip(&y).map(|(t, y)| y / dn_coefficient(dim, *t)).collect();
            let mut table = Table::new(["t", "ratio"]);
            for (t, q) in t.iter().zip(&ratio) {
                table.push_f64(&[*t, *q]);
            }
            let name = format!("ratio_g{gi}_n{dim}_{}.csv", slug(&key.to_string()));
            ctx.csv(&name, "norm over the growth coefficient", &table)?;
            let lo = ratio.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let label = format!("n={dim} {key} / growth coefficient spread");
            if ratio.is_empty() || !(lo > 0.0) {
                ctx.checks.push(Check::flag(label, false, "empty window or vanishing norm"));
            } else {
                ctx.checks.push(Check::below(label, hi / lo, r.max_spread));
            }
        }
    }
    Ok(())
}

fn model_name(m: FitModel) -> &'static str {
    match m {
        FitModel::Power => "power",
        FitModel::LogHalf => "loghalf",
        FitModel::Exp => "exp",
    }
}

// limit sweep

fn run_sweep(
    cfg: &Config,
    ctx: &mut Ctx,
    taus: &[f64],
    sweep: &SweepOptions,
    grids: &[GridSpec],
    checks: &[OrderCheck],
) -> Result<()> {
    let params = cfg.params()?;
    let spec = cfg.data_spec()?;
    for (gi, gspec) in grids_or_default(cfg, grids)?.iter().enumerate() {
        let grid = build_grid(gspec)?;
        let dim = grid.dim();
        let data = synthesize_data(&grid, &params, &spec, cfg.seed)?;
        let report = ctx.timed(&format!("sweep n={dim}"), |_| singular_limit_sweep(&data, params.delta(), taus, sweep))?;
        let stem = format!("sweep_g{gi}_n{dim}");
        let mut header = vec!["tau".to_string()];
        header.extend(report.norms.iter().map(|n| format!("sup_{n}")));
        header.extend(report.norms.iter().map(|n| format!("argmax_{n}")));
        let mut table = Table::new(header);
        for e in &report.entries {
            table.push(row_of(std::iter::once(e.tau).chain(e.sup_diff.iter().copied()).chain(e.argmax.iter().copied())));
        }
        ctx.csv(&format!("{stem}.csv"), &format!("sup-in-time differences, dimension {dim}"), &table)?;
        ctx.json(&format!("{stem}.json"), "sweep report with fitted orders", &report)?;
        ctx.plots.push(PlotSpec::Order {
            file: format!("{stem}.svg"),
            data: format!("{stem}.csv"),
            x: "tau".into(),
            ys: report.norms.iter().map(|n| format!("sup_{n}")).collect(),
            slopes: report.orders.clone(),
        });
        for c in checks {
            let label = format!("n={dim} {} convergence order", c.norm);
            match report.order(c.norm) {
                Some(p) => ctx.checks.push(Check::near(label, p, c.expected, c.tolerance)),
                None => ctx.checks.push(Check::flag(label, false, "norm not recorded or no fit")),
            }
        }
    }
    Ok(())
}

// layer probe

/// Same `(psi_0, psi_1)`, with the third datum made compatible and no defect.
fn defect_free(spec: &DataSpec) -> DataSpec {
    DataSpec { compatible: true, defect: Profile::Zero, ..*spec }
}

/// `||psi^tau - phi - tau psi^{I,1}||_2` at time `t`, or with more terms for larger `order`.
fn expansion_residual(params: &Params, data: &FieldTriple, t: f64, order: usize) -> Result<f64> {
    let exact = mgt_evolve(params, data, &[t], &Recording::default().with_snapshots())?;
    let times: Vec<f64> = (1..=4).map(|i| t * i as f64 / 4.0).collect();
    let terms = expansion_terms(data, params.delta(), params.tau(), order, &times)?;
    let approx = terms.truncation(times.len() - 1)?;
    norm(&exact.snapshots[0].u.sub(&approx)?, NormSpec::L2)
}

fn residual_sweep(
    cfg: &Config,
    ctx: &mut Ctx,
    spec: &DataSpec,
    taus: &[f64],
    t: f64,
    order: usize,
    file: &str,
) -> Result<Option<f64>> {
    let params = cfg.params()?;
    let grid = build_grid(&cfg.grid_spec()?)?;
    let residuals = ctx.timed("expansion residual", |_| {
        taus.iter()
            .map(|&tau| {
                let p = params.with_tau(tau)?;
                let data = synthesize_data(&grid, &p, spec, cfg.seed)?;
                expansion_residual(&p, &data, t, order)
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    let mut table = Table::new(["tau", "residual"]);
    for (tau, r) in taus.iter().zip(&residuals) {
        table.push_f64(&[*tau, *r]);
    }
    ctx.csv(file, &format!("expansion residual at t = {t} with {order} terms"), &table)?;
    let slope = loglog_slope(taus, &residuals);
    ctx.plots.push(PlotSpec::Order {
        file: file.replace(".csv", ".svg"),
        data: file.into(),
        x: "tau".into(),
        ys: vec!["residual".into()],
        slopes: vec![slope],
    });
    Ok(slope)
}

fn run_layer(
    cfg: &Config,
    ctx: &mut Ctx,
    taus: &[f64],
    layer: &LayerOptions,
    rate_tolerance: f64,
    compatible_max: f64,
    residual: Option<&ResidualSpec>,
) -> Result<()> {
    let params = cfg.params()?;
    let grid = build_grid(&cfg.grid_spec()?)?;
    let spec = cfg.data_spec()?;
    for (i, &tau) in taus.iter().enumerate() {
        let p = params.with_tau(tau)?;
        let data = synthesize_data(&grid, &p, &spec, cfg.seed)?;
        let report = ctx.timed(&format!("layer tau={tau}"), |_| layer_probe(&p, &data, layer))?;
        let file = format!("layer_tau{i}.csv");
        let mut table = Table::new(["t", "projection", "fast"]);
        for (j, t) in report.times.iter().enumerate() {
            let g = report.projection.get(j).copied().unwrap_or(0.0);
            let f = report.fast.get(j).copied().unwrap_or(0.0);
            table.push_f64(&[*t, g, f]);
        }
        ctx.csv(&file, &format!("initial-layer projection, tau = {tau}"), &table)?;
        ctx.json(&format!("layer_tau{i}.json"), "layer report", &report)?;
        let label = format!("tau={tau} fast rate times tau");
        match (report.rate_ratio, report.fit) {
            (Some(r), Some(fit)) => {
                ctx.checks.push(Check::near(label, r, 1.0, rate_tolerance));
                ctx.rates.push(FittedRate::new(format!("layer tau={tau}"), &fit, Some(1.0 / tau)));
                ctx.plots.push(PlotSpec::Layer {
                    file: format!("layer_tau{i}.svg"),
                    data: file,
                    x: "t".into(),
                    y: "fast".into(),
                    rate: Some(fit.exponent_or_rate),
                    amplitude: Some(fit.amplitude),
                    tau,
                });
            }
            _ => ctx.checks.push(Check::flag(label, false, format!("no layer fitted ({:?})", report.status))),
        }
        let scale = report.defect_norm.max(1.0);
        ctx.checks.push(Check::at_most(format!("tau={tau} initial identity"), report.initial_identity_error / scale, 1e-10));

        let compat = synthesize_data(&grid, &p, &defect_free(&spec), cfg.seed)?;
        let clean = ctx.timed(&format!("compatible companion tau={tau}"), |_| layer_probe(&p, &compat, layer))?;
        ctx.checks.push(Check::at_most(format!("tau={tau} compatible fast-to-signal"), clean.fast_to_signal, compatible_max));
    }
    if let Some(r) = residual {
        let slope = residual_sweep(cfg, ctx, &defect_free(&spec), &r.taus, r.t, 2, "residual.csv")?;
        let label = "expansion residual order";
        match slope {
            Some(s) => ctx.checks.push(Check::near(label, s, r.expected, r.tolerance)),
            None => ctx.checks.push(Check::flag(label, false, "residuals vanish")),
        }
    }
    Ok(())
}

// energy check

fn run_energy(
    cfg: &Config,
    ctx: &mut Ctx,
    taus: &[f64],
    xi: &XiRange,
    forcing: &ForcingSpec,
    t_end: f64,
    tolerance: f64,
) -> Result<()> {
    let params = cfg.params()?;
    let xis = xi.values()?;
    let mut long = Table::new(["tau", "xi", "t", "lhs", "rhs", "margin", "relative_margin"]);
    for (i, &tau) in taus.iter().enumerate() {
        let p = params.with_tau(tau)?;
        let ledgers = ctx.timed(&format!("energy tau={tau}"), |_| energy_inequality_check(&p, forcing, &xis, t_end))?;
        let mut table = Table::new(["xi", "t", "lhs", "rhs", "margin", "relative_margin"]);
        let mut worst = f64::INFINITY;
        let mut worst_integrated = f64::INFINITY;
        for l in &ledgers {
            let scale = if l.scale > 0.0 { l.scale } else { 1.0 };
            worst = worst.min(l.min_margin / scale);
            worst_integrated = worst_integrated.min(l.integrated_min_margin / scale);
            for j in 0..l.times.len() {
                let row = [l.xi_abs, l.times[j], l.lhs[j], l.rhs[j], l.margin[j], l.margin[j] / scale];
                table.push_f64(&row);
                long.push(row_of(std::iter::once(tau).chain(row)));
            }
        }
        let file = format!("energy_tau{i}.csv");
        ctx.csv(&file, &format!("energy bound per mode, tau = {tau}"), &table)?;
        ctx.plots.push(PlotSpec::Margin {
            file: format!("energy_tau{i}.svg"),
            data: file,
            x: "t".into(),
            y: "relative_margin".into(),
            group: Some("xi".into()),
        });
        ctx.checks.push(Check {
            name: format!("tau={tau} stated energy bound"),
            passed: worst >= -tolerance,
            value: Some(worst),
            expected: Some(0.0),
            tolerance: Some(tolerance),
            detail: format!("smallest relative margin {worst:.4e} over {} modes", ledgers.len()),
        });
        ctx.checks.push(Check {
            name: format!("tau={tau} energy bound with factor 2"),
            passed: worst_integrated >= -2.0 * tolerance,
            value: Some(worst_integrated),
            expected: Some(0.0),
            tolerance: Some(2.0 * tolerance),
            detail: format!("smallest relative margin {worst_integrated:.4e}"),
        });
    }
    ctx.csv("energy.csv", "energy bound for every tau and mode", &long)?;
    Ok(())
}

// nonlinear small data

fn run_jmgt(cfg: &Config, ctx: &mut Ctx) -> Result<()> {
    let Experiment::JmgtRun {
        epsilons,
        s,
        t_end,
        dt,
        samples,
        fit_from,
        data_threshold,
        guard_factor,
        exponent_tolerance,
        bounded_ratio,
        loghalf_tolerance,
        required_norms,
        epsilon_order: eps_order,
        limit_probe,
    } = &cfg.experiment
    else {
        unreachable!("dispatched on kind")
    };
    let params = cfg.params()?;
    let grid = build_grid(&cfg.grid_spec()?)?;
    let shape = cfg.data_spec()?;
    let mut opts = SmallDataOptions::new(shape, *s, *t_end, *dt);
    opts.seed = cfg.seed;
    opts.samples = *samples;
    opts.fit_from = *fit_from;
    opts.data_threshold = *data_threshold;
    opts.guard_factor = *guard_factor;
    opts.loghalf_tolerance = *loghalf_tolerance;
    let entries = ctx.timed("small-data runs", |_| smalldata_study(&params, &grid, epsilons, &opts))?;
    ctx.json("entries.json", "per data size verdicts and fits", &entries)?;
    for (i, e) in entries.iter().enumerate() {
        jmgt_entry(ctx, i, e, required_norms, *exponent_tolerance, *bounded_ratio, *loghalf_tolerance)?;
    }
    if let Some(spec) = eps_order {
        jmgt_epsilon_order(cfg, ctx, &params, &grid, &shape, &opts, spec)?;
    }
    if let Some(spec) = limit_probe {
        jmgt_limit_probe(cfg, ctx, &params, &grid, &shape, epsilons[0], *data_threshold, spec)?;
    }
    Ok(())
}

fn jmgt_entry(
    ctx: &mut Ctx,
    i: usize,
    e: &SmallDataEntry,
    required: &[String],
    exponent_tolerance: f64,
    bounded_ratio: f64,
    loghalf_tolerance: f64,
) -> Result<()> {
    let eps = e.epsilon;
    ctx.tags.extend(e.tags.iter().filter(|t| !ctx.tags.contains(t)).cloned().collect::<Vec<_>>());
    match &e.status {
        EntryStatus::ZeroData => {
            ctx.checks.push(Check::flag(format!("eps={eps} zero data"), true, "trivial solution"));
            return Ok(());
        }
        EntryStatus::Failed { reason } => {
            ctx.checks.push(Check::flag(format!("eps={eps} run completed"), false, reason.clone()));
            return Ok(());
        }
        EntryStatus::Completed => ctx.checks.push(Check::flag(format!("eps={eps} run completed"), true, "no blow-up")),
    }
    let file = format!("jmgt_eps{i}.csv");
    if let Some(series) = &e.series {
        let mut header = vec!["t".to_string()];
        header.extend(series.columns.iter().map(|(k, _)| k.clone()));
        header.extend(["xs".to_string(), "xs_running_sup".to_string()]);
        let mut table = Table::new(header);
        for (j, t) in series.times.iter().enumerate() {
            let vals = std::iter::once(*t)
                .chain(series.columns.iter().map(|(_, v)| v[j]))
                .chain([series.xs[j], series.xs_running_sup[j]]);
            table.push(row_of(vals));
        }
        ctx.csv(&file, &format!("norm ledger, eps = {eps}"), &table)?;
    }
    match e.xs_ratio {
        Some(r) => ctx.checks.push(Check::below(format!("eps={eps} evolution-space sup ratio over last decade"), r, bounded_ratio)),
        None => ctx.checks.push(Check::flag(format!("eps={eps} evolution-space sup ratio"), false, "too few samples")),
    }
    for r in &e.rates {
        let label = format!("eps={eps} {}", r.norm);
        if required.is_empty() || required.contains(&r.norm) {
            ctx.checks.push(Check::near(format!("{label} exponent"), r.fit.exponent_or_rate, r.expected, exponent_tolerance));
        }
        let rate = FittedRate::new(label, &r.fit, Some(r.expected));
        ctx.plots.push(PlotSpec::RateFit {
            file: format!("fit_eps{i}_{}.svg", slug(&r.norm)),
            data: file.clone(),
            x: "t".into(),
            y: r.norm.clone(),
            fit: rate.clone(),
        });
        ctx.rates.push(rate);
    }
    if let Some(fit) = &e.solution_fit {
        let key = "psi:L2";
        let label = format!("eps={eps} {key} {}", model_name(fit.model));
        if fit.model == FitModel::LogHalf {
            ctx.checks.push(Check::below(format!("{label} residual"), fit.rms_residual, loghalf_tolerance));
        } else if let Some(ok) = e.solution_ok {
            ctx.checks.push(Check::flag(format!("{label} exponent"), ok, format!("{:.4}", fit.exponent_or_rate)));
        }
        let rate = FittedRate::new(label, fit, None);
        ctx.plots.push(PlotSpec::RateFit {
            file: format!("fit_eps{i}_solution.svg"),
            data: file.clone(),
            x: "t".into(),
            y: key.into(),
            fit: rate.clone(),
        });
        ctx.rates.push(rate);
    }
    for f in &e.forcing_rates {
        let label = format!("eps={eps} {}", f.norm);
        ctx.checks.push(Check {
            name: format!("{label} no slower than audited exponent"),
            passed: f.fit.exponent_or_rate <= f.audited + exponent_tolerance,
            value: Some(f.fit.exponent_or_rate),
            expected: Some(f.audited),
            tolerance: Some(exponent_tolerance),
            detail: format!("fitted {:.4}, audited {:.4}", f.fit.exponent_or_rate, f.audited),
        });
        ctx.rates.push(FittedRate::new(label, &f.fit, Some(f.audited)));
    }
    if let Some(w) = &e.warning {
        ctx.tags.push(format!("eps={eps}: {w}"));
    }
    Ok(())
}

fn jmgt_epsilon_order(
    cfg: &Config,
    ctx: &mut Ctx,
    params: &Params,
    grid: &Arc<Grid>,
    shape: &DataSpec,
    opts: &SmallDataOptions,
    spec: &EpsilonOrderSpec,
) -> Result<()> {
    let mut o = opts.jmgt();
    o.t_end = spec.t_end;
    let (order, dev) = ctx.timed("nonlinear correction order", |_| epsilon_order(params, grid, shape, cfg.seed, spec.epsilons, &o))?;
    let mut table = Table::new(["epsilon", "deviation"]);
    for (e, d) in spec.epsilons.iter().zip(dev) {
        table.push_f64(&[*e, d]);
    }
    ctx.csv("epsilon_order.csv", "distance between nonlinear and linear solutions", &table)?;
    ctx.checks.push(Check::near("nonlinear correction order in eps", order, spec.expected, spec.tolerance));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn jmgt_limit_probe(
    cfg: &Config,
    ctx: &mut Ctx,
    params: &Params,
    grid: &Arc<Grid>,
    shape: &DataSpec,
    default_eps: f64,
    data_threshold: f64,
    spec: &LimitProbeSpec,
) -> Result<()> {
    let eps = spec.epsilon.unwrap_or(default_eps);
    let data = synthesize_data(grid, params, &shape.scaled(eps), cfg.seed)?;
    let mut o = NonlinearProbeOptions::new(spec.t_end);
    o.data_threshold = data_threshold;
    let report = ctx.timed("nonlinear relaxation probe", |_| nonlinear_limit_probe(params, &data, &spec.taus, &o))?;
    let mut table = Table::new(["tau", "sup_L2"]);
    for (t, d) in report.taus.iter().zip(&report.sup_diff) {
        table.push_f64(&[*t, *d]);
    }
    ctx.csv("limit_probe.csv", "nonlinear relaxation probe", &table)?;
    ctx.json("limit_probe.json", "nonlinear relaxation probe", &report)?;
    ctx.plots.push(PlotSpec::Order {
        file: "limit_probe.svg".into(),
        data: "limit_probe.csv".into(),
        x: "tau".into(),
        ys: vec!["sup_L2".into()],
        slopes: vec![report.observed_order],
    });
    ctx.tags.push(report.tag.clone());
    Ok(())
}

// interpolation parameters

/// Both parts of the parameter search for one `(n, s)`.
pub fn gn_solutions(n: u32, s: Rational, ms: &[u32], opts: &GnOptions) -> Result<Vec<ExponentSolution>> {
    let mut out = ms.iter().map(|&m| part1_params(n, s.0, m, opts)).collect::<Result<Vec<_>>>()?;
    out.push(part2_params(n, s.0, opts)?);
    Ok(out)
}

fn scan_values(scan: &ScanSpec) -> Result<Vec<Rational>> {
    let lo: Rational = scan.s_min.parse()?;
    let hi: Rational = scan.s_max.parse()?;
    let step: Rational = scan.step.parse()?;
    if !(step.0 > num_rational::Ratio::from_integer(0)) || hi < lo {
        return Err(Error::Config("scan needs s_min <= s_max and a positive step".into()));
    }
    let mut out = Vec::new();
    let mut s = lo.0;
    while s <= hi.0 {
        out.push(Rational(s));
        s += step.0;
    }
    Ok(out)
}

fn run_gn(
    ctx: &mut Ctx,
    ns: &[u32],
    ss: &[String],
    ms: &[u32],
    scan: Option<&ScanSpec>,
    eps0: &str,
    fraction: &str,
) -> Result<()> {
    let opts = GnOptions { eps0: eps0.parse::<Rational>()?.0, s_star_fraction: fraction.parse::<Rational>()?.0 };
    let ns: Vec<u32> = if ns.is_empty() { vec![2, 3, 4] } else { ns.to_vec() };
    let mut values: Vec<Rational> = ss.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    if let Some(scan) = scan {
        values.extend(scan_values(scan)?);
    }
    values.sort();
    values.dedup();
    if values.is_empty() {
        return Err(Error::Config("gn-check needs s values or a scan".into()));
    }
    let mut table = Table::new(["n", "s", "part", "m", "feasibility", "interval_lo", "interval_hi", "verified"]);
    let mut all = Vec::new();
    let mut audits = Vec::new();
    let zero = Rational(num_rational::Ratio::from_integer(0));
    let (mut checked, mut unverified) = (0usize, Vec::new());
    ctx.timed("parameter search", |ctx| {
        for &n in &ns {
            let boundary = Rational(num_rational::Ratio::new(n as i64 - 2, 2));
            let mut flips_ok = true;
            let mut detail = Vec::new();
            for &s in values.iter().filter(|s| **s >= zero) {
                let sols = gn_solutions(n, s, ms, &opts)?;
                for sol in &sols {
                    let part = if sol.m.is_some() { "part1" } else { "part2" };
                    table.push(vec![
                        n.to_string(),
                        s.to_string(),
                        part.into(),
                        sol.m.map(|m| m.to_string()).unwrap_or_default(),
                        serde_json::to_value(&sol.feasibility)?.as_str().unwrap_or_default().to_string(),
                        sol.interval.0.to_string(),
                        sol.interval.1.to_string(),
                        sol.verify().to_string(),
                    ]);
                    if sol.is_feasible() && sol.s_star.0 > zero.0 {
                        checked += 1;
                        if !sol.verify() {
                            unverified.push(format!("n={n} {part} m={:?} s={s}", sol.m));
                        }
                    }
                    let want = match sol.m {
                        Some(2) => Some(s > boundary),
                        None => Some(s >= boundary),
                        _ => None,
                    };
                    if let Some(w) = want {
                        if sol.is_feasible() != w {
                            flips_ok = false;
                            detail.push(format!("{part} m={:?} s={s}: feasible={}", sol.m, sol.is_feasible()));
                        }
                    }
                }
                if n >= 2 && s.0 > boundary.0 {
                    audits.push(serde_json::json!({ "n": n, "s": s, "rows": decay_exponent_audit(n, s.0, &opts)? }));
                }
                all.extend(sols);
            }
            ctx.checks.push(Check::flag(
                format!("n={n} feasibility flips at s = {boundary}"),
                flips_ok,
                if detail.is_empty() { "part1 (m=2) feasible iff s > n/2-1, part2 iff s >= n/2-1".into() } else { detail.join("; ") },
            ));
        }
        Ok(())
    })?;
    ctx.checks.push(Check::flag(
        "feasible solutions satisfy every constraint",
        unverified.is_empty(),
        if unverified.is_empty() { format!("{checked} solutions with s* > 0 verified") } else { unverified.join("; ") },
    ));
    ctx.csv("gn.csv", "feasibility per dimension and regularity", &table)?;
    ctx.json("gn.json", "full parameter solutions", &all)?;
    ctx.json("gn_audit.json", "decay exponents of the nonlinearity", &audits)?;
    Ok(())
}

// expansion

fn run_expansion(
    cfg: &Config,
    ctx: &mut Ctx,
    taus: &[f64],
    t: f64,
    order: usize,
    expected: Option<f64>,
    tolerance: f64,
) -> Result<()> {
    let spec = cfg.data_spec()?;
    let slope = residual_sweep(cfg, ctx, &spec, taus, t, order, "expansion.csv")?;
    if let Some(e) = expected {
        let label = format!("residual order with {order} terms");
        match slope {
            Some(s) => ctx.checks.push(Check::near(label, s, e, tolerance)),
            None => ctx.checks.push(Check::flag(label, false, "residuals vanish")),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs_are_file_safe() {
        assert_eq!(slug("psi:Hdot(2.5)"), "psi_Hdot_2.5");
        assert_eq!(slug("psi_t:L2_power"), "psi_t_L2_power");
    }

    #[test]
    fn output_root_prefers_the_explicit_path() {
        assert_eq!(output_root(Some(Path::new("/x"))), PathBuf::from("/x"));
    }
}
