use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use jdpp::dpp::{chi_square_test, j_dpp_distribution, sample_j_dpp, write_samples_jsonl, MAX_TABLE_D};
use jdpp::fock::{rho_delta, wick_product, write_operator_csv, FockSpace, RhoForm, WickRoute};
use jdpp::kernel_io::KernelSpec;
use jdpp::moments::MAX_FOCK_D;
use jdpp::moments::{check_moment_caps, moment_report, MomentReport};
use jdpp::sites::parse_tuple;
use jdpp::suites::{check_feasible, default_tuples, run_suite, SuiteOutcome, SuiteParams, SUITE_NAMES};
use jdpp::{check_j_self_adjoint, hat_transform, validate_correlation_operator, JKernelBundle, SiteSet};
use log::info;
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, Format, KernelRole, SCHEMA_VERSION};
use crate::{Cli, Command};

const DEFAULT_SAMPLE_COUNT: usize = 1000;
const MAX_MARGINAL_Z: f64 = 5.0;
const MIN_P_VALUE: f64 = 1e-3;
/// Default verify moment rows are only generated up to this ground-set size.
const DEFAULT_ROW_MAX_D: usize = 5;

/// Runs one subcommand; `Ok(false)` is a verification failure.
pub fn run(cli: &Cli) -> Result<bool> {
    let path = cli.config.as_deref().ok_or_else(|| anyhow!("--config <path> is required"))?;
    let cfg = ExperimentConfig::load(path)?;
    let ctx = RunContext { cli, cfg: &cfg, config_dir: path.parent().unwrap_or(Path::new(".")) };
    match cli.command {
        Command::Validate => validate(&ctx),
        Command::Verify => verify(&ctx),
        Command::Moments => moments(&ctx),
        Command::Sample => sample(&ctx),
    }
}

struct RunContext<'a> {
    cli: &'a Cli,
    cfg: &'a ExperimentConfig,
    config_dir: &'a Path,
}

impl RunContext<'_> {
    fn format(&self) -> Format {
        self.cli.format.unwrap_or(self.cfg.output.format)
    }

    /// `--out` is taken as given; a config output path is relative to the config.
    fn out_path(&self) -> Option<PathBuf> {
        if let Some(p) = &self.cli.out {
            return Some(p.clone());
        }
        self.cfg.output.path.as_ref().map(|p| if p.is_relative() { self.config_dir.join(p) } else { p.clone() })
    }

    fn seed(&self) -> u64 {
        self.cli.seed.or(self.cfg.seed).unwrap_or(0)
    }

    fn tuples(&self, d: usize) -> Result<Vec<Vec<SiteSet>>> {
        let raw = if self.cli.tuples.is_empty() { &self.cfg.tuples } else { &self.cli.tuples };
        raw.iter().map(|t| parse_tuple(t, d).with_context(|| format!("tuple `{t}`"))).collect()
    }

    fn suites(&self) -> Result<Vec<&'static str>> {
        let raw = if self.cli.suite.is_empty() { &self.cfg.suites } else { &self.cli.suite };
        if raw.is_empty() || raw.iter().any(|s| s == "all") {
            return Ok(SUITE_NAMES.to_vec());
        }
        raw.iter()
            .map(|s| {
                SUITE_NAMES
                    .iter()
                    .copied()
                    .find(|n| n == s)
                    .ok_or_else(|| anyhow!("unknown suite `{s}` (known: {})", SUITE_NAMES.join(", ")))
            })
            .collect()
    }

    fn emit(&self, bytes: &[u8]) -> Result<()> {
        match self.out_path() {
            Some(p) => std::fs::write(&p, bytes).with_context(|| format!("writing {}", p.display())),
            None => io::stdout().write_all(bytes).context("writing stdout"),
        }
    }

    fn emit_json<T: Serialize>(&self, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.emit(text.as_bytes())
    }
}

/// Dumps the Wick product of `tuple`, or ρ(X) when there is none.
fn dump_operator(bundle: &JKernelBundle, tuple: Option<&[SiteSet]>, path: &Path) -> Result<()> {
    let d = bundle.d();
    if d > MAX_FOCK_D {
        bail!("--dump-operator: ground set size {d} exceeds Fock cap {MAX_FOCK_D}");
    }
    let fs = FockSpace::new(d)?;
    let op = match tuple {
        Some(t) => wick_product(bundle, t, &fs, WickRoute::WChain)?,
        None => rho_delta(bundle, SiteSet::full(d), &fs, RhoForm::Definition)?,
    };
    write_operator_csv(&op, path)?;
    info!("operator written to {}", path.display());
    Ok(())
}

fn validate(ctx: &RunContext) -> Result<bool> {
    let cfg = ctx.cfg;
    let tol = cfg.validation_tol();
    let m = cfg.matrix()?;
    let (k, j_self_adjoint) = match cfg.kernel.role {
        KernelRole::Hermitian => {
            let jsa = check_j_self_adjoint(&hat_transform(&m), tol);
            (m, jsa)
        }
        KernelRole::JHermitian => {
            let jsa = check_j_self_adjoint(&m, tol);
            (hat_transform(&m), jsa)
        }
    };
    let validity = validate_correlation_operator(&k, tol);
    let mut passed = validity.passed && j_self_adjoint.holds;
    let mut assembly = None;
    if validity.passed {
        let bundle = jdpp::assemble_j_kernel(&k, tol)?;
        let r = bundle.report();
        let worst = [r.sqrt_residual_1, r.sqrt_residual_2, r.block_residual, r.involution_residual]
            .into_iter()
            .fold(0.0, f64::max);
        passed &= worst <= tol && r.j_self_adjoint.holds;
        if let Some(p) = &ctx.cli.dump_operator {
            dump_operator(&bundle, None, p)?;
        }
        assembly = Some(r.clone());
    }
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "validate",
        "passed": passed,
        "d": k.d(),
        "role": cfg.kernel.role,
        "validity": validity,
        "j_self_adjoint": j_self_adjoint,
        "assembly": assembly,
    });
    match ctx.format() {
        Format::Json => ctx.emit_json(&report)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["check", "value"])?;
            w.write_record(["hermiticity_residual", &validity.hermiticity_residual.to_string()])?;
            w.write_record(["min_eigenvalue", &validity.min_eigenvalue.to_string()])?;
            w.write_record(["max_eigenvalue", &validity.max_eigenvalue.to_string()])?;
            w.write_record(["j_self_adjoint", &j_self_adjoint.holds.to_string()])?;
            w.write_record(["passed", &passed.to_string()])?;
            ctx.emit(&w.into_inner()?)?;
        }
    }
    for f in &validity.failures {
        eprintln!("validation failure: {f}");
    }
    Ok(passed)
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    schema_version: u32,
    command: &'static str,
    passed: bool,
    d: usize,
    seed: u64,
    suites: Vec<SuiteOutcome>,
    moment_tolerance: f64,
    moments: &'a [MomentReport],
}

fn verify(ctx: &RunContext) -> Result<bool> {
    let cfg = ctx.cfg;
    let d = cfg.space.d;
    let names = ctx.suites()?;
    for name in &names {
        check_feasible(name, d).with_context(|| format!("suite `{name}` is infeasible"))?;
    }
    let tuples = ctx.tuples(d)?;
    for t in &tuples {
        check_moment_caps(t.len())?;
    }
    let bundle = cfg.bundle()?;
    let tuples = if tuples.is_empty() && d <= DEFAULT_ROW_MAX_D { default_tuples(&bundle, 2) } else { tuples };
    let mut params = SuiteParams { seed: ctx.seed(), ..SuiteParams::default() };
    if let Some(c) = ctx.cli.count.or(cfg.count) {
        params.sampler_count = c;
    }
    let bundles = std::slice::from_ref(&bundle);

    // Suites are independent; outputs are collected in selection order.
    let outcomes: Vec<Result<SuiteOutcome>> = std::thread::scope(|s| {
        let handles: Vec<_> = names
            .iter()
            .map(|&name| {
                let params = &params;
                s.spawn(move || {
                    let start = Instant::now();
                    let out = run_suite(name, bundles, params).with_context(|| format!("suite `{name}`"));
                    info!("suite {name} finished in {:.2}s", start.elapsed().as_secs_f64());
                    out
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err(anyhow!("suite thread panicked")))).collect()
    });
    let suites = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

    let rows = tuples.iter().map(|t| moment_report(&bundle, t)).collect::<jdpp::Result<Vec<_>>>()?;
    let moment_tol = cfg.moment_tol();
    let moments_ok = rows.iter().all(|r| r.max_discrepancy <= moment_tol);
    let passed = suites.iter().all(|s| s.passed) && moments_ok;
    if let Some(p) = &ctx.cli.dump_operator {
        dump_operator(&bundle, None, p)?;
    }
    for s in &suites {
        eprintln!(
            "{} {} ({}) {:.2}s",
            if s.passed { "PASS" } else { "FAIL" },
            s.suite,
            s.exercises,
            s.runtime_ms / 1e3
        );
    }
    let report = VerifyReport {
        schema_version: SCHEMA_VERSION,
        command: "verify",
        passed,
        d,
        seed: params.seed,
        suites,
        moment_tolerance: moment_tol,
        moments: &rows,
    };
    match ctx.format() {
        Format::Json => ctx.emit_json(&report)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["suite", "exercises", "metric", "value", "tolerance", "bound", "passed", "runtime_ms"])?;
            for s in &report.suites {
                for m in &s.metrics {
                    w.write_record([
                        s.suite.as_str(),
                        s.exercises.as_str(),
                        m.name.as_str(),
                        &m.value.to_string(),
                        &m.tolerance.to_string(),
                        if m.upper { "upper" } else { "lower" },
                        &m.passed.to_string(),
                        &s.runtime_ms.to_string(),
                    ])?;
                }
            }
            ctx.emit(&w.into_inner()?)?;
        }
    }
    Ok(passed)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn moments(ctx: &RunContext) -> Result<bool> {
    let cfg = ctx.cfg;
    let tuples = ctx.tuples(cfg.space.d)?;
    for t in &tuples {
        check_moment_caps(t.len()).with_context(|| format!("tuple of length {}", t.len()))?;
    }
    let bundle = cfg.bundle()?;
    let rows = tuples.iter().map(|t| moment_report(&bundle, t)).collect::<jdpp::Result<Vec<_>>>()?;
    if let Some(p) = &ctx.cli.dump_operator {
        dump_operator(&bundle, tuples.first().map(Vec::as_slice), p)?;
    }
    let tol = cfg.moment_tol();
    let passed = rows.iter().all(|r| r.max_discrepancy <= tol);
    match ctx.format() {
        Format::Json => ctx.emit_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "moments",
            "passed": passed,
            "tolerance": tol,
            "rows": rows,
        }))?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["n", "deltas", "fock", "cycle", "det", "pairing", "max_disc"])?;
            for r in &rows {
                w.write_record([
                    r.n.to_string(),
                    r.label.clone(),
                    opt(r.value_fock),
                    r.value_cycle.to_string(),
                    opt(r.value_det),
                    opt(r.value_pairing),
                    r.max_discrepancy.to_string(),
                ])?;
            }
            ctx.emit(&w.into_inner()?)?;
        }
    }
    Ok(passed)
}

fn sample(ctx: &RunContext) -> Result<bool> {
    let cfg = ctx.cfg;
    let bundle = cfg.bundle()?;
    let seed = ctx.seed();
    let count = ctx.cli.count.or(cfg.count).unwrap_or(DEFAULT_SAMPLE_COUNT);
    let run = sample_j_dpp(&bundle, seed, count)?;
    let chi_square = if bundle.d() <= MAX_TABLE_D && count > 0 {
        Some(chi_square_test(&j_dpp_distribution(&bundle)?, &run.samples))
    } else {
        None
    };
    let passed =
        run.report.max_marginal_z <= MAX_MARGINAL_Z && chi_square.as_ref().is_none_or(|c| c.p_value >= MIN_P_VALUE);
    if let Some(p) = &ctx.cli.dump_operator {
        dump_operator(&bundle, None, p)?;
    }
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "sample",
        "passed": passed,
        "generator": generator_name(&cfg.kernel.spec),
        "sampler": run.report,
        "chi_square": chi_square,
        "max_marginal_z_limit": MAX_MARGINAL_Z,
        "min_p_value": MIN_P_VALUE,
    });
    let summary_text = serde_json::to_string_pretty(&summary)? + "\n";
    match ctx.out_path() {
        Some(p) => {
            let file = File::create(&p).with_context(|| format!("creating {}", p.display()))?;
            let mut w = BufWriter::new(file);
            write_samples_jsonl(&run.samples, &mut w)?;
            w.flush()?;
            let mut sp = p.into_os_string();
            sp.push(".summary.json");
            std::fs::write(&sp, summary_text).with_context(|| format!("writing {sp:?}"))?;
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            write_samples_jsonl(&run.samples, &mut w)?;
            w.flush()?;
            eprint!("{summary_text}");
        }
    }
    Ok(passed)
}

fn generator_name(spec: &KernelSpec) -> &'static str {
    match spec {
        KernelSpec::Explicit { .. } => "explicit",
        KernelSpec::RandomValid { .. } => "random-valid",
        KernelSpec::ProjectionRankR { .. } => "projection-rank-r",
        KernelSpec::DiscreteSine { .. } => "discrete-sine",
        KernelSpec::File { .. } => "file",
    }
}
