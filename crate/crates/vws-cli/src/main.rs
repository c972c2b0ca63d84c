//! `vws`: run simulations and verification suites from a JSON configuration.
//!
//! Exit status is 0 on success, 2 for configuration errors and 3 for
//! numerical failures, including a verification check that does not pass.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use vws::harness::{self, all_passed, Check};
use vws::io::{simulate, RunConfig};
use vws::swmodel::{justify_one, summarize};
use vws::VwsError;

#[derive(Parser)]
#[command(name = "vws", version, about = "Water waves with vorticity: simulation and verification harnesses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out_dir` from the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for independent runs (sweep entries, dispersion cases).
    #[arg(long, env = "VWS_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured initial state and write diagnostics and snapshots.
    Simulate(Common),
    /// Manufactured-solution test of the velocity reconstruction.
    DivcurlCheck(Common),
    /// Frequencies of small standing waves against the linear dispersion relation.
    Dispersion(Common),
    /// Shallow-water justification sweep over μ.
    Justify(Common),
    /// Gradient, bracket and trajectory checks of the Hamiltonian structure.
    Hamiltonian(Common),
}

/// Failure of a command, carrying its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<VwsError> for Failure {
    fn from(e: VwsError) -> Self {
        Failure { code: if e.is_config() { 2 } else { 3 }, message: e.to_string() }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: 3, message: format!("cannot write {}: {e}", path.display()) }
}

struct Context {
    cfg: RunConfig,
    out: PathBuf,
}

fn prepare(common: &Common) -> Result<Context, Failure> {
    let cfg = RunConfig::load(&common.config).map_err(|e| Failure { code: 2, message: e.to_string() })?;
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(Failure { code: 2, message: "--threads must be at least 1".into() });
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = common
        .out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("vws-out").join(&cfg.scenario));
    fs::create_dir_all(&out).map_err(|e| io_failure(&out, e))?;
    Ok(Context { cfg, out })
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    fs::write(path, text + "\n").map_err(|e| io_failure(path, e))
}

fn report_checks(checks: &[Check]) -> Result<(), Failure> {
    for c in checks {
        println!("{}", c.line());
    }
    if all_passed(checks) {
        Ok(())
    } else {
        let failed = checks.iter().filter(|c| !c.passed).count();
        Err(Failure { code: 3, message: format!("{failed} check(s) failed") })
    }
}

fn run_simulate(ctx: &Context) -> Result<(), Failure> {
    match simulate(&ctx.cfg, &ctx.out) {
        Ok(summary) => {
            println!(
                "{}: {} steps to t = {}, max |H drift| = {:.3e}, max div ω = {:.3e}",
                summary.scenario, summary.steps, summary.t_final, summary.max_abs_h_drift, summary.max_div_omega
            );
            write_json(&ctx.out.join("summary.json"), &summary)
        }
        Err(f) => {
            if let Some(p) = &f.last_good {
                eprintln!("last good state written to {}", p.display());
            }
            Err(f.error.into())
        }
    }
}

fn run_divcurl(ctx: &Context) -> Result<(), Failure> {
    let cfg = ctx.cfg.divcurl_check.clone().unwrap_or_default();
    let report = harness::divcurl_check(&cfg)?;
    println!("{:>6} {:>6} {:>12} {:>12} {:>10}", "nx", "nz", "error", "identities", "time [s]");
    for r in &report.rows {
        println!(
            "{:>6} {:>6} {:>12.3e} {:>12.3e} {:>10.3}",
            r.nx,
            r.nz,
            r.error,
            r.surface_identity.max(r.bottom_identity),
            r.runtime_s
        );
    }
    write_json(&ctx.out.join("divcurl_check.json"), &report)?;
    report_checks(&report.checks)
}

fn run_dispersion(ctx: &Context) -> Result<(), Failure> {
    let cfg = ctx.cfg.dispersion.clone().unwrap_or_default();
    cfg.validate()?;
    let rows = cfg
        .cases
        .par_iter()
        .map(|c| harness::dispersion_case(&cfg, c))
        .collect::<vws::Result<Vec<_>>>()?;
    println!("{:>8} {:>3} {:>14} {:>14} {:>11}", "mu", "k", "expected", "measured", "rel. error");
    for r in &rows {
        println!("{:>8} {:>3} {:>14.10} {:>14.10} {:>11.3e}", r.mu, r.k, r.expected, r.measured, r.relative_error);
    }
    let checks = harness::dispersion_checks(&cfg, &rows);
    write_json(&ctx.out.join("dispersion.json"), &harness::DispersionReport { rows, checks: checks.clone() })?;
    report_checks(&checks)
}

fn run_justify(ctx: &Context) -> Result<(), Failure> {
    let cfg = ctx.cfg.justify.clone().unwrap_or_default();
    cfg.validate()?;
    let start = Instant::now();
    let rows = cfg.mus.par_iter().map(|&mu| justify_one(&cfg, mu)).collect::<vws::Result<Vec<_>>>()?;
    let runtime = start.elapsed().as_secs_f64();
    let summary = summarize(&rows);
    let mut table = String::from("mu,err_zeta,err_vbar,err_usurf_uncorrected,err_usurf_corrected,structure,self_error\n");
    for r in &rows {
        table += &format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
            r.mu,
            r.err_zeta,
            r.err_vbar,
            r.err_usurf_uncorrected,
            r.err_usurf_corrected,
            r.structure,
            r.self_error.map_or(String::new(), |e| format!("{e:.16e}"))
        );
    }
    let path = ctx.out.join("justify.csv");
    fs::write(&path, &table).map_err(|e| io_failure(&path, e))?;
    print!("{table}");
    let checks = harness::justify_checks(&rows, &summary, runtime);
    write_json(
        &ctx.out.join("justify.json"),
        &serde_json::json!({ "rows": rows, "summary": summary, "runtime_s": runtime, "checks": checks }),
    )?;
    report_checks(&checks)
}

fn run_hamiltonian(ctx: &Context) -> Result<(), Failure> {
    let cfg = ctx.cfg.hamiltonian.clone().unwrap_or_default();
    let report = harness::hamiltonian_check(&cfg)?;
    write_json(&ctx.out.join("hamiltonian.json"), &report)?;
    report_checks(&report.checks)
}

/// Entry point of one subcommand.
type Runner = fn(&Context) -> Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, run): (&Common, Runner) = match &cli.command {
        Command::Simulate(c) => (c, run_simulate),
        Command::DivcurlCheck(c) => (c, run_divcurl),
        Command::Dispersion(c) => (c, run_dispersion),
        Command::Justify(c) => (c, run_justify),
        Command::Hamiltonian(c) => (c, run_hamiltonian),
    };
    match prepare(common).and_then(|ctx| run(&ctx)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
