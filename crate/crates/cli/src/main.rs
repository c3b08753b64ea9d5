//! `rmhd`: run presets, convergence studies and the verification suite.
//!
//! Exit codes: 0 success, 1 configuration or i/o error, 2 admissibility
//! failure during a run, 3 verification failure.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rmhd_core::convergence::convergence_study;
use rmhd_core::output::{
    fmt_f64, write_convergence, write_diagnostics_2d, write_snapshot_1d, write_snapshot_2d, write_step_log_1d,
};
use rmhd_core::solver1d::run_1d;
use rmhd_core::solver2d::run_2d;
use rmhd_core::verify::{reports_to_json, run_suite, TrialReport};
use rmhd_core::{RmhdError, RunConfig};

const EXIT_CONFIG: u8 = 1;
const EXIT_ADMISSIBILITY: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(name = "rmhd", version, about = "Physical-constraints-preserving schemes for relativistic MHD")]
struct Cli {
    /// Worker threads; the RMHD_THREADS environment variable takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset described by a JSON config and write CSV output.
    Run {
        config: PathBuf,
        /// Overrides the config's output_dir.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Mesh-refinement study against the exact solution.
    Convergence {
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Monte Carlo verification of the admissible-set theory.
    Verify {
        #[arg(long, default_value_t = 20240601)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Where to write the JSON report.
        #[arg(long, default_value = "verify_report.json")]
        report: PathBuf,
    },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<RmhdError> for Failure {
    fn from(e: RmhdError) -> Self {
        // any failure inside a time step is reported as a loss of admissibility
        let in_step = matches!(e, RmhdError::StepFailure { .. });
        let code = if in_step || e.is_admissibility_failure() { EXIT_ADMISSIBILITY } else { EXIT_CONFIG };
        Failure { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: EXIT_CONFIG, message: e.to_string() }
    }
}

fn configure_threads(flag: Option<usize>) -> Result<(), Failure> {
    let env = match std::env::var("RMHD_THREADS") {
        Ok(s) => Some(s.trim().parse::<usize>().map_err(|_| Failure {
            code: EXIT_CONFIG,
            message: format!("RMHD_THREADS must be a positive integer, got {s:?}"),
        })?),
        Err(_) => None,
    };
    if let Some(n) = env.or(flag) {
        if n == 0 {
            return Err(Failure { code: EXIT_CONFIG, message: "thread count must be positive".into() });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure { code: EXIT_CONFIG, message: e.to_string() })?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure { code: EXIT_CONFIG, message: format!("{}: {e}", path.display()) })
}

fn output_dir(cfg: &RunConfig, flag: Option<PathBuf>) -> Result<PathBuf, Failure> {
    let dir = flag.unwrap_or_else(|| cfg.output_dir.clone());
    fs::create_dir_all(&dir).map_err(|e| Failure { code: EXIT_CONFIG, message: format!("{}: {e}", dir.display()) })?;
    Ok(dir)
}

/// Writes `snapshot_NNNN.csv` files plus an index of their times.
fn write_index(dir: &Path, times: &[f64]) -> Result<(), Failure> {
    let mut idx = create(&dir.join("snapshots.csv"))?;
    writeln!(idx, "index,t,file")?;
    for (k, t) in times.iter().enumerate() {
        writeln!(idx, "{k},{},snapshot_{k:04}.csv", fmt_f64(*t))?;
    }
    Ok(())
}

fn cmd_run(config: &Path, dir_flag: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = RunConfig::from_path(config)?;
    let dir = output_dir(&cfg, dir_flag)?;
    let eos = cfg.eos()?;
    if cfg.scheme.dimension() == 1 {
        let run = run_1d(&cfg)?;
        for (k, (_, grid)) in run.snapshots.iter().enumerate() {
            write_snapshot_1d(create(&dir.join(format!("snapshot_{k:04}.csv")))?, grid, &eos)?;
        }
        write_step_log_1d(create(&dir.join("steps.csv"))?, &run.log)?;
        write_index(&dir, &run.snapshots.iter().map(|(t, _)| *t).collect::<Vec<_>>())?;
        let t = run.snapshots.last().map_or(0.0, |s| s.0);
        println!("{}: {} steps to t = {t}, output in {}", cfg.preset.name(), run.log.len(), dir.display());
    } else {
        let run = run_2d(&cfg)?;
        for (k, (_, grid)) in run.snapshots.iter().enumerate() {
            write_snapshot_2d(create(&dir.join(format!("snapshot_{k:04}.csv")))?, grid)?;
        }
        write_diagnostics_2d(create(&dir.join("diagnostics.csv"))?, &run.log)?;
        write_index(&dir, &run.snapshots.iter().map(|(t, _)| *t).collect::<Vec<_>>())?;
        let t = run.snapshots.last().map_or(0.0, |s| s.0);
        println!("{}: {} steps to t = {t}, output in {}", cfg.preset.name(), run.log.len(), dir.display());
    }
    Ok(())
}

fn cmd_convergence(config: &Path, dir_flag: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = RunConfig::from_path(config)?;
    let dir = output_dir(&cfg, dir_flag)?;
    let rows = convergence_study(&cfg, None)?;
    write_convergence(create(&dir.join("convergence.csv"))?, &rows)?;
    write_convergence(io::stdout().lock(), &rows)?;
    Ok(())
}

fn cmd_verify(seed: u64, trials: usize, report: &Path) -> Result<(), Failure> {
    let reports: Vec<TrialReport> = run_suite(seed, trials)?;
    if let Some(parent) = report.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut f = create(report)?;
    writeln!(f, "{}", reports_to_json(&reports))?;
    println!("{}", TrialReport::csv_header());
    for r in &reports {
        println!("{}", r.csv_line());
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        return Err(Failure { code: EXIT_VERIFY, message: format!("{failed} properties failed") });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads(cli.threads).and_then(|()| match cli.command {
        Command::Run { config, output_dir } => cmd_run(&config, output_dir),
        Command::Convergence { config, output_dir } => cmd_convergence(&config, output_dir),
        Command::Verify { seed, trials, report } => cmd_verify(seed, trials, &report),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("rmhd: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
