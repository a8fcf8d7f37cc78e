use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use quench_cli::{execute, CliError, Command, ExperimentConfig, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK};

/// Pull-in and quenching experiments for the fringing-field MEMS model.
///
/// Exit status: 0 on success, 2 on configuration or i/o errors, 3 on
/// numerical failures (unstable step, exhausted budget, failed rows).
#[derive(Debug, Parser)]
#[command(name = "quench", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// TOML experiment file; defaults apply to missing keys.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory, overriding `common.out_dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for sweeps; defaults to the available parallelism.
    #[arg(long, global = true, value_name = "K")]
    workers: Option<usize>,

    /// No effect: nothing here draws random numbers. Takes no value.
    #[arg(long, global = true)]
    seedless: bool,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Closed-form pull-in bounds against the reference table.
    Bounds,
    /// Pull-in voltage by shooting for every configured delta.
    Pullin,
    /// One time-dependent run with profile snapshots.
    Evolve,
    /// Quench times over a (delta, lambda) grid.
    SweepQuench,
    /// Power-law fit of the quenching rate.
    FitRate,
    /// Numerical profile against the local expansion near the quench.
    CompareLocal,
}

impl From<&Cmd> for Command {
    fn from(c: &Cmd) -> Self {
        match c {
            Cmd::Bounds => Command::Bounds,
            Cmd::Pullin => Command::Pullin,
            Cmd::Evolve => Command::Evolve,
            Cmd::SweepQuench => Command::SweepQuench,
            Cmd::FitRate => Command::FitRate,
            Cmd::CompareLocal => Command::CompareLocal,
        }
    }
}

fn real_main(cli: &Cli) -> Result<i32, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.common.out_dir = out.clone();
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = cli.workers {
        if k == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        pool = pool.num_threads(k);
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;

    let command = Command::from(&cli.command);
    let start = Instant::now();
    let report = pool.install(|| execute(command, &cfg))?;
    report.write(&cfg.common.out_dir)?;
    print!("{}", report.csv());
    eprintln!(
        "{}: {} rows, {} failed, {:.3} s, written to {}",
        command.name(),
        report.rows.len(),
        report.failures,
        start.elapsed().as_secs_f64(),
        cfg.common.out_dir.display()
    );
    Ok(if report.failures > 0 { EXIT_NUMERICAL } else { EXIT_OK })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match real_main(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("quench: {e}");
            e.exit_code()
        }
    };
    debug_assert!([EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL].contains(&code));
    ExitCode::from(code as u8)
}
