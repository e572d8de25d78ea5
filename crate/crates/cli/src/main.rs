use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use rieffel_cli::config::{parse_list, RunConfig};
use rieffel_cli::{commands, CliError};
use std::path::PathBuf;
use std::process::ExitCode;

/// Rieffel-deformed symbol algebras: products, norms and verification suites.
#[derive(Parser)]
#[command(name = "rieffel", version)]
struct Cli {
    /// Flat `key = value` run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Deformed product of two symbol files.
    Product {
        f: PathBuf,
        g: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// CSV of sup, operator and differential norms over a θ sweep.
    Norms {
        f: PathBuf,
        #[arg(long, value_name = "START:STEP:END", allow_hyphen_values = true)]
        theta_sweep: Option<String>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Run verification suites and emit a JSON report.
    Verify {
        #[arg(long, value_name = "a,b,c")]
        suites: Option<String>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "INT")]
        workers: Option<usize>,
    },
    /// Version, configuration and suite list; metadata of a symbol file if given.
    Info { f: Option<PathBuf> },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match cli.cmd {
        Cmd::Product { f, g, out } => {
            let out = out.or(cfg.out.clone()).ok_or_else(|| CliError::Usage("product needs --out PATH (or `out` in the config)".into()))?;
            let line = commands::product(&cfg, &f, &g, &out)?;
            eprintln!("{line}");
        }
        Cmd::Norms { f, theta_sweep, out } => {
            let out = out.or(cfg.out.clone());
            commands::norms(&cfg, &f, theta_sweep.as_deref(), out.as_deref())?;
        }
        Cmd::Verify { suites, out, workers } => {
            if let Some(s) = suites {
                cfg.suites = parse_list(&s);
            }
            if let Some(w) = workers {
                if w == 0 {
                    return Err(CliError::Usage("--workers must be positive".into()));
                }
                cfg.workers = w;
            }
            cfg.out = out.or(cfg.out);
            let report = commands::verify(&cfg, cfg.out.as_deref())?;
            for s in &report.suites {
                eprintln!("{:<18} {}/{} passed", s.suite, s.summary.passed, s.summary.total);
                for r in s.records.iter().filter(|r| !r.pass) {
                    eprintln!("  FAIL {}: measured {:e}, bound {:e} ({})", r.claim_id, r.measured, r.bound, r.detail);
                }
            }
            eprintln!("summary: {}/{} checks passed", report.summary.passed, report.summary.total);
            if !report.passed() {
                return Err(CliError::Check(format!("{} checks failed", report.summary.failed)));
            }
        }
        Cmd::Info { f } => print!("{}", commands::info(&cfg, f.as_deref())?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(3),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
