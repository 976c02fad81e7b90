use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wavedd::bench::{dispersion_specs, emit_dispersion, run_case, run_checks, run_sweep, write_sweep_csv, Method, RunConfig};
use wavedd::helmholtz::Scheme;
use wavedd::Result;

#[derive(Parser)]
#[command(name = "wavedd", version, about = "Schwarz preconditioner benchmarks for Helmholtz and Maxwell")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one configuration and print a JSON report.
    Run {
        config: PathBuf,
        /// Override a key, e.g. `--set subdomains=16`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Frequency × subdomain × method sweep, CSV on stdout or `--out`.
    Sweep {
        config: PathBuf,
        #[arg(long = "f", value_delimiter = ',', required = true)]
        frequencies: Vec<f64>,
        #[arg(long = "n", value_delimiter = ',', required = true)]
        subdomains: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        methods: Vec<Method>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Phase-velocity curves of FE/SE schemes.
    Dispersion {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        orders: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "fe,se")]
        schemes: Vec<Scheme>,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in invariant suite.
    Check,
}

fn load(path: &PathBuf, overrides: &[String]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg = RunConfig::parse(&text)?;
    for o in overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| wavedd::Error::Config(format!("override '{o}' is not KEY=VALUE")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn execute(cmd: Cmd) -> Result<bool> {
    match cmd {
        Cmd::Run { config, overrides } => {
            let report = run_case(&load(&config, &overrides)?)?;
            let json = serde_json::to_string_pretty(&report).map_err(|e| wavedd::Error::Format(e.to_string()))?;
            println!("{json}");
            if !report.converged {
                eprintln!("warning: not converged after {} iterations", report.iterations);
            }
        }
        Cmd::Sweep { config, frequencies, subdomains, methods, out } => {
            let rows = run_sweep(&load(&config, &[])?, &frequencies, &subdomains, &methods);
            write_sweep_csv(&rows, sink(&out)?)?;
        }
        Cmd::Dispersion { orders, schemes, samples, out } => {
            emit_dispersion(&dispersion_specs(&orders, &schemes)?, samples, sink(&out)?)?;
        }
        Cmd::Check => {
            let results = run_checks();
            for r in &results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            return Ok(results.iter().all(|r| r.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match execute(Cli::parse().cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
