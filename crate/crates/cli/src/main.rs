use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use secure_mimo::config::{load_config, validate_config};
use secure_mimo::scenario::{self, catalog, custom, exit_code, run_scenario, write_csv, Metric, Pair};
use secure_mimo::{AnKind, DataKind, Error};

/// Secure multi-cell massive MIMO experiment runner.
#[derive(Parser, Debug)]
#[command(name = "secmimo", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a catalog scenario, or `custom` with --config, and write CSV rows.
    Run {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = scenario::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = scenario::DEFAULT_REALIZATIONS)]
        realizations: usize,
        /// Antenna count for fixed-size points (load and eavesdropper ratio kept); caps antenna sweeps.
        #[arg(long)]
        nt: Option<usize>,
        /// Worker threads; 1 runs everything sequentially.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        no_header_timestamp: bool,
        /// System configuration for the `custom` scenario.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Data precoders for `custom` (comma separated).
        #[arg(long, value_delimiter = ',', default_value = "MF,SZF,SRCI,CZF,CRCI")]
        data: Vec<String>,
        /// AN precoders for `custom` (comma separated).
        #[arg(long, value_delimiter = ',', default_value = "SNS")]
        an: Vec<String>,
        /// Evaluators for `custom` (comma separated: analytic, monte_carlo, alpha_s).
        #[arg(long, value_delimiter = ',', default_value = "analytic")]
        evaluator: Vec<String>,
    },
    /// List the built-in scenarios.
    List,
    /// Check a configuration file and report every problem with its line.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

const EXIT_CONFIG: u8 = 1;

fn parse_all<T: std::str::FromStr<Err = Error>>(items: &[String]) -> Result<Vec<T>, Error> {
    items.iter().map(|s| s.trim().parse()).collect()
}

fn run(args: Command) -> Result<u8, Error> {
    match args {
        Command::List => {
            for sc in catalog(None) {
                let points: usize = sc.series.iter().map(|s| s.points.len()).sum();
                println!("{}\t{} ({} series, {} points)", sc.name, sc.description, sc.series.len(), points);
            }
            Ok(0)
        }
        Command::Validate { config } => {
            let diags = validate_config(&config)?;
            if diags.is_empty() {
                println!("{}: ok", config.display());
                Ok(0)
            } else {
                for d in &diags {
                    println!("{}: {d}", config.display());
                }
                Ok(EXIT_CONFIG)
            }
        }
        Command::Run { scenario, out, seed, realizations, nt, jobs, no_header_timestamp, config, data, an, evaluator } => {
            let mut sc = if scenario == "custom" {
                let path = config.ok_or_else(|| Error::Config {
                    line: None,
                    message: "the custom scenario needs --config <path>".into(),
                })?;
                let cfg = load_config(&path)?;
                let data: Vec<DataKind> = parse_all(&data)?;
                let an: Vec<AnKind> = parse_all(&an)?;
                let metrics: Vec<Metric> = parse_all(&evaluator)?;
                let pairs = data.iter().flat_map(|&d| an.iter().map(move |&a| Pair { data: d, an: a })).collect();
                custom(cfg, pairs, metrics)
            } else {
                if config.is_some() {
                    return Err(Error::Config { line: None, message: "--config only applies to the custom scenario".into() });
                }
                scenario::scenario(&scenario, nt)?
            };
            if realizations < 2 {
                return Err(Error::Config { line: None, message: format!("--realizations must be at least 2, got {realizations}") });
            }
            if jobs == 0 {
                return Err(Error::Config { line: None, message: "--jobs must be at least 1".into() });
            }
            sc.seed = seed;
            sc.realizations = realizations;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Error::Numerical(format!("cannot start worker pool: {e}")))?;
            let rows = pool.install(|| run_scenario(&sc));

            let file = File::create(&out).map_err(|source| Error::Io { path: out.clone(), source })?;
            let stamp = if no_header_timestamp {
                None
            } else {
                Some(SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
            };
            write_csv(BufWriter::new(file), &rows, stamp)?;
            let ok = rows.iter().filter(|r| r.status == secure_mimo::Status::Ok).count();
            eprintln!("{}: {} rows ({ok} ok) written to {}", sc.name, rows.len(), out.display());
            Ok(exit_code(&rows) as u8)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config { .. } | Error::Io { .. } => EXIT_CONFIG,
                Error::Infeasible(_) | Error::InvalidAnRank | Error::Unsupported(_) => 2,
                _ => 3,
            })
        }
    }
}
