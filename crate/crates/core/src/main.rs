use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use permatch::harness::{aggregate, emit, run_experiment, ExperimentConfig, OutputFormat};
use permatch::io::{load_instance, matching_csv};
use permatch::metrics::{kappa_star, risk_bound_eq14, theorem1_threshold};
use permatch::permgroup::pack_greedy;
use permatch::{estimate, Error, EstimatorKind, Result};

#[derive(Parser)]
#[command(name = "permatch", version, about = "Match two noisy feature sets by permutation estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the matching between two feature CSV files.
    Match {
        first: PathBuf,
        second: PathBuf,
        /// greedy, lss, lsns, lsl or variance-greedy.
        #[arg(short, long, default_value = "lsl")]
        estimator: EstimatorKind,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo experiment described by a config file.
    Experiment {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Output file; the CSV summary goes to stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// csv or svg.
        #[arg(short, long, default_value = "csv")]
        format: OutputFormat,
    },
    /// Greedy Hamming packing of the radius-R ball of permutations.
    Packing {
        #[arg(short)]
        n: usize,
        #[arg(short = 'R', long, default_value_t = 2.0)]
        radius: f64,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Separation rates and the risk bound for given σ, n, d, α.
    Rates {
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(short)]
        n: usize,
        #[arg(short)]
        d: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io { path: p.to_path_buf(), source: e }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Match { first, second, estimator, out } => {
            let inst = load_instance(&first, &second)?;
            let est = estimate(&inst, &estimator)?;
            write_out(out.as_deref(), &matching_csv(&est))
        }
        Command::Experiment { config, seed, trials, out, format } => {
            let text = std::fs::read_to_string(&config).map_err(|e| Error::Io { path: config.clone(), source: e })?;
            let mut cfg = ExperimentConfig::parse(&text)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            let summary = aggregate(&run_experiment(&cfg)?)?;
            let label = cfg.scenario.sweep_label();
            match (out, format) {
                (Some(path), f) => emit(&summary, f, &path, label),
                (None, OutputFormat::Csv) => write_out(None, &summary.to_csv()),
                (None, OutputFormat::Svg) => write_out(None, &permatch::harness::render_svg(&summary, label)?),
            }
        }
        Command::Packing { n, radius, eps, restarts, seed, out } => {
            let packing = pack_greedy(n, radius, eps, restarts, seed)?;
            write_out(out.as_deref(), &packing.to_csv())?;
            let ratio = packing.log_ratio().map_or("n/a".to_string(), |r| format!("{r:.4}"));
            eprintln!("size = {}, log M / (n log n) = {ratio}", packing.len());
            Ok(())
        }
        Command::Rates { sigma, n, d, alpha } => {
            let ks = kappa_star(sigma, n, d)?;
            let t1 = theorem1_threshold(alpha, n, d, sigma)?;
            let risk = risk_bound_eq14(t1 * 2f64.sqrt(), sigma, n, d)?;
            println!("quantity,value");
            println!("kappa_star,{ks}");
            println!("theorem1_threshold,{t1}");
            println!("risk_bound_eq14_at_threshold,{risk}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
