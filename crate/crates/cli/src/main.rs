use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nsklim::check::run_checks;
use nsklim::{configure_threads, emit_outputs, run_experiment, ConfigError, Experiment, RunConfig, SweepRecord};

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "nsklim", version, about = "Low Mach and fast rotation limits of the Navier-Stokes-Korteweg system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML configuration.
    Run {
        config: PathBuf,
        /// Overrides `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare closed-form and numerical acoustic eigenvalues.
    Spectrum {
        #[arg(long, default_value_t = 8)]
        max_mode: i64,
        #[arg(long, default_value_t = 1.0)]
        l_h: f64,
        #[arg(long, default_value = "nsklim_spectrum")]
        out: PathBuf,
    },
    /// Decay of the time-averaged oscillating acoustic part.
    Rage {
        #[arg(long)]
        eps: f64,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        tau_list: Vec<f64>,
        /// Frequency cutoff `M`.
        #[arg(long, default_value_t = 4.0)]
        max_mode: f64,
        #[arg(long, default_value_t = 3)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        n_h: usize,
        #[arg(long, default_value_t = 8)]
        n_v: usize,
        #[arg(long, default_value = "nsklim_rage")]
        out: PathBuf,
    },
    /// Run the invariant suite.
    Check,
}

fn execute(config: &RunConfig) -> Result<SweepRecord, u8> {
    let record = run_experiment(config).map_err(config_failure)?;
    match emit_outputs(&record, Some(config), &config.output_dir) {
        Ok(files) => {
            for f in files {
                log::info!("wrote {}", f.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return Err(EXIT_IO);
        }
    }
    Ok(record)
}

fn config_failure(e: ConfigError) -> u8 {
    eprintln!("error: {e}");
    EXIT_CONFIG
}

fn summarize(record: &SweepRecord) -> u8 {
    for run in &record.runs {
        match &run.failure {
            Some(msg) => println!("eps = {}: failed: {msg}", run.eps),
            None => println!("eps = {}: ok", run.eps),
        }
    }
    for r in &record.rates {
        println!("{}: slope {:.4} residual {:.3e}", r.quantity, r.slope, r.residual);
    }
    if let Some(s) = &record.spectrum {
        println!("spectrum: max |closed - numeric| = {:.3e} over {} modes", s.max_diff, s.entries.len());
        if s.max_diff > 1e-12 {
            return EXIT_NUMERICAL;
        }
    }
    if record.any_failed() {
        EXIT_NUMERICAL
    } else {
        0
    }
}

fn dispatch(command: Command) -> Result<u8, u8> {
    match command {
        Command::Run { config, out } => {
            let mut cfg = RunConfig::load(&config).map_err(config_failure)?;
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            Ok(summarize(&execute(&cfg)?))
        }
        Command::Spectrum { max_mode, l_h, out } => {
            let mut cfg = RunConfig::new(Experiment::AcousticSpectrum);
            cfg.spectrum.max_mode = max_mode;
            cfg.grid.l_h = l_h;
            cfg.output_dir = out;
            Ok(summarize(&execute(&cfg)?))
        }
        Command::Rage { eps, tau_list, max_mode, seed, n_h, n_v, out } => {
            let mut cfg = RunConfig::new(Experiment::RageDecay);
            cfg.rage.eps = eps;
            cfg.rage.taus = tau_list;
            cfg.rage.cutoff = max_mode;
            cfg.rage.seed = seed;
            cfg.grid.n_h = n_h;
            cfg.grid.n_v = n_v;
            cfg.output_dir = out;
            Ok(summarize(&execute(&cfg)?))
        }
        Command::Check => {
            let results = run_checks();
            for c in &results {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(if results.iter().all(|c| c.passed) { 0 } else { EXIT_NUMERICAL })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match configure_threads() {
        Ok(n) => log::info!("{n} worker threads"),
        Err(e) => return ExitCode::from(config_failure(e)),
    }
    match dispatch(cli.command) {
        Ok(code) | Err(code) => ExitCode::from(code),
    }
}
