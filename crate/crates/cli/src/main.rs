use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gsqpe_core::experiment::{
    run_experiment, run_sweep, sweep_csv, write_fixture, write_report, ExperimentConfig, FIXTURE_SUITES,
};
use gsqpe_core::verify::{self, CriterionResult};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

/// Ground-state energy estimation by phase estimation: simulator and checks.
#[derive(Debug, Parser)]
#[command(name = "gsqpe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment and write its report.
    Run(RunArgs),
    /// Run every point of a sweep config and write a scaling CSV.
    Sweep(RunArgs),
    /// Regenerate oracle fixtures.
    Fixtures {
        /// Suite name, or "all".
        #[arg(default_value = "all")]
        suite: String,
        #[arg(short, long, default_value = "fixtures")]
        out: PathBuf,
    },
    /// Run the acceptance criteria.
    Verify {
        /// Restrict to these criterion ids.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
        /// Also write the results as JSON here.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(short, long)]
    config: PathBuf,
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the number of reported top outcomes.
    #[arg(long)]
    top_k: Option<usize>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<gsqpe_core::Error> for Failure {
    fn from(e: gsqpe_core::Error) -> Self {
        use gsqpe_core::Error as E;
        match e {
            E::Config(_) | E::InvalidParameter(_) | E::Inadmissible(_) | E::TooLarge { .. } => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load(args: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::load(&args.config).map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(k) = args.top_k {
        cfg.outputs.top_k = k;
    }
    Ok(cfg)
}

fn run(args: &RunArgs) -> Result<bool, Failure> {
    let cfg = load(args)?;
    let report = run_experiment(&cfg)?;
    let path = write_report(&args.out, &report)?;
    println!(
        "E = {:.6} (oracle {:.6}), success mass {:.4} (threshold {:.4}), {}",
        report.estimate.energy,
        report.oracle.energy,
        report.success.success_mass,
        report.success.threshold,
        if report.pass { "pass" } else { "FAIL" }
    );
    println!("report: {}", path.display());
    Ok(report.pass)
}

fn sweep(args: &RunArgs) -> Result<bool, Failure> {
    let cfg = load(args)?;
    let results = run_sweep(&cfg)?;
    let mut pass = true;
    let mut rows = Vec::with_capacity(results.len());
    for (report, row) in results {
        write_report(&args.out, &report)?;
        pass &= report.pass;
        rows.push(row);
    }
    let path = args.out.join("scaling.csv");
    fs::write(&path, sweep_csv(&rows)).map_err(|e| Failure::Runtime(e.to_string()))?;
    println!("{} points, scaling table: {}", rows.len(), path.display());
    Ok(pass)
}

fn fixtures(suite: &str, out: &Path) -> Result<bool, Failure> {
    let suites: Vec<&str> = if suite == "all" { FIXTURE_SUITES.to_vec() } else { vec![suite] };
    for s in suites {
        let path = write_fixture(out, s)?;
        println!("wrote {}", path.display());
    }
    Ok(true)
}

fn verify(only: &[u32], out: Option<&Path>) -> Result<bool, Failure> {
    if let Some(bad) = only.iter().find(|&&id| !(1..=9).contains(&id)) {
        return Err(Failure::Usage(format!("no criterion {bad} (expected 1..=9)")));
    }
    let results: Vec<CriterionResult> = if only.is_empty() {
        verify::run_all()
    } else {
        verify::run_selected(only)
    };
    for r in &results {
        println!("{r}");
    }
    if let Some(path) = out {
        let json = serde_json::to_string_pretty(&results).map_err(|e| Failure::Runtime(e.to_string()))?;
        if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Failure::Runtime(e.to_string()))?;
        }
        fs::write(path, json + "\n").map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    Ok(results.iter().all(|r| r.pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => run(args),
        Command::Sweep(args) => sweep(args),
        Command::Fixtures { suite, out } => fixtures(suite, out),
        Command::Verify { only, out } => verify(only, out.as_deref()),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}
