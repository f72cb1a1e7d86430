use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use asp_pomdp::experiments::{
    compare, read_rows, run_suite_with, summarize, write_csv, ExperimentError, Metric, Suite,
};
use asp_pomdp::sim::{trial_seed, Scenario, ScenarioConfig, SimError};

#[derive(Parser)]
#[command(name = "sim", version, about = "Object search with ASP priors and a POMDP planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment suite and write per-trial and summary CSVs.
    Run {
        #[arg(long)]
        suite: String,
        /// Scenario TOML; the built-in office scenario when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value_t = 500)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "results.csv")]
        out: PathBuf,
        /// Summary CSV path; defaults to `<out>` with a `.summary.csv` suffix.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Bootstrap test of a metric between two result tables, per sweep point.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "accuracy")]
        metric: String,
        /// Condition to take from A (needed when A holds several).
        #[arg(long)]
        condition_a: Option<String>,
        #[arg(long)]
        condition_b: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        resamples: usize,
    },
    /// Run one trial and print its step log.
    Trial {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Trial index under `seed`, as numbered by `run`.
        #[arg(long, default_value_t = 0)]
        index: u64,
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Print the step log as CSV.
        #[arg(long)]
        verbose: bool,
    },
}

fn load(path: Option<&Path>) -> Result<ScenarioConfig, SimError> {
    match path {
        Some(p) => ScenarioConfig::load(p),
        None => Ok(ScenarioConfig::default()),
    }
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    out.with_file_name(format!("{stem}.summary.csv"))
}

fn run(cli: Cli) -> Result<(), ExperimentError> {
    match cli.command {
        Command::Run {
            suite,
            scenario,
            trials,
            seed,
            out,
            summary,
        } => {
            let suite = Suite::parse(&suite)?;
            let cfg = load(scenario.as_deref())?;
            let mut writer = csv::Writer::from_writer(BufWriter::new(File::create(&out)?));
            let rows = run_suite_with(suite, &cfg, trials, seed, |point| {
                for r in point {
                    writer.serialize(r)?;
                }
                writer.flush()?;
                info!("{} {} x={} done", point[0].suite, point[0].condition, point[0].x);
                Ok(())
            })?;
            let table = summarize(&rows);
            let path = summary.unwrap_or_else(|| summary_path(&out));
            write_csv(&table, BufWriter::new(File::create(&path)?))?;
            write_csv(&table, io::stdout().lock())?;
            eprintln!("wrote {} and {}", out.display(), path.display());
        }
        Command::Compare {
            a,
            b,
            metric,
            condition_a,
            condition_b,
            resamples,
        } => {
            let metric = Metric::parse(&metric)?;
            let ra = read_rows(File::open(&a)?)?;
            let rb = read_rows(File::open(&b)?)?;
            let report = compare(
                &ra,
                &rb,
                metric,
                condition_a.as_deref(),
                condition_b.as_deref(),
                resamples,
            )?;
            write_csv(&report, io::stdout().lock())?;
        }
        Command::Trial {
            seed,
            index,
            scenario,
            verbose,
        } => {
            let scenario = Scenario::new(load(scenario.as_deref())?)?;
            let (result, log) = scenario.run_trial(index, trial_seed(seed, index), verbose)?;
            let mut stdout = io::stdout().lock();
            if verbose {
                write_csv(&log, &mut stdout)?;
                writeln!(stdout)?;
            }
            write_csv(&[result], &mut stdout)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}
