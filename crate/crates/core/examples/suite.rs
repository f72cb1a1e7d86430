//! A small existence-tracking sweep and a bootstrap comparison of its conditions.
use asp_pomdp::experiments::{compare, run_suite, summarize, write_csv, Metric, Suite};
use asp_pomdp::sim::ScenarioConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rows = run_suite(Suite::H3Existence, &ScenarioConfig::default(), 100, 1)?;
    write_csv(&summarize(&rows), std::io::stdout().lock())?;
    println!();
    let time = compare(&rows, &rows, Metric::Time, Some("tracking"), Some("baseline"), 2000)?;
    write_csv(&time, std::io::stdout().lock())?;
    Ok(())
}
