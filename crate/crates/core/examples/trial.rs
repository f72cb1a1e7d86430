//! One simulated search with its step log.
use asp_pomdp::sim::{trial_seed, Scenario, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ScenarioConfig::default();
    cfg.trial.knowledge = 40;
    let scenario = Scenario::new(cfg)?;
    let (result, log) = scenario.run_trial(0, trial_seed(1, 0), true)?;
    for s in &log {
        println!(
            "t={:3} look {:?} {:?} max {:.2} H {:.2}{}",
            s.time,
            scenario.model().coords(s.action_cell),
            s.obs,
            s.max_belief,
            s.belief_entropy,
            if s.queried { " (asked a person)" } else { "" }
        );
    }
    println!(
        "{} after {} units, correct: {}",
        result.outcome.name(),
        result.elapsed,
        result.correct
    );
    Ok(())
}
