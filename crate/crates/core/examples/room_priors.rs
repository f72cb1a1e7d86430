//! Room priors for the target as the KB learns more object locations.
use asp_pomdp::sim::{Scenario, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for knowledge in [0, 30, 100] {
        let mut cfg = ScenarioConfig::default();
        cfg.trial.knowledge = knowledge;
        let scenario = Scenario::new(cfg)?;
        let start = scenario.start(7)?;
        let truth = start
            .world
            .target_cell()
            .map(|c| scenario.rooms()[scenario.model().room_of(c)].clone());
        println!(
            "{knowledge}% known, target {} ({}) in {}",
            start.world.target,
            start.world.target_class,
            truth.unwrap_or_default()
        );
        print!("{}", start.prior.to_csv(scenario.rooms()));
        let p: Vec<String> = start.prior.expectation().iter().map(|x| format!("{x:.3}")).collect();
        println!("p(room) = [{}], p(absent) = {:.3}\n", p.join(", "), start.prior.p_not_exist());
    }
    Ok(())
}
