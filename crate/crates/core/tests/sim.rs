use std::collections::HashSet;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use asp_pomdp::experiments::prior_rank;
use asp_pomdp::pomdp::Observation;
use asp_pomdp::sim::human::{answer, appears};
use asp_pomdp::sim::{
    knowledge_subset, sample_observation, trial_seed, Answer, HumanConfig, Outcome, Presence,
    Scenario, ScenarioConfig,
};

fn scenario(f: impl FnOnce(&mut ScenarioConfig)) -> Scenario {
    let mut cfg = ScenarioConfig::default();
    f(&mut cfg);
    Scenario::new(cfg).unwrap()
}

fn rate(n: usize, mut hit: impl FnMut() -> bool) -> f64 {
    (0..n).filter(|_| hit()).count() as f64 / n as f64
}

#[test]
fn worlds_are_reproducible() {
    let s = scenario(|_| {});
    assert_eq!(s.world(7).unwrap(), s.world(7).unwrap());
    assert_ne!(s.world(7).unwrap(), s.world(8).unwrap());
}

#[test]
fn default_census() {
    let s = scenario(|_| {});
    let w = s.world(3).unwrap();
    assert_eq!(w.placements.len(), 50);
    assert!(w.placements.iter().all(|(_, c)| c.is_some()));
    let leaves: Vec<&str> = s
        .hierarchy()
        .classes()
        .filter(|c| s.hierarchy().children(c).is_empty())
        .collect();
    assert_eq!(leaves.len(), 10);
    for c in leaves {
        assert!(!s.hierarchy().instances(c).is_empty(), "{c} has no instances");
    }
    let cells: HashSet<usize> = w.placements.iter().filter_map(|(_, c)| *c).collect();
    assert_eq!(cells.len(), 50, "two objects share a cell");
}

#[test]
fn absent_target_is_unplaced() {
    let s = scenario(|c| c.trial.presence = Presence::Absent);
    let w = s.world(11).unwrap();
    assert!(!w.present);
    assert_eq!(w.target_cell(), None);
    let placed = w.placements.iter().filter(|(_, c)| c.is_some()).count();
    assert_eq!(placed, 49);
}

#[test]
fn knowledge_levels() {
    let s = scenario(|_| {});
    let w = s.world(5).unwrap();
    let subset = |pct, seed| knowledge_subset(&w, s.model(), pct, &mut ChaCha8Rng::seed_from_u64(seed));
    assert_eq!(subset(100, 1).len(), 49);
    assert!(subset(0, 1).is_empty());
    assert_eq!(subset(50, 2), subset(50, 2));
    let half = subset(50, 2);
    assert_eq!(half.len(), 25);
    // Higher levels extend lower ones under the same seed.
    assert_eq!(&subset(80, 2)[..25], &half[..]);
}

#[test]
fn detection_rates_match_the_model() {
    let s = scenario(|_| {});
    let w = s.world(2).unwrap();
    let cell = w.target_cell().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 10_000;
    let hit = rate(n, || sample_observation(&w, cell, s.model(), &mut rng) == Observation::Present);
    assert!((hit - 0.8).abs() < 0.02, "{hit}");

    let far = (0..s.model().len())
        .find(|&a| !s.model().in_fov(cell, a))
        .unwrap();
    let fp = rate(n, || sample_observation(&w, far, s.model(), &mut rng) == Observation::Present);
    assert!((fp - 0.05).abs() < 0.01, "{fp}");

    let silent = scenario(|c| {
        c.trial.presence = Presence::Absent;
        c.observation.epsilon = 0.0;
    });
    let w = silent.world(2).unwrap();
    for a in 0..silent.model().len() {
        assert_eq!(sample_observation(&w, a, silent.model(), &mut rng), Observation::Absent);
    }
}

#[test]
fn human_answer_rates() {
    let cfg = HumanConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 20_000;
    let answers: Vec<Answer> = (0..n).map(|_| answer(&cfg, Some(2), 5, &mut rng)).collect();
    let share = |f: &dyn Fn(&Answer) -> bool| answers.iter().filter(|a| f(a)).count() as f64 / n as f64;
    let right = share(&|a| matches!(a, Answer::Room { room: 2, truthful: true }));
    let unknown = share(&|a| *a == Answer::Unknown);
    let wrong = share(&|a| matches!(a, Answer::Room { room, truthful: false } if *room != 2));
    assert!((right - cfg.p_correct).abs() < 0.01);
    assert!((unknown - cfg.p_unknown).abs() < 0.01);
    assert!((wrong - cfg.p_incorrect).abs() < 0.01);

    let shown = rate(n, || appears(&cfg, &mut rng));
    assert!((shown - cfg.appear_prob).abs() < 0.01);
    let off = HumanConfig {
        enabled: false,
        ..cfg
    };
    assert!(!appears(&off, &mut rng));
    // Nobody can point at an absent target.
    for _ in 0..1000 {
        if let Answer::Room { truthful, .. } = answer(&cfg, None, 5, &mut rng) {
            assert!(!truthful);
        }
    }
}

#[test]
fn trials_are_reproducible() {
    let s = scenario(|c| c.trial.knowledge = 30);
    let a = s.run_trial(4, trial_seed(9, 4), true).unwrap();
    let b = s.run_trial(4, trial_seed(9, 4), true).unwrap();
    assert_eq!(a, b);
}

#[test]
fn zero_time_limit_times_out() {
    let s = scenario(|c| c.time.limit = 0);
    let (r, log) = s.run_trial(0, 1, true).unwrap();
    assert_eq!(r.outcome, Outcome::Timeout);
    assert_eq!(r.steps, 0);
    assert!(log.is_empty());
}

#[test]
fn time_accounts_for_actions_and_queries() {
    let s = scenario(|c| {
        c.trial.knowledge = 0;
        c.thresholds.entropy_gate = 0.0;
    });
    let mut asked = 0;
    for i in 0..30 {
        let (r, log) = s.run_trial(i, trial_seed(2, i), true).unwrap();
        assert_eq!(r.elapsed, r.steps + 2 * r.queries);
        assert!(r.elapsed <= s.cfg.time.limit);
        assert_eq!(log.len() as u32, r.steps);
        assert_eq!(log.iter().filter(|l| l.queried).count() as u32, r.queries);
        asked += r.queries;
    }
    assert!(asked > 0);
}

#[test]
fn full_knowledge_ranks_the_true_room_first() {
    let s = scenario(|c| c.trial.knowledge = 100);
    for i in 0..100 {
        assert_eq!(prior_rank(&s, trial_seed(5, i)).unwrap(), 0, "trial {i}");
    }
}

#[test]
fn truthful_humans_help_without_prior_knowledge() {
    let run = |human: bool| {
        let s = scenario(|c| {
            c.trial.knowledge = 0;
            c.human.enabled = human;
            c.human.appear_prob = 1.0;
            c.human.p_correct = 1.0;
            c.human.p_unknown = 0.0;
            c.human.p_incorrect = 0.0;
            c.thresholds.entropy_gate = 0.0;
        });
        (0..60)
            .map(|i| s.run_trial(i, trial_seed(3, i), false).unwrap().0)
            .filter(|r| r.correct)
            .count()
    };
    assert!(run(true) > run(false));
}

#[test]
fn existence_tracking_ends_absent_trials_early() {
    let s = scenario(|c| {
        c.trial.presence = Presence::Absent;
        c.trial.existence_tracking = true;
        c.human.enabled = false;
    });
    let mut declared = 0;
    for i in 0..20 {
        let (r, _) = s.run_trial(i, trial_seed(4, i), false).unwrap();
        assert!(r.correct);
        if r.outcome == Outcome::DeclaredAbsent {
            declared += 1;
            assert!(r.elapsed < s.cfg.time.limit);
            assert!(r.p_not_exist >= s.cfg.thresholds.theta_absent);
        }
    }
    assert!(declared > 10);
}

#[test]
fn shipped_scenario_matches_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/office.toml");
    let cfg = ScenarioConfig::load(&path).unwrap();
    let default = ScenarioConfig::default();
    assert_eq!(cfg.hash(), default.hash());
    assert_eq!(
        ScenarioConfig {
            hierarchy: None,
            ..cfg
        },
        default
    );
}

#[test]
fn config_round_trips_through_toml() {
    let mut cfg = ScenarioConfig::default();
    cfg.trial.knowledge = 40;
    let back = ScenarioConfig::from_toml(&cfg.to_toml(), None).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        "[trial]\nknowledge = 150",
        "[human]\np_correct = 0.9\np_unknown = 0.3",
        "[trial]\nmerge = \"median\"",
        "[[grid.rooms]]\nname = \"a\"\nx = [0, 20]\ny = [0, 2]",
        "[observation]\nepsilon = 0.9",
        "[objects.affinity]\ncomputing = \"attic\"",
    ];
    for text in bad {
        let err = ScenarioConfig::from_toml(text, None).unwrap_err();
        assert!(err.is_config(), "{text}: {err}");
    }
}
