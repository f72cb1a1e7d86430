use log::debug;
use serde::{Deserialize, Serialize, Serializer};

use super::config::{CostMode, ScenarioConfig};
use super::human::{self, Answer};
use super::world::{
    build_model, generate_world, knowledge_count, sample_observation, scenario_hierarchy,
    scenario_program, shuffled_facts, World,
};
use super::{stream_rng, SimError, Stream};
use crate::existence::ExistenceBelief;
use crate::fusion::{
    bayesian_merge, dirichlet_weight_merge, redistribute, room_marginals, weighted_average_merge,
    MergeStrategy,
};
use crate::kb::{located, Confidence, FactMeta, GroundTerm, KnowledgeBase, ObjectHierarchy};
use crate::pomdp::{belief_update, select_action, Belief, GridModel, Observation};
use crate::priors::{PriorConfig, RoomPrior};
use crate::rule_lang::Program;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Localized,
    DeclaredAbsent,
    Timeout,
}

impl Outcome {
    pub fn name(&self) -> &'static str {
        match self {
            Outcome::Localized => "localized",
            Outcome::DeclaredAbsent => "declared_absent",
            Outcome::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: u64,
    pub seed: u64,
    pub present: bool,
    pub outcome: Outcome,
    /// Distance from the declared cell to the target (localized, present only).
    #[serde(serialize_with = "opt_fixed")]
    pub error: Option<f64>,
    /// Distance from the final belief maximum to the target, whatever the outcome.
    #[serde(serialize_with = "opt_fixed")]
    pub guess_error: Option<f64>,
    /// Localized in the target's room; for an absent target, declared absent
    /// or not found within the time limit.
    pub correct: bool,
    pub elapsed: u32,
    pub queries: u32,
    pub steps: u32,
    /// Fully negative room sweeps.
    pub sweeps: u32,
    #[serde(serialize_with = "fixed")]
    pub p_not_exist: f64,
    pub kb_facts: usize,
}

/// One row of the step log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub trial: u64,
    pub step: u32,
    pub time: u32,
    pub action_cell: usize,
    pub obs: Observation,
    #[serde(serialize_with = "fixed")]
    pub max_belief: f64,
    #[serde(serialize_with = "fixed")]
    pub belief_entropy: f64,
    #[serde(serialize_with = "fixed")]
    pub p_not_exist: f64,
    pub queried: bool,
    pub kb_facts: usize,
}

pub(crate) fn fixed<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{x:.6}"))
}

fn opt_fixed<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => fixed(v, s),
        None => s.serialize_str(""),
    }
}

/// A validated scenario with its grid model and parsed hierarchy program,
/// shared by all trials.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub cfg: ScenarioConfig,
    model: GridModel,
    program: Program,
    hierarchy: ObjectHierarchy,
}

/// State fixed at the start of a trial.
pub struct TrialStart {
    pub world: World,
    pub kb: KnowledgeBase,
    pub prior: RoomPrior,
    /// Location facts not yet known, in reveal order.
    pub hidden: Vec<crate::kb::GroundLiteral>,
}

impl Scenario {
    pub fn new(cfg: ScenarioConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let model = build_model(&cfg)?;
        let program = scenario_program(&cfg)?;
        let hierarchy = scenario_hierarchy(&program)?;
        Ok(Scenario {
            cfg,
            model,
            program,
            hierarchy,
        })
    }

    pub fn model(&self) -> &GridModel {
        &self.model
    }

    pub fn hierarchy(&self) -> &ObjectHierarchy {
        &self.hierarchy
    }

    pub fn rooms(&self) -> &[String] {
        self.model.room_names()
    }

    fn prior_config(&self) -> PriorConfig {
        self.cfg.prior.into()
    }

    pub fn world(&self, seed: u64) -> Result<World, SimError> {
        let mut rng = stream_rng(seed, Stream::World);
        generate_world(&self.cfg, &self.model, &self.hierarchy, &mut rng)
    }

    /// World, KB holding the configured share of object locations, and the
    /// room prior it implies.
    pub fn start(&self, seed: u64) -> Result<TrialStart, SimError> {
        let world = self.world(seed)?;
        let mut rng = stream_rng(seed, Stream::Knowledge);
        let mut hidden = shuffled_facts(&world, &self.model, &mut rng);
        let known: Vec<_> = hidden
            .drain(..knowledge_count(hidden.len(), self.cfg.trial.knowledge))
            .map(|l| (l, FactMeta::initial()))
            .collect();
        let mut kb = KnowledgeBase::with_facts(self.program.clone(), known).map_err(runtime)?;
        let prior = RoomPrior::from_kb(
            &mut kb,
            &world.target_class,
            self.rooms(),
            Some(&world.target),
            &self.prior_config(),
        )
        .map_err(runtime)?;
        Ok(TrialStart {
            world,
            kb,
            prior,
            hidden,
        })
    }

    /// Runs trial `index` with `seed`; the step log is collected when `log` is set.
    pub fn run_trial(
        &self,
        index: u64,
        seed: u64,
        log: bool,
    ) -> Result<(TrialResult, Vec<StepRecord>), SimError> {
        let cfg = &self.cfg;
        let model = &self.model;
        let TrialStart {
            world,
            mut kb,
            mut prior,
            mut hidden,
        } = self.start(seed)?;
        let mut obs_rng = stream_rng(seed, Stream::Observation);
        let mut human_rng = stream_rng(seed, Stream::Human);
        let mut policy_rng = stream_rng(seed, Stream::Policy);

        let n_rooms = model.room_count();
        let allowed: Vec<bool> = (0..model.len())
            .map(|c| world.accessible[model.room_of(c)])
            .collect();
        let mask = allowed.iter().any(|a| !a).then_some(allowed.as_slice());
        let true_room = world.target_cell().map(|c| model.room_of(c));

        let mut applied = vec![1.0 / n_rooms as f64; n_rooms];
        let mut belief = merge(
            cfg.trial.merge,
            &Belief::uniform(model.len()),
            &prior,
            &mut applied,
            model,
        );
        let initial = RoomPrior::from_alpha(prior.smoothed_alpha(), prior.delta);
        let mut existence = ExistenceBelief::new(initial.p_not_exist());
        let mut covered: Vec<Vec<bool>> = (0..n_rooms)
            .map(|r| vec![false; model.room_cells(r).len()])
            .collect();
        let mut sweep_counts = vec![0u32; n_rooms];

        let limit = cfg.time.limit;
        let mut elapsed = 0u32;
        let mut steps = 0u32;
        let mut queries = 0u32;
        let mut position = world.robot_start;
        let mut records = Vec::new();

        let outcome = loop {
            if elapsed >= limit {
                break Outcome::Timeout;
            }
            let a = select_action(&belief, model, &cfg.policy, mask, &mut policy_rng);
            elapsed += match cfg.time.cost_mode {
                CostMode::Unit => 1,
                CostMode::Manhattan => model.manhattan(position, a).max(1),
            };
            position = a;
            steps += 1;

            let z = sample_observation(&world, a, model, &mut obs_rng);
            let next = belief_update(&belief, a, z, model).map_err(runtime)?;
            existence
                .observe(a, z, &belief, &next, model)
                .map_err(runtime)?;
            belief = next;
            if z == Observation::Absent {
                let r = model.room_of(a);
                let cells = model.room_cells(r);
                for &c in model.fov_states(a) {
                    if let Ok(i) = cells.binary_search(&c) {
                        covered[r][i] = true;
                    }
                }
                if covered[r].iter().all(|&c| c) {
                    sweep_counts[r] += 1;
                    prior.record_negative_sweep(r);
                    covered[r].iter_mut().for_each(|c| *c = false);
                }
            }

            let mut kb_changed = false;
            if z == Observation::Present && belief.max() > cfg.thresholds.assert_confidence {
                let room = &model.room_names()[model.room_of(belief.argmax())];
                let meta = FactMeta::sensor(Confidence::High, kb.now());
                kb_changed |= assert_location(&mut kb, &world.target, room, meta)?;
            }

            let localized = belief.max() >= cfg.thresholds.belief_stop;
            let absent = cfg.trial.existence_tracking
                && existence.should_terminate(cfg.thresholds.theta_absent);

            let mut queried = false;
            if !localized && !absent && human::appears(&cfg.human, &mut human_rng) {
                let gate_open = belief.entropy() > cfg.thresholds.entropy_gate;
                if gate_open && elapsed + cfg.time.query_cost <= limit {
                    queried = true;
                    queries += 1;
                    elapsed += cfg.time.query_cost;
                    let reply =
                        human::answer(&cfg.human, true_room, cfg.grid.rooms.len(), &mut human_rng);
                    debug!("trial {index} step {steps}: human says {reply:?}");
                    if let Answer::Room { room, .. } = reply {
                        let room = &model.room_names()[room];
                        let meta = FactMeta::human(kb.now());
                        kb_changed |= assert_location(&mut kb, &world.target, room, meta)?;
                    }
                }
            }

            let every = cfg.trial.inject_every;
            if every > 0 && steps.is_multiple_of(every) && !hidden.is_empty() {
                let n = (cfg.trial.inject_count as usize).min(hidden.len());
                for lit in hidden.drain(..n) {
                    let meta = FactMeta::human(kb.now());
                    kb.assert_fact(lit, meta).map_err(runtime)?;
                }
                kb_changed |= n > 0;
            }

            if kb_changed && !localized && !absent {
                prior = RoomPrior::from_kb(
                    &mut kb,
                    &world.target_class,
                    self.rooms(),
                    Some(&world.target),
                    &self.prior_config(),
                )
                .map_err(runtime)?;
                for (r, &n) in sweep_counts.iter().enumerate() {
                    for _ in 0..n {
                        prior.record_negative_sweep(r);
                    }
                }
                belief = merge(cfg.trial.merge, &belief, &prior, &mut applied, model);
            }

            if log {
                records.push(StepRecord {
                    trial: index,
                    step: steps,
                    time: elapsed,
                    action_cell: a,
                    obs: z,
                    max_belief: belief.max(),
                    belief_entropy: belief.entropy(),
                    p_not_exist: existence.p_not_exist(),
                    queried,
                    kb_facts: kb.fact_count(),
                });
            }
            if localized {
                break Outcome::Localized;
            }
            if absent {
                break Outcome::DeclaredAbsent;
            }
        };

        let target = world.target_cell();
        let dist = |c: usize| target.map(|t| model.distance(c, t));
        let guess = belief.argmax();
        let correct = match (outcome, true_room) {
            (Outcome::Localized, Some(r)) => model.room_of(guess) == r,
            (Outcome::DeclaredAbsent | Outcome::Timeout, None) => true,
            _ => false,
        };
        let result = TrialResult {
            trial: index,
            seed,
            present: world.present,
            outcome,
            error: (outcome == Outcome::Localized).then(|| dist(guess)).flatten(),
            guess_error: dist(guess),
            correct,
            elapsed,
            queries,
            steps,
            sweeps: sweep_counts.iter().sum(),
            p_not_exist: existence.p_not_exist(),
            kb_facts: kb.fact_count(),
        };
        Ok((result, records))
    }
}

fn runtime(e: impl std::fmt::Display) -> SimError {
    SimError::Runtime(e.to_string())
}

/// Records that `object` is in `room`. A location already entailed at the
/// current step is a no-op; a different known location moves the KB to a
/// new step so inertia carries the older one up to it.
fn assert_location(
    kb: &mut KnowledgeBase,
    object: &str,
    room: &str,
    meta: FactMeta,
) -> Result<bool, SimError> {
    let now = kb.now();
    let answer = kb.answer_set().map_err(runtime)?;
    if answer.contains(&located(object, room, now)) {
        return Ok(false);
    }
    let elsewhere = answer.positive.iter().any(|a| {
        a.predicate == "holds"
            && a.args[1].as_int() == Some(now)
            && matches!(&a.args[0], GroundTerm::Func(f, args)
                if f == "in" && args[0].as_sym() == Some(object))
    });
    let step = if elsewhere { now + 1 } else { now };
    kb.assert_fact(located(object, room, step), meta)
        .map_err(runtime)?;
    Ok(true)
}

/// Folds the room prior into the belief. The Bayesian strategy multiplies in
/// only the change since the previously applied prior, so repeated merges do
/// not count the same evidence twice.
fn merge(
    strategy: MergeStrategy,
    belief: &Belief,
    prior: &RoomPrior,
    applied: &mut Vec<f64>,
    model: &GridModel,
) -> Belief {
    let expectation = prior.expectation();
    let marginals = room_marginals(belief, model);
    let merged = match strategy {
        MergeStrategy::None => return belief.clone(),
        MergeStrategy::Bayesian => {
            let ratio: Vec<f64> = expectation
                .iter()
                .zip(applied.iter())
                .map(|(e, p)| e / p)
                .collect();
            bayesian_merge(&ratio, &marginals)
        }
        MergeStrategy::TrustFactor { weight } => {
            weighted_average_merge(&expectation, &marginals, weight)
        }
        MergeStrategy::DirichletWeight => {
            dirichlet_weight_merge(&prior.smoothed_alpha(), &expectation, &marginals)
        }
    };
    *applied = expectation;
    redistribute(belief, &merged, model)
}
