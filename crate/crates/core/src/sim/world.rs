use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::config::{Presence, ScenarioConfig};
use super::SimError;
use crate::kb::{located, GroundLiteral, ObjectHierarchy};
use crate::pomdp::{GridModel, Observation};
use crate::priors::{alpha_from_counts, PriorConfig};
use crate::rule_lang::{parse_program, Program};

/// Parsed hierarchy program with the grid's rooms declared.
pub fn scenario_program(cfg: &ScenarioConfig) -> Result<Program, SimError> {
    let mut src = cfg.kb_source.clone();
    src.push('\n');
    for r in cfg.room_names() {
        src.push_str(&format!("room({r}).\n"));
    }
    parse_program(&src).map_err(|e| SimError::Config(format!("hierarchy program: {e}")))
}

/// Object hierarchy from the `subclass`/`is` facts of a program.
pub fn scenario_hierarchy(p: &Program) -> Result<ObjectHierarchy, SimError> {
    let mut subclass = Vec::new();
    let mut is = Vec::new();
    for rule in p.rules.iter().filter(|r| r.is_fact()) {
        let Some(head) = &rule.head else { continue };
        let Some(atom) = crate::kb::GroundAtom::from_atom(&head.atom) else {
            continue;
        };
        if head.classically_negated || atom.args.len() != 2 {
            continue;
        }
        let pair = match (atom.args[0].as_sym(), atom.args[1].as_sym()) {
            (Some(a), Some(b)) => (a.to_string(), b.to_string()),
            _ => continue,
        };
        match atom.predicate.as_str() {
            "subclass" => subclass.push(pair),
            "is" => is.push(pair),
            _ => {}
        }
    }
    let sub = subclass.iter().map(|(a, b)| (a.as_str(), b.as_str()));
    let inst = is.iter().map(|(a, b)| (a.as_str(), b.as_str()));
    ObjectHierarchy::from_pairs(sub, inst).map_err(|e| SimError::Config(e.to_string()))
}

/// Grid model for the scenario; cells are numbered row-major.
pub fn build_model(cfg: &ScenarioConfig) -> Result<GridModel, SimError> {
    let g = &cfg.grid;
    let hall = g.rooms.len();
    let mut coords = Vec::new();
    let mut room_of = Vec::new();
    for y in 0..g.height {
        for x in 0..g.width {
            coords.push((x, y));
            room_of.push(g.rooms.iter().position(|r| r.contains((x, y))).unwrap_or(hall));
        }
    }
    GridModel::new(coords, room_of, cfg.room_names(), cfg.observation)
        .map_err(|e| SimError::Config(e.to_string()))
}

/// Ground truth of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    /// Every instance of the hierarchy with its cell; the target is `None` when absent.
    pub placements: Vec<(String, Option<usize>)>,
    pub target: String,
    pub target_class: String,
    pub present: bool,
    pub robot_start: usize,
    /// Per room (model order), whether the robot may sense there.
    pub accessible: Vec<bool>,
}

impl World {
    pub fn target_cell(&self) -> Option<usize> {
        self.placements
            .iter()
            .find(|(o, _)| *o == self.target)
            .and_then(|(_, c)| *c)
    }

    pub fn cell_of(&self, object: &str) -> Option<usize> {
        self.placements
            .iter()
            .find(|(o, _)| o == object)
            .and_then(|(_, c)| *c)
    }
}

fn home_room(cfg: &ScenarioConfig, h: &ObjectHierarchy, class: &str) -> Option<usize> {
    let mut c = Some(class);
    while let Some(name) = c {
        if let Some(room) = cfg.objects.affinity.get(name) {
            return cfg.grid.rooms.iter().position(|r| &r.name == room);
        }
        c = h.parent(name);
    }
    None
}

/// Places objects, then the target in the room that full knowledge of the
/// other objects ranks first (ties to the lowest room index).
pub fn generate_world(
    cfg: &ScenarioConfig,
    model: &GridModel,
    h: &ObjectHierarchy,
    rng: &mut impl Rng,
) -> Result<World, SimError> {
    let mut objects: Vec<(String, String)> = Vec::new();
    for class in h.classes() {
        for inst in h.instances(class) {
            objects.push((inst.clone(), class.to_string()));
        }
    }
    let n_rooms = cfg.grid.rooms.len();
    let capacity: usize = (0..n_rooms).map(|r| model.room_cells(r).len()).sum();
    if objects.len() > capacity {
        return Err(SimError::Config(format!(
            "{} objects do not fit in {capacity} room cells",
            objects.len()
        )));
    }
    if objects.is_empty() {
        return Err(SimError::Config("hierarchy has no instances".into()));
    }
    let target_idx = rng.gen_range(0..objects.len());
    let present = match cfg.trial.presence {
        Presence::Present => true,
        Presence::Absent => false,
        Presence::Mixed => rng.gen_bool(cfg.trial.p_present),
    };

    let mut free: Vec<Vec<usize>> = (0..n_rooms).map(|r| model.room_cells(r).to_vec()).collect();
    let mut take = |room: usize, rng: &mut dyn rand::RngCore| -> Option<usize> {
        if free[room].is_empty() {
            return None;
        }
        let i = rng.gen_range(0..free[room].len());
        Some(free[room].swap_remove(i))
    };
    let mut placements: Vec<(String, Option<usize>)> = Vec::with_capacity(objects.len());
    let mut counts: HashMap<(String, String), usize> = HashMap::new();
    for (i, (obj, class)) in objects.iter().enumerate() {
        if i == target_idx {
            placements.push((obj.clone(), None));
            continue;
        }
        let home = home_room(cfg, h, class);
        let mut room = match home {
            Some(r) if rng.gen_bool(cfg.objects.p_home) => r,
            Some(r) if n_rooms > 1 => {
                let k = rng.gen_range(0..n_rooms - 1);
                if k >= r {
                    k + 1
                } else {
                    k
                }
            }
            _ => rng.gen_range(0..n_rooms),
        };
        let mut cell = take(room, rng);
        while cell.is_none() {
            room = (room + 1) % n_rooms;
            cell = take(room, rng);
        }
        *counts
            .entry((class.clone(), cfg.grid.rooms[room].name.clone()))
            .or_default() += 1;
        placements.push((obj.clone(), cell));
    }

    let (target, target_class) = objects[target_idx].clone();
    if present {
        let names: Vec<String> = cfg.grid.rooms.iter().map(|r| r.name.clone()).collect();
        let prior_cfg: PriorConfig = cfg.prior.into();
        let alpha = alpha_from_counts(h, &counts, &target_class, &names, &prior_cfg)
            .map_err(|e| SimError::Runtime(e.to_string()))?;
        let mut order: Vec<usize> = (0..n_rooms).collect();
        order.sort_by(|&a, &b| alpha[b].total_cmp(&alpha[a]).then(a.cmp(&b)));
        let cell = order.iter().find_map(|&r| take(r, rng));
        placements[target_idx].1 = cell;
    }
    let robot_start = rng.gen_range(0..model.len());
    let mut accessible: Vec<bool> = cfg.grid.rooms.iter().map(|r| r.accessible).collect();
    accessible.push(true);
    Ok(World {
        placements,
        target,
        target_class,
        present,
        robot_start,
        accessible,
    })
}

/// Location facts of every placed non-target object, in a seeded random
/// order. A knowledge level of p% is the first p% of this list, so higher
/// levels extend lower ones.
pub fn shuffled_facts(world: &World, model: &GridModel, rng: &mut impl Rng) -> Vec<GroundLiteral> {
    let mut facts: Vec<GroundLiteral> = world
        .placements
        .iter()
        .filter(|(o, _)| *o != world.target)
        .filter_map(|(o, c)| {
            c.map(|c| located(o, &model.room_names()[model.room_of(c)], 1))
        })
        .collect();
    facts.shuffle(rng);
    facts
}

/// Number of facts making up `percent`% of `total`, rounded to nearest.
pub fn knowledge_count(total: usize, percent: u32) -> usize {
    ((total as f64) * (percent.min(100) as f64) / 100.0).round() as usize
}

/// A `percent`% sample of the non-target location facts.
pub fn knowledge_subset(
    world: &World,
    model: &GridModel,
    percent: u32,
    rng: &mut impl Rng,
) -> Vec<GroundLiteral> {
    let mut facts = shuffled_facts(world, model, rng);
    facts.truncate(knowledge_count(facts.len(), percent));
    facts
}

/// Bernoulli draw from the detection model for the true target cell, or the
/// false-positive rate when the target is absent.
pub fn sample_observation(
    world: &World,
    a: usize,
    model: &GridModel,
    rng: &mut impl Rng,
) -> Observation {
    let p = match world.target_cell() {
        Some(cell) => model.detection_prob(cell, a),
        None => model.observation_model().epsilon,
    };
    if rng.gen_bool(p.clamp(0.0, 1.0)) {
        Observation::Present
    } else {
        Observation::Absent
    }
}
