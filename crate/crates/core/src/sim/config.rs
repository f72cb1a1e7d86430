use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::SimError;
use crate::fusion::MergeStrategy;
use crate::pomdp::{ObservationModel, PolicyConfig};
use crate::priors::PriorConfig;

const OFFICE_KB: &str = include_str!("../../scenarios/office.kb");

/// A rectangular room, inclusive cell bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomSpec {
    pub name: String,
    pub x: [i32; 2],
    pub y: [i32; 2],
    #[serde(default = "yes")]
    pub accessible: bool,
}

fn yes() -> bool {
    true
}

impl RoomSpec {
    pub fn contains(&self, (x, y): (i32, i32)) -> bool {
        (self.x[0]..=self.x[1]).contains(&x) && (self.y[0]..=self.y[1]).contains(&y)
    }
}

/// Grid cells not covered by a room belong to the hallway.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub width: i32,
    pub height: i32,
    pub hallway: String,
    pub rooms: Vec<RoomSpec>,
}

impl Default for GridConfig {
    fn default() -> Self {
        let room = |name: &str, x: [i32; 2], y: [i32; 2]| RoomSpec {
            name: name.into(),
            x,
            y,
            accessible: true,
        };
        GridConfig {
            width: 15,
            height: 15,
            hallway: "hallway".into(),
            rooms: vec![
                room("room1", [1, 6], [1, 6]),
                room("room2", [8, 13], [1, 6]),
                room("room3", [1, 6], [8, 13]),
                room("room4", [8, 13], [8, 13]),
            ],
        }
    }
}

/// Where objects are placed: each object lands in the home room of its
/// nearest classified ancestor with probability `p_home`, elsewhere uniformly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObjectConfig {
    pub p_home: f64,
    pub affinity: BTreeMap<String, String>,
}

impl Default for ObjectConfig {
    fn default() -> Self {
        let affinity = [
            ("computing", "room1"),
            ("imaging", "room2"),
            ("av", "room3"),
            ("telecom", "room4"),
        ];
        ObjectConfig {
            p_home: 0.6,
            affinity: affinity
                .iter()
                .map(|(c, r)| (c.to_string(), r.to_string()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Stop and declare a cell once its belief reaches this.
    pub belief_stop: f64,
    /// Ask a human only while belief entropy (bits) exceeds this.
    pub entropy_gate: f64,
    pub theta_absent: f64,
    /// Detections are asserted into the KB when the cell belief exceeds this.
    pub assert_confidence: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            belief_stop: 0.8,
            entropy_gate: 6.0,
            theta_absent: 0.9,
            assert_confidence: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    /// Every sensing action costs one unit.
    Unit,
    /// Manhattan distance from the previous action cell, at least one.
    Manhattan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimeConfig {
    pub limit: u32,
    pub cost_mode: CostMode,
    pub query_cost: u32,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig {
            limit: 100,
            cost_mode: CostMode::Unit,
            query_cost: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HumanConfig {
    pub enabled: bool,
    pub appear_prob: f64,
    pub p_correct: f64,
    pub p_unknown: f64,
    pub p_incorrect: f64,
}

impl Default for HumanConfig {
    fn default() -> Self {
        HumanConfig {
            enabled: true,
            appear_prob: 0.5,
            p_correct: 0.8,
            p_unknown: 0.15,
            p_incorrect: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Presence {
    Present,
    Absent,
    /// Present with probability `p_present`.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrialConfig {
    pub merge: MergeStrategy,
    /// Percent of non-target object locations known up front.
    pub knowledge: u32,
    pub presence: Presence,
    pub p_present: f64,
    pub existence_tracking: bool,
    /// Every this many actions, reveal `inject_count` more object locations (0 = never).
    pub inject_every: u32,
    pub inject_count: u32,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            merge: MergeStrategy::Bayesian,
            knowledge: 100,
            presence: Presence::Present,
            p_present: 0.5,
            existence_tracking: false,
            inject_every: 0,
            inject_count: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorSettings {
    pub xi: f64,
    pub delta: f64,
}

impl Default for PriorSettings {
    fn default() -> Self {
        let d = PriorConfig::default();
        PriorSettings {
            xi: d.xi,
            delta: d.delta,
        }
    }
}

impl From<PriorSettings> for PriorConfig {
    fn from(p: PriorSettings) -> Self {
        PriorConfig {
            xi: p.xi,
            delta: p.delta,
        }
    }
}

/// Sweep axes and fixed conditions of the experiment suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Knowledge levels (percent) swept by the H1 suites.
    pub knowledge_levels: Vec<u32>,
    pub merge_knowledge: u32,
    pub merge_inject_every: u32,
    pub merge_inject_count: u32,
    pub trust_weight: f64,
    pub h2_knowledge: u32,
    /// Entropy gates (bits) swept by H2.
    pub h2_gates: Vec<f64>,
    pub h3_knowledge: u32,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            knowledge_levels: (0..=10).map(|i| i * 10).collect(),
            merge_knowledge: 20,
            merge_inject_every: 10,
            merge_inject_count: 3,
            trust_weight: 0.5,
            h2_knowledge: 50,
            h2_gates: (0..=16).map(|i| i as f64 * 0.5).collect(),
            h3_knowledge: 50,
        }
    }
}

/// Everything a trial needs. Defaults reproduce the office scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub name: String,
    /// Hierarchy and rules; file path relative to the scenario file when loaded.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hierarchy: Option<String>,
    /// Contents of the hierarchy program (resolved from `hierarchy`).
    #[serde(skip)]
    pub kb_source: String,
    pub grid: GridConfig,
    pub objects: ObjectConfig,
    pub observation: ObservationModel,
    pub policy: PolicyConfig,
    pub thresholds: Thresholds,
    pub time: TimeConfig,
    pub human: HumanConfig,
    pub trial: TrialConfig,
    pub prior: PriorSettings,
    pub experiments: ExperimentConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            name: "office".into(),
            hierarchy: None,
            kb_source: OFFICE_KB.to_string(),
            grid: GridConfig::default(),
            objects: ObjectConfig::default(),
            observation: ObservationModel::default(),
            policy: PolicyConfig::default(),
            thresholds: Thresholds::default(),
            time: TimeConfig::default(),
            human: HumanConfig::default(),
            trial: TrialConfig::default(),
            prior: PriorSettings::default(),
            experiments: ExperimentConfig::default(),
        }
    }
}

impl ScenarioConfig {
    /// Parses TOML; a relative `hierarchy` path is resolved against `base`.
    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<Self, SimError> {
        let mut cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        match &cfg.hierarchy {
            Some(file) => {
                let path = base.map(|b| b.join(file)).unwrap_or_else(|| file.into());
                cfg.kb_source = std::fs::read_to_string(&path)
                    .map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
            }
            None => cfg.kb_source = OFFICE_KB.to_string(),
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 over the serialized config and hierarchy program. The
    /// hierarchy's file name is left out; only its contents count.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        let unnamed = ScenarioConfig {
            hierarchy: None,
            ..self.clone()
        };
        h.update(unnamed.to_toml().as_bytes());
        h.update(self.kb_source.as_bytes());
        hex::encode(&h.finalize()[..8])
    }

    /// Room names in model order: grid rooms, then the hallway.
    pub fn room_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.grid.rooms.iter().map(|r| r.name.clone()).collect();
        names.push(self.grid.hallway.clone());
        names
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        let g = &self.grid;
        if g.width <= 0 || g.height <= 0 {
            return bad(format!("grid {}x{} is empty", g.width, g.height));
        }
        if g.rooms.is_empty() {
            return bad("no rooms".into());
        }
        let mut names = std::collections::HashSet::new();
        for (i, r) in g.rooms.iter().enumerate() {
            if !names.insert(r.name.as_str()) || r.name == g.hallway {
                return bad(format!("duplicate room name {}", r.name));
            }
            if r.x[0] > r.x[1] || r.y[0] > r.y[1] {
                return bad(format!("room {} has inverted bounds", r.name));
            }
            if r.x[0] < 0 || r.y[0] < 0 || r.x[1] >= g.width || r.y[1] >= g.height {
                return bad(format!("room {} leaves the grid", r.name));
            }
            for other in &g.rooms[..i] {
                let overlap = r.x[0] <= other.x[1]
                    && other.x[0] <= r.x[1]
                    && r.y[0] <= other.y[1]
                    && other.y[0] <= r.y[1];
                if overlap {
                    return bad(format!("rooms {} and {} overlap", other.name, r.name));
                }
            }
        }
        for (class, room) in &self.objects.affinity {
            if !g.rooms.iter().any(|r| &r.name == room) {
                return bad(format!("affinity {class} -> unknown room {room}"));
            }
        }
        let probs = [
            ("objects.p_home", self.objects.p_home),
            ("human.appear_prob", self.human.appear_prob),
            ("human.p_correct", self.human.p_correct),
            ("human.p_unknown", self.human.p_unknown),
            ("human.p_incorrect", self.human.p_incorrect),
            ("trial.p_present", self.trial.p_present),
            ("thresholds.belief_stop", self.thresholds.belief_stop),
            ("thresholds.theta_absent", self.thresholds.theta_absent),
            ("thresholds.assert_confidence", self.thresholds.assert_confidence),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        let h = &self.human;
        if (h.p_correct + h.p_unknown + h.p_incorrect - 1.0).abs() > 1e-9 {
            return bad("human answer probabilities must sum to 1".into());
        }
        if self.trial.knowledge > 100 {
            return bad(format!("knowledge {}% exceeds 100", self.trial.knowledge));
        }
        if self.thresholds.entropy_gate < 0.0 {
            return bad("entropy gate must be non-negative".into());
        }
        if self.prior.delta <= 0.0 {
            return bad("prior.delta must be positive".into());
        }
        if let MergeStrategy::TrustFactor { weight } = self.trial.merge {
            if !(0.0..=1.0).contains(&weight) {
                return bad(format!("trust weight {weight} outside [0, 1]"));
            }
        }
        self.observation
            .validate()
            .map_err(|e| SimError::Config(e.to_string()))?;
        let e = &self.experiments;
        if e.knowledge_levels.iter().chain([&e.merge_knowledge, &e.h2_knowledge, &e.h3_knowledge]).any(|&k| k > 100) {
            return bad("experiment knowledge levels must be within 0..=100".into());
        }
        if e.h2_gates.iter().any(|g| *g < 0.0 || !g.is_finite()) {
            return bad("entropy gates must be non-negative".into());
        }
        if !(0.0..=1.0).contains(&e.trust_weight) {
            return bad(format!("trust weight {} outside [0, 1]", e.trust_weight));
        }
        if self.policy.stochastic && self.policy.temperature <= 0.0 {
            return bad("policy temperature must be positive".into());
        }
        Ok(())
    }
}
