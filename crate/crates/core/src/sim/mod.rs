//! Grid-world simulation of active object search: scenario config, world
//! generation, simulated humans and the per-trial control loop.

pub mod config;
pub mod human;
pub mod trial;
pub mod world;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use config::{
    CostMode, ExperimentConfig, GridConfig, HumanConfig, ObjectConfig, Presence, PriorSettings, RoomSpec,
    ScenarioConfig, Thresholds, TimeConfig, TrialConfig,
};
pub use human::Answer;
pub use trial::{Outcome, Scenario, StepRecord, TrialResult};
pub use world::{
    build_model, generate_world, knowledge_count, knowledge_subset, sample_observation,
    shuffled_facts, World,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("config error: {0}")]
    Config(String),
    #[error("trial error: {0}")]
    Runtime(String),
}

impl SimError {
    pub fn is_config(&self) -> bool {
        matches!(self, SimError::Config(_))
    }
}

/// Seed of trial `index` under `base` (splitmix64 finalizer).
pub fn trial_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent random streams of a trial. Conditions that share a seed see
/// the same world, knowledge order, humans and sensor noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    World = 1,
    Knowledge = 2,
    Observation = 3,
    Human = 4,
    Policy = 5,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
