//! Visual-search POMDP over grid cells: field of view, detection model,
//! Bayesian belief update, entropy reward and information-gain policy.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PomdpError {
    #[error("observation {0:?} has zero likelihood under the model")]
    ImpossibleObservation(Observation),
    #[error("action {0} is out of range")]
    InvalidAction(usize),
    #[error("belief has {got} entries, model has {expected} cells")]
    BeliefLength { expected: usize, got: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observation {
    Present,
    Absent,
}

/// Detection parameters of the sense action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObservationModel {
    pub p_max: f64,
    /// Distance falloff in cells.
    pub sigma: f64,
    pub fov_radius: f64,
    /// False-positive probability.
    pub epsilon: f64,
}

impl Default for ObservationModel {
    fn default() -> Self {
        ObservationModel {
            p_max: 0.8,
            sigma: 1.5,
            fov_radius: 2.0,
            epsilon: 0.05,
        }
    }
}

impl ObservationModel {
    pub fn validate(&self) -> Result<(), PomdpError> {
        let ok = self.epsilon >= 0.0
            && self.epsilon < self.p_max
            && self.p_max <= 1.0
            && self.sigma > 0.0
            && self.fov_radius >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(PomdpError::InvalidModel(format!("{self:?}")))
        }
    }

    /// Detection probability at distance `d` inside the field of view.
    pub fn in_view(&self, d: f64) -> f64 {
        self.p_max * (-d * d / (2.0 * self.sigma * self.sigma)).exp()
    }
}

/// Cells with coordinates and room labels, plus the precomputed field of view
/// of every sense action. Action `i` examines from cell `i`.
#[derive(Debug, Clone)]
pub struct GridModel {
    coords: Vec<(i32, i32)>,
    room_of: Vec<usize>,
    room_names: Vec<String>,
    room_cells: Vec<Vec<usize>>,
    fov: Vec<Vec<usize>>,
    obs: ObservationModel,
}

impl GridModel {
    pub fn new(
        coords: Vec<(i32, i32)>,
        room_of: Vec<usize>,
        room_names: Vec<String>,
        obs: ObservationModel,
    ) -> Result<Self, PomdpError> {
        obs.validate()?;
        if coords.len() != room_of.len() || coords.is_empty() {
            return Err(PomdpError::InvalidModel(
                "every cell needs exactly one room".into(),
            ));
        }
        if let Some(&r) = room_of.iter().find(|&&r| r >= room_names.len()) {
            return Err(PomdpError::InvalidModel(format!("room index {r} unnamed")));
        }
        let mut room_cells = vec![Vec::new(); room_names.len()];
        for (i, &r) in room_of.iter().enumerate() {
            room_cells[r].push(i);
        }
        let mut model = GridModel {
            coords,
            room_of,
            room_names,
            room_cells,
            fov: Vec::new(),
            obs,
        };
        model.fov = (0..model.len()).map(|a| model.compute_fov(a)).collect();
        Ok(model)
    }

    fn compute_fov(&self, a: usize) -> Vec<usize> {
        let r2 = self.obs.fov_radius * self.obs.fov_radius + 1e-9;
        self.room_cells[self.room_of[a]]
            .iter()
            .copied()
            .filter(|&i| self.dist2(i, a) <= r2)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn observation_model(&self) -> &ObservationModel {
        &self.obs
    }

    pub fn coords(&self, cell: usize) -> (i32, i32) {
        self.coords[cell]
    }

    pub fn room_of(&self, cell: usize) -> usize {
        self.room_of[cell]
    }

    pub fn room_names(&self) -> &[String] {
        &self.room_names
    }

    pub fn room_count(&self) -> usize {
        self.room_names.len()
    }

    pub fn room_cells(&self, room: usize) -> &[usize] {
        &self.room_cells[room]
    }

    fn dist2(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.coords[i], self.coords[j]);
        let (dx, dy) = ((a.0 - b.0) as f64, (a.1 - b.1) as f64);
        dx * dx + dy * dy
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist2(i, j).sqrt()
    }

    pub fn manhattan(&self, i: usize, j: usize) -> u32 {
        let (a, b) = (self.coords[i], self.coords[j]);
        a.0.abs_diff(b.0) + a.1.abs_diff(b.1)
    }

    /// Cells in the field of view of action `a`.
    pub fn fov_states(&self, a: usize) -> &[usize] {
        &self.fov[a]
    }

    pub fn in_fov(&self, cell: usize, a: usize) -> bool {
        self.room_of[cell] == self.room_of[a]
            && self.dist2(cell, a) <= self.obs.fov_radius * self.obs.fov_radius + 1e-9
    }

    /// p(present | target in `target`, action `a`).
    pub fn detection_prob(&self, target: usize, a: usize) -> f64 {
        if self.in_fov(target, a) {
            self.obs.in_view(self.distance(target, a))
        } else {
            self.obs.epsilon
        }
    }
}

/// Probability distribution over grid cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief {
    p: Vec<f64>,
}

impl Belief {
    pub fn uniform(n: usize) -> Self {
        Belief {
            p: vec![1.0 / n as f64; n],
        }
    }

    /// Normalizes `weights` into a belief. Returns `None` if they sum to zero.
    pub fn from_weights(weights: Vec<f64>) -> Option<Self> {
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 || weights.iter().any(|w| *w < 0.0) {
            return None;
        }
        Some(Belief {
            p: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn point_mass(n: usize, cell: usize) -> Self {
        let mut p = vec![0.0; n];
        p[cell] = 1.0;
        Belief { p }
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn mass(&self, cells: &[usize]) -> f64 {
        cells.iter().map(|&i| self.p[i]).sum()
    }

    /// Most likely cell, lowest index on ties.
    pub fn argmax(&self) -> usize {
        argmax(&self.p)
    }

    pub fn max(&self) -> f64 {
        self.p[self.argmax()]
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.p)
    }
}

/// Shannon entropy in bits, with 0·log 0 = 0.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.log2())
        .sum::<f64>()
}

/// Entropy reduction from `prev` to `next`.
pub fn reward(prev: &Belief, next: &Belief) -> f64 {
    prev.entropy() - next.entropy()
}

/// Bayes update of `b` after observing `z` from action `a`.
pub fn belief_update(
    b: &Belief,
    a: usize,
    z: Observation,
    model: &GridModel,
) -> Result<Belief, PomdpError> {
    if a >= model.len() {
        return Err(PomdpError::InvalidAction(a));
    }
    if b.len() != model.len() {
        return Err(PomdpError::BeliefLength {
            expected: model.len(),
            got: b.len(),
        });
    }
    let like = |p: f64| match z {
        Observation::Present => p,
        Observation::Absent => 1.0 - p,
    };
    let out_l = like(model.obs.epsilon);
    let mut next: Vec<f64> = b.p.iter().map(|x| x * out_l).collect();
    for &i in model.fov_states(a) {
        next[i] = b.p[i] * like(model.detection_prob(i, a));
    }
    let total: f64 = next.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(PomdpError::ImpossibleObservation(z));
    }
    for x in &mut next {
        *x /= total;
    }
    Ok(Belief { p: next })
}

/// Expected entropy reduction of every action, in bits.
///
/// Cells outside the field of view share one likelihood, so each action
/// costs O(|Λ(a)|) given the belief's total `Σ b log b`.
pub fn expected_info_gains(b: &Belief, model: &GridModel) -> Vec<f64> {
    let p = &b.p;
    let xlogx = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
    let s_total: f64 = p.iter().map(|&x| xlogx(x)).sum();
    let h = -s_total;
    let eps = model.obs.epsilon;
    (0..model.len())
        .map(|a| {
            let fov = model.fov_states(a);
            let (mut m_in, mut s_in) = (0.0, 0.0);
            let mut acc = [(0.0, 0.0); 2]; // per z: (p(z) in-view part, Σ b L (ln b + ln L))
            for &i in fov {
                let bi = p[i];
                m_in += bi;
                s_in += xlogx(bi);
                let d = model.detection_prob(i, a);
                for (k, l) in [d, 1.0 - d].into_iter().enumerate() {
                    acc[k].0 += bi * l;
                    if bi > 0.0 && l > 0.0 {
                        acc[k].1 += bi * l * (bi.ln() + l.ln());
                    }
                }
            }
            let m_out = (1.0 - m_in).max(0.0);
            let s_out = s_total - s_in;
            let mut expected_h = 0.0;
            for (k, l) in [eps, 1.0 - eps].into_iter().enumerate() {
                let pz = acc[k].0 + l * m_out;
                if pz <= 0.0 {
                    continue;
                }
                let mut t = acc[k].1;
                if l > 0.0 {
                    t += l * (s_out + l.ln() * m_out);
                }
                // p(z)·H(b'|z) = p(z) ln p(z) − Σ b L (ln b + ln L)
                expected_h += pz * pz.ln() - t;
            }
            ((h - expected_h) / std::f64::consts::LN_2).max(0.0)
        })
        .collect()
}

/// Index of the largest score; scores within a relative 1e-12 of the
/// maximum count as tied and the lowest index wins.
pub fn argmax(scores: &[f64]) -> usize {
    let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tol = best.abs() * 1e-12;
    scores
        .iter()
        .position(|&s| s >= best - tol)
        .unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicyConfig {
    /// Sample from a softmax over scores instead of taking the argmax.
    pub stochastic: bool,
    pub temperature: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            stochastic: false,
            temperature: 0.2,
        }
    }
}

/// Chooses the next sense action among `allowed` cells (all cells if `None`).
pub fn select_action(
    b: &Belief,
    model: &GridModel,
    cfg: &PolicyConfig,
    allowed: Option<&[bool]>,
    rng: &mut impl Rng,
) -> usize {
    let mut scores = expected_info_gains(b, model);
    if let Some(mask) = allowed {
        for (s, &ok) in scores.iter_mut().zip(mask) {
            if !ok {
                *s = f64::NEG_INFINITY;
            }
        }
    }
    if !cfg.stochastic {
        return argmax(&scores);
    }
    let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = scores
        .iter()
        .map(|&s| ((s - best) / cfg.temperature).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    argmax(&scores)
}
