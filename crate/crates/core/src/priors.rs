//! Room priors from answer-set evidence: per-class support, hierarchy
//! attenuation, Dirichlet room distribution and per-room Beta existence.

use std::collections::{HashMap, HashSet};

use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::kb::{GroundAtom, GroundTerm, KbError, KnowledgeBase, ObjectHierarchy};

pub const DEFAULT_XI: f64 = 1.0;
pub const DEFAULT_DELTA: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PriorError {
    #[error("attenuation needs at least one width")]
    EmptyWidths,
    #[error("Dirichlet parameter {index} is {value}, must be positive")]
    NonPositiveAlpha { index: usize, value: f64 },
    #[error("point is not on the simplex: {0}")]
    NotOnSimplex(String),
    #[error("length mismatch: {0} vs {1}")]
    Length(usize, usize),
    #[error(transparent)]
    Kb(#[from] KbError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorConfig {
    pub xi: f64,
    /// Smoothing added to every α when any α is zero; also the β floor.
    pub delta: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        PriorConfig {
            xi: DEFAULT_XI,
            delta: DEFAULT_DELTA,
        }
    }
}

/// `ln(a) + ξ`, or 0 when there are no instances.
pub fn class_support(a_n: usize, xi: f64) -> f64 {
    if a_n == 0 {
        0.0
    } else {
        (a_n as f64).ln() + xi
    }
}

/// Support divided by the product of sibling widths on the path to the LCA.
pub fn attenuated_support(a_n: usize, xi: f64, widths: &[usize]) -> Result<f64, PriorError> {
    if widths.is_empty() {
        return Err(PriorError::EmptyWidths);
    }
    let denom: f64 = widths.iter().map(|&w| w.max(1) as f64).product();
    Ok(class_support(a_n, xi) / denom)
}

/// Known-instance counts per (primary class, room) at the KB's current step.
///
/// An `exists(C, R)` atom with no located instance of `C` in `R` counts as one.
pub fn instance_counts(
    kb: &mut KnowledgeBase,
) -> Result<HashMap<(String, String), usize>, PriorError> {
    let now = kb.now();
    let answer = kb.answer_set()?;
    let mut class_of: HashMap<&str, Vec<&str>> = HashMap::new();
    for a in answer.positive.iter().filter(|a| a.predicate == "is" && a.args.len() == 2) {
        if let (Some(o), Some(c)) = (a.args[0].as_sym(), a.args[1].as_sym()) {
            class_of.entry(o).or_default().push(c);
        }
    }
    let mut counts: HashMap<(String, String), usize> = HashMap::new();
    let mut located: HashSet<(String, String)> = HashSet::new();
    for (obj, room) in fluents_at(&answer.positive, "in", now) {
        for c in class_of.get(obj).into_iter().flatten() {
            *counts.entry((c.to_string(), room.to_string())).or_default() += 1;
            located.insert((c.to_string(), room.to_string()));
        }
    }
    for (class, room) in fluents_at(&answer.positive, "exists", now) {
        let key = (class.to_string(), room.to_string());
        if !located.contains(&key) {
            counts.insert(key, 1);
        }
    }
    Ok(counts)
}

/// Pairs `(x, y)` of `holds(f(x, y), step)` atoms.
fn fluents_at<'a>(
    atoms: impl IntoIterator<Item = &'a GroundAtom>,
    fluent: &'a str,
    step: i64,
) -> impl Iterator<Item = (&'a str, &'a str)> {
    atoms.into_iter().filter_map(move |a| {
        if a.predicate != "holds" || a.args.len() != 2 || a.args[1].as_int() != Some(step) {
            return None;
        }
        match &a.args[0] {
            GroundTerm::Func(f, args) if f == fluent && args.len() == 2 => {
                Some((args[0].as_sym()?, args[1].as_sym()?))
            }
            _ => None,
        }
    })
}

/// α over `rooms` for a target of class `target_class` from known-instance
/// counts keyed by (primary class, room).
pub fn alpha_from_counts(
    h: &ObjectHierarchy,
    counts: &HashMap<(String, String), usize>,
    target_class: &str,
    rooms: &[String],
    cfg: &PriorConfig,
) -> Result<Vec<f64>, PriorError> {
    if !h.contains_class(target_class) {
        return Err(KbError::UnknownClass(target_class.to_string()).into());
    }
    let mut widths: HashMap<&str, Vec<usize>> = HashMap::new();
    let mut alpha = vec![0.0; rooms.len()];
    let mut keys: Vec<&(String, String)> = counts.keys().collect();
    keys.sort();
    for key in keys {
        let (class, room) = key;
        let Some(k) = rooms.iter().position(|r| r == room) else {
            continue;
        };
        if !h.contains_class(class) || !h.children(class).is_empty() {
            continue;
        }
        if !widths.contains_key(class.as_str()) {
            let (_, w) = h.lca_path(target_class, class)?;
            widths.insert(class.as_str(), w);
        }
        alpha[k] += attenuated_support(counts[key], cfg.xi, &widths[class.as_str()])?;
    }
    Ok(alpha)
}

/// α over `rooms` for a target of class `target_class`.
///
/// Each primary class contributes its attenuated support independently. When
/// `target` names the target instance, rooms it is known not to be in get α = 0.
pub fn room_alpha(
    kb: &mut KnowledgeBase,
    target_class: &str,
    rooms: &[String],
    target: Option<&str>,
    cfg: &PriorConfig,
) -> Result<Vec<f64>, PriorError> {
    let counts = instance_counts(kb)?;
    let now = kb.now();
    let mut alpha = alpha_from_counts(kb.hierarchy(), &counts, target_class, rooms, cfg)?;
    if let Some(t) = target {
        let answer = kb.answer_set()?;
        for (k, room) in rooms.iter().enumerate() {
            let not_here = crate::kb::located(t, room, now).complement();
            if answer.contains(&not_here) {
                alpha[k] = 0.0;
            }
        }
    }
    Ok(alpha)
}

/// α + δ when any α is zero, α otherwise.
pub fn smooth(alpha: &[f64], delta: f64) -> Vec<f64> {
    if alpha.iter().any(|&a| a <= 0.0) {
        alpha.iter().map(|a| a.max(0.0) + delta).collect()
    } else {
        alpha.to_vec()
    }
}

/// Dirichlet density at `mu`.
pub fn dirichlet_pdf(mu: &[f64], alpha: &[f64]) -> Result<f64, PriorError> {
    if mu.len() != alpha.len() {
        return Err(PriorError::Length(mu.len(), alpha.len()));
    }
    if let Some((index, &value)) = alpha.iter().enumerate().find(|(_, a)| **a <= 0.0) {
        return Err(PriorError::NonPositiveAlpha { index, value });
    }
    let sum: f64 = mu.iter().sum();
    if mu.iter().any(|m| !(0.0..=1.0).contains(m)) || (sum - 1.0).abs() > 1e-9 {
        return Err(PriorError::NotOnSimplex(format!("{mu:?}")));
    }
    let a0: f64 = alpha.iter().sum();
    let mut log = ln_gamma(a0);
    for (&m, &a) in mu.iter().zip(alpha) {
        log -= ln_gamma(a);
        if a != 1.0 {
            if m == 0.0 {
                return Ok(if a < 1.0 { f64::INFINITY } else { 0.0 });
            }
            log += (a - 1.0) * m.ln();
        }
    }
    Ok(log.exp())
}

/// Expected room distribution `α_k / α_0`, smoothing zeros first.
pub fn dirichlet_expectation(alpha: &[f64], delta: f64) -> Vec<f64> {
    let a = smooth(alpha, delta);
    let a0: f64 = a.iter().sum();
    a.iter().map(|x| x / a0).collect()
}

/// `(α_k, β_k)` per room with `β_k = max(mean α, δ)`.
pub fn beta_init(alpha: &[f64], delta: f64) -> Vec<(f64, f64)> {
    let mean = if alpha.is_empty() {
        0.0
    } else {
        alpha.iter().sum::<f64>() / alpha.len() as f64
    };
    let beta = mean.max(delta);
    alpha.iter().map(|&a| (a, beta)).collect()
}

/// Beta mean `α / (α + β)`.
pub fn beta_existence(alpha: f64, beta: f64) -> f64 {
    alpha / (alpha + beta)
}

/// Probability the target is in no room, treating rooms as independent.
pub fn domain_nonexistence(p_exists: &[f64]) -> f64 {
    p_exists.iter().map(|p| 1.0 - p).product()
}

/// Dirichlet and Beta parameters over a fixed list of rooms.
#[derive(Debug, Clone, PartialEq)]
pub struct RoomPrior {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub delta: f64,
}

impl RoomPrior {
    pub fn from_alpha(alpha: Vec<f64>, delta: f64) -> Self {
        let beta = beta_init(&alpha, delta).into_iter().map(|(_, b)| b).collect();
        RoomPrior { alpha, beta, delta }
    }

    pub fn from_kb(
        kb: &mut KnowledgeBase,
        target_class: &str,
        rooms: &[String],
        target: Option<&str>,
        cfg: &PriorConfig,
    ) -> Result<Self, PriorError> {
        let alpha = room_alpha(kb, target_class, rooms, target, cfg)?;
        Ok(Self::from_alpha(alpha, cfg.delta))
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha.iter().sum()
    }

    pub fn expectation(&self) -> Vec<f64> {
        dirichlet_expectation(&self.alpha, self.delta)
    }

    /// Dirichlet parameters after smoothing.
    pub fn smoothed_alpha(&self) -> Vec<f64> {
        smooth(&self.alpha, self.delta)
    }

    pub fn room_existence(&self) -> Vec<f64> {
        self.alpha
            .iter()
            .zip(&self.beta)
            .map(|(&a, &b)| beta_existence(a, b))
            .collect()
    }

    pub fn p_not_exist(&self) -> f64 {
        domain_nonexistence(&self.room_existence())
    }

    /// Records a fully negative sweep of room `k`.
    pub fn record_negative_sweep(&mut self, k: usize) {
        self.beta[k] += 1.0;
    }

    /// CSV lines `room,alpha,beta`.
    pub fn to_csv(&self, rooms: &[String]) -> String {
        let mut out = String::from("room,alpha,beta\n");
        for (i, r) in rooms.iter().enumerate() {
            out.push_str(&format!("{r},{:.6},{:.6}\n", self.alpha[i], self.beta[i]));
        }
        out
    }
}
