//! Merging room-level priors with the cell belief.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::pomdp::{Belief, GridModel};
use crate::priors::dirichlet_pdf;

/// Probability mass per room (the last room of the model is the hallway).
pub fn room_marginals(b: &Belief, model: &GridModel) -> Vec<f64> {
    let mut out = vec![0.0; model.room_count()];
    for (i, &p) in b.probs().iter().enumerate() {
        out[model.room_of(i)] += p;
    }
    out
}

fn normalize(v: Vec<f64>) -> Option<Vec<f64>> {
    let total: f64 = v.iter().sum();
    (total > 0.0).then(|| v.into_iter().map(|x| x / total).collect())
}

/// Normalized elementwise product; falls back to `marginals` if every product is zero.
pub fn bayesian_merge(prior: &[f64], marginals: &[f64]) -> Vec<f64> {
    let prod = prior.iter().zip(marginals).map(|(a, b)| a * b).collect();
    normalize(prod).unwrap_or_else(|| {
        warn!("prior and belief are disjoint; keeping the belief");
        marginals.to_vec()
    })
}

/// `trust·prior + (1 − trust)·marginals`.
pub fn weighted_average_merge(prior: &[f64], marginals: &[f64], trust: f64) -> Vec<f64> {
    prior
        .iter()
        .zip(marginals)
        .map(|(p, m)| trust * p + (1.0 - trust) * m)
        .collect()
}

/// Trust in the prior derived from the Dirichlet density of the current
/// marginals, mapped to [0, 1) by x / (1 + x).
pub fn dirichlet_trust(alpha: &[f64], marginals: &[f64]) -> f64 {
    match dirichlet_pdf(marginals, alpha) {
        Ok(x) if x.is_finite() => x / (1.0 + x),
        Ok(_) => 1.0,
        Err(_) => 0.0,
    }
}

/// Weighted average with the Dirichlet-derived trust. `alpha` must be
/// positive; `prior` is its expectation.
pub fn dirichlet_weight_merge(alpha: &[f64], prior: &[f64], marginals: &[f64]) -> Vec<f64> {
    weighted_average_merge(prior, marginals, dirichlet_trust(alpha, marginals))
}

/// Rescales cells so room masses equal `merged`, keeping in-room ratios.
/// Rooms with no current mass get their share spread uniformly.
pub fn redistribute(b: &Belief, merged: &[f64], model: &GridModel) -> Belief {
    let marg = room_marginals(b, model);
    let mut w: Vec<f64> = b.probs().to_vec();
    for (r, &m) in merged.iter().enumerate() {
        let cells = model.room_cells(r);
        if marg[r] > 0.0 {
            let scale = m / marg[r];
            for &i in cells {
                w[i] *= scale;
            }
        } else if !cells.is_empty() {
            for &i in cells {
                w[i] = m / cells.len() as f64;
            }
        }
    }
    Belief::from_weights(w).unwrap_or_else(|| b.clone())
}

/// How KB priors enter the belief.
/// Written in config files by its `name()`, e.g. `"trust_factor(0.5)"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MergeStrategy {
    None,
    Bayesian,
    TrustFactor { weight: f64 },
    DirichletWeight,
}

impl MergeStrategy {
    pub fn name(&self) -> String {
        match self {
            MergeStrategy::None => "none".into(),
            MergeStrategy::Bayesian => "bayesian".into(),
            MergeStrategy::TrustFactor { weight } => format!("trust_factor({weight})"),
            MergeStrategy::DirichletWeight => "dirichlet_weight".into(),
        }
    }

    /// Parses `none`, `bayesian`, `dirichlet_weight` or `trust_factor(w)`.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        match s {
            "none" => Some(MergeStrategy::None),
            "bayesian" => Some(MergeStrategy::Bayesian),
            "dirichlet_weight" => Some(MergeStrategy::DirichletWeight),
            _ => {
                let w = s.strip_prefix("trust_factor(")?.strip_suffix(')')?;
                let weight: f64 = w.trim().parse().ok()?;
                (0.0..=1.0)
                    .contains(&weight)
                    .then_some(MergeStrategy::TrustFactor { weight })
            }
        }
    }
}

impl From<MergeStrategy> for String {
    fn from(m: MergeStrategy) -> String {
        m.name()
    }
}

impl TryFrom<String> for MergeStrategy {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        MergeStrategy::parse(&s).ok_or_else(|| format!("unknown merge strategy `{s}`"))
    }
}
