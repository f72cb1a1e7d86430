//! Probability that the target is absent from the whole domain, updated from
//! the same observations that drive the cell belief.

use thiserror::Error;

use crate::pomdp::{Belief, GridModel, Observation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExistenceError {
    #[error("belief lengths differ: {0} vs {1}")]
    Length(usize, usize),
    #[error("detection has zero likelihood whether or not the target exists")]
    ImpossibleDetection,
}

/// p(¬E) after a negative observation: the field-of-view mass the update
/// removed from the belief moves to non-existence.
pub fn update_negative(
    p_not_exist: f64,
    before: &Belief,
    after: &Belief,
    fov: &[usize],
) -> Result<f64, ExistenceError> {
    if before.len() != after.len() {
        return Err(ExistenceError::Length(before.len(), after.len()));
    }
    let delta = before.mass(fov) - after.mass(fov);
    Ok((p_not_exist + (1.0 - p_not_exist) * delta).clamp(0.0, 1.0))
}

/// `(p(D|E), p(D|¬E))` for a sense action `a` under belief `b`.
pub fn detection_likelihoods(b: &Belief, a: usize, model: &GridModel) -> (f64, f64) {
    let fov = model.fov_states(a);
    let eps = model.observation_model().epsilon;
    let inside: f64 = fov
        .iter()
        .map(|&i| model.detection_prob(i, a) * b.probs()[i])
        .sum();
    let outside = (1.0 - b.mass(fov)).max(0.0);
    (inside + eps * outside, eps * outside)
}

/// p(¬E) after a positive observation, by Bayes' rule.
pub fn update_positive(p_not_exist: f64, likelihoods: (f64, f64)) -> Result<f64, ExistenceError> {
    let (given_e, given_not_e) = likelihoods;
    let num = given_not_e * p_not_exist;
    let denom = given_e * (1.0 - p_not_exist) + num;
    if denom <= 0.0 {
        if p_not_exist == 0.0 && given_e > 0.0 {
            return Ok(0.0);
        }
        return Err(ExistenceError::ImpossibleDetection);
    }
    Ok(num / denom)
}

pub fn should_terminate_absent(p_not_exist: f64, threshold: f64) -> bool {
    p_not_exist >= threshold
}

/// One logged update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExistenceStep {
    pub action: usize,
    pub observation: Observation,
    pub p_not_exist: f64,
}

/// p(¬E) with its update history.
#[derive(Debug, Clone, PartialEq)]
pub struct ExistenceBelief {
    p_not_exist: f64,
    history: Vec<ExistenceStep>,
}

impl ExistenceBelief {
    pub fn new(p_not_exist: f64) -> Self {
        ExistenceBelief {
            p_not_exist: p_not_exist.clamp(0.0, 1.0),
            history: Vec::new(),
        }
    }

    pub fn p_not_exist(&self) -> f64 {
        self.p_not_exist
    }

    pub fn p_exist(&self) -> f64 {
        1.0 - self.p_not_exist
    }

    pub fn history(&self) -> &[ExistenceStep] {
        &self.history
    }

    /// Applies one observation. `before` is the belief the action was chosen
    /// under and `after` its Bayes update.
    pub fn observe(
        &mut self,
        a: usize,
        z: Observation,
        before: &Belief,
        after: &Belief,
        model: &GridModel,
    ) -> Result<f64, ExistenceError> {
        self.p_not_exist = match z {
            Observation::Absent => {
                update_negative(self.p_not_exist, before, after, model.fov_states(a))?
            }
            Observation::Present => {
                update_positive(self.p_not_exist, detection_likelihoods(before, a, model))?
            }
        };
        self.history.push(ExistenceStep {
            action: a,
            observation: z,
            p_not_exist: self.p_not_exist,
        });
        Ok(self.p_not_exist)
    }

    pub fn should_terminate(&self, threshold: f64) -> bool {
        should_terminate_absent(self.p_not_exist, threshold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn negative_example() {
        // four cells, Λ = {0, 1}
        let before = Belief::from_weights(vec![0.2, 0.2, 0.3, 0.3]).unwrap();
        let after = Belief::from_weights(vec![0.125, 0.125, 0.375, 0.375]).unwrap();
        let p = update_negative(0.2, &before, &after, &[0, 1]).unwrap();
        assert_abs_diff_eq!(p, 0.32, epsilon = 1e-12);
        assert_eq!(update_negative(0.2, &before, &before, &[0, 1]).unwrap(), 0.2);
    }

    #[test]
    fn positive_example() {
        assert_abs_diff_eq!(
            update_positive(0.2, (0.35, 0.03)).unwrap(),
            0.006 / 0.286,
            epsilon = 1e-12
        );
        assert_eq!(update_positive(0.7, (0.35, 0.0)).unwrap(), 0.0);
        assert_eq!(update_positive(0.0, (0.35, 0.03)).unwrap(), 0.0);
        assert!(update_positive(0.5, (0.0, 0.0)).is_err());
    }

    #[test]
    fn thresholds() {
        assert!(should_terminate_absent(0.95, 0.9));
        assert!(!should_terminate_absent(0.5, 0.9));
    }
}
