use rand::Rng;

use super::config::HumanConfig;

/// What a human says when asked "Where is the target?".
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Answer {
    /// A room index (model order), right or wrong.
    Room { room: usize, truthful: bool },
    Unknown,
}

/// Whether a human shows up after an action.
pub fn appears(cfg: &HumanConfig, rng: &mut impl Rng) -> bool {
    cfg.enabled && rng.gen_bool(cfg.appear_prob)
}

/// Samples an answer. `true_room` is `None` when the target is absent; a
/// correct answer then carries no location and an incorrect one names a
/// random room. Wrong rooms are drawn uniformly from `n_rooms` excluding the truth.
pub fn answer(
    cfg: &HumanConfig,
    true_room: Option<usize>,
    n_rooms: usize,
    rng: &mut impl Rng,
) -> Answer {
    let u: f64 = rng.gen();
    if u < cfg.p_correct {
        return match true_room {
            Some(room) => Answer::Room {
                room,
                truthful: true,
            },
            None => Answer::Unknown,
        };
    }
    if u < cfg.p_correct + cfg.p_unknown || n_rooms < 2 {
        return Answer::Unknown;
    }
    let room = match true_room {
        Some(t) => {
            let k = rng.gen_range(0..n_rooms - 1);
            if k >= t {
                k + 1
            } else {
                k
            }
        }
        None => rng.gen_range(0..n_rooms),
    };
    Answer::Room {
        room,
        truthful: false,
    }
}
