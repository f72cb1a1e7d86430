//! Hand-computed and Monte-Carlo oracle values for the numeric building blocks.
//! Each case carries its own tolerance so the same table feeds both the unit
//! tests and the acceptance report.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use asp_pomdp::existence::{detection_likelihoods, update_negative, update_positive};
use asp_pomdp::fusion::{
    bayesian_merge, dirichlet_trust, redistribute, room_marginals, weighted_average_merge,
};
use asp_pomdp::kb::ObjectHierarchy;
use asp_pomdp::pomdp::{
    belief_update, entropy, expected_info_gains, reward, select_action, Belief, GridModel,
    Observation, ObservationModel, PolicyConfig,
};
use asp_pomdp::priors::{
    alpha_from_counts, attenuated_support, beta_existence, beta_init, class_support,
    dirichlet_expectation, dirichlet_pdf, domain_nonexistence, PriorConfig,
};

pub const CLOSED: f64 = 1e-6;
pub const MONTE_CARLO: f64 = 1e-2;

#[derive(Debug, Clone)]
pub struct Case {
    pub name: &'static str,
    pub got: f64,
    pub want: f64,
    pub tol: f64,
}

impl Case {
    pub fn ok(&self) -> bool {
        (self.got - self.want).abs() <= self.tol
    }
}

fn case(name: &'static str, got: f64, want: f64, tol: f64) -> Case {
    Case {
        name,
        got,
        want,
        tol,
    }
}

/// Cells laid out in one row per room, rooms far enough apart that no field
/// of view crosses between them.
pub fn rooms_model(sizes: &[usize], obs: ObservationModel) -> GridModel {
    let mut coords = Vec::new();
    let mut room_of = Vec::new();
    for (r, &n) in sizes.iter().enumerate() {
        for i in 0..n {
            coords.push((i as i32, 100 * r as i32));
            room_of.push(r);
        }
    }
    let names = (0..sizes.len()).map(|r| format!("r{r}")).collect();
    GridModel::new(coords, room_of, names, obs).unwrap()
}

pub fn open_room(w: i32, h: i32, obs: ObservationModel) -> GridModel {
    let coords: Vec<(i32, i32)> = (0..h).flat_map(|y| (0..w).map(move |x| (x, y))).collect();
    let n = coords.len();
    GridModel::new(coords, vec![0; n], vec!["room".into()], obs).unwrap()
}

fn two_cells() -> GridModel {
    let obs = ObservationModel {
        p_max: 0.8,
        sigma: 1.0,
        fov_radius: 0.0,
        epsilon: 0.05,
    };
    rooms_model(&[1, 1], obs)
}

/// Expected entropy reduction of `a` by enumerating both observations.
pub fn brute_force_gain(b: &Belief, a: usize, model: &GridModel) -> f64 {
    let eps = model.observation_model().epsilon;
    let mut expected = 0.0;
    for z in [Observation::Present, Observation::Absent] {
        let pz: f64 = (0..model.len())
            .map(|i| {
                let d = if model.in_fov(i, a) {
                    model.detection_prob(i, a)
                } else {
                    eps
                };
                b.probs()[i] * if z == Observation::Present { d } else { 1.0 - d }
            })
            .sum();
        if pz > 0.0 {
            expected += pz * belief_update(b, a, z, model).unwrap().entropy();
        }
    }
    b.entropy() - expected
}

/// Action chosen by exhaustive enumeration on a 3×3 room, compared with the
/// planner's choice for a handful of random beliefs.
fn brute_force_agreement() -> f64 {
    let model = open_room(
        3,
        3,
        ObservationModel {
            p_max: 0.8,
            sigma: 1.5,
            fov_radius: 1.0,
            epsilon: 0.05,
        },
    );
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut agree = 0;
    let trials = 50;
    for _ in 0..trials {
        let w: Vec<f64> = (0..9).map(|_| rng.gen::<f64>()).collect();
        let b = Belief::from_weights(w).unwrap();
        let gains: Vec<f64> = (0..9).map(|a| brute_force_gain(&b, a, &model)).collect();
        let best = gains.iter().cloned().fold(f64::MIN, f64::max);
        let chosen = select_action(&b, &model, &PolicyConfig::default(), None, &mut rng);
        if (gains[chosen] - best).abs() < 1e-9 {
            agree += 1;
        }
    }
    agree as f64 / trials as f64
}

/// ∫ Dir(μ; α) over the 2-simplex by uniform sampling.
fn simplex_integral(alpha: &[f64; 3]) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 200_000;
    let mut total = 0.0;
    for _ in 0..n {
        let (mut u, mut v) = (rng.gen::<f64>(), rng.gen::<f64>());
        if u > v {
            std::mem::swap(&mut u, &mut v);
        }
        let mu = [u, v - u, 1.0 - v];
        total += dirichlet_pdf(&mu, alpha).unwrap();
    }
    // The simplex has area 1/2 in (μ1, μ2) coordinates.
    0.5 * total / n as f64
}

fn room_alpha_two_classes() -> f64 {
    let h = ObjectHierarchy::from_pairs(
        [
            ("imaging", "device"),
            ("computing", "device"),
            ("av", "device"),
            ("printer", "imaging"),
            ("scanner", "imaging"),
            ("laptop", "computing"),
            ("projector", "av"),
        ],
        [("printer1", "printer"), ("laptop1", "laptop")],
    )
    .unwrap();
    let counts: HashMap<(String, String), usize> = [
        (("printer".to_string(), "k".to_string()), 1),
        (("laptop".to_string(), "k".to_string()), 1),
    ]
    .into_iter()
    .collect();
    let rooms = vec!["k".to_string(), "other".to_string()];
    alpha_from_counts(&h, &counts, "printer", &rooms, &PriorConfig::default()).unwrap()[0]
}

pub fn cases() -> Vec<Case> {
    let mut out = vec![
        // Support and attenuation.
        case("support a=0", class_support(0, 1.0), 0.0, CLOSED),
        case("support a=1", class_support(1, 1.0), 1.0, CLOSED),
        case("support a=3", class_support(3, 1.0), 1.0 + 3f64.ln(), CLOSED),
        case("support a=3 rounded", class_support(3, 1.0), 2.0986, 1e-4),
        case(
            "attenuated widths [1,3]",
            attenuated_support(1, 1.0, &[1, 3]).unwrap(),
            1.0 / 3.0,
            CLOSED,
        ),
        case(
            "attenuated widths [1]",
            attenuated_support(3, 1.0, &[1]).unwrap(),
            class_support(3, 1.0),
            CLOSED,
        ),
        case("room alpha sums classes", room_alpha_two_classes(), 4.0 / 3.0, CLOSED),
        // Dirichlet.
        case("dirichlet (1,1)", dirichlet_pdf(&[0.3, 0.7], &[1.0, 1.0]).unwrap(), 1.0, CLOSED),
        case("dirichlet (2,2)", dirichlet_pdf(&[0.5, 0.5], &[2.0, 2.0]).unwrap(), 1.5, CLOSED),
        case(
            "dirichlet integral",
            simplex_integral(&[2.0, 1.5, 1.2]),
            1.0,
            MONTE_CARLO,
        ),
        case(
            "expectation (2,1,1)",
            dirichlet_expectation(&[2.0, 1.0, 1.0], 0.1)[1],
            0.25,
            CLOSED,
        ),
        case(
            "expectation smoothed (0,0)",
            dirichlet_expectation(&[0.0, 0.0], 0.1)[0],
            0.5,
            CLOSED,
        ),
        // Beta and domain non-existence.
        case("beta init (2,2)", beta_init(&[2.0, 2.0], 0.1)[0].1, 2.0, CLOSED),
        case("beta init floor", beta_init(&[0.0, 0.0], 0.1)[0].1, 0.1, CLOSED),
        case("beta existence (2,1)", beta_existence(2.0, 1.0), 2.0 / 3.0, CLOSED),
        case("beta existence (0,1)", beta_existence(0.0, 1.0), 0.0, CLOSED),
        case(
            "non-existence (0.5,0.5)",
            domain_nonexistence(&[0.5, 0.5]),
            0.25,
            CLOSED,
        ),
        case(
            "non-existence (2/3,0.5,0)",
            domain_nonexistence(&[2.0 / 3.0, 0.5, 0.0]),
            1.0 / 6.0,
            CLOSED,
        ),
    ];

    // Observation model and belief update.
    let obs = ObservationModel {
        p_max: 0.8,
        sigma: 1.0,
        fov_radius: 2.0,
        epsilon: 0.05,
    };
    let open = open_room(5, 5, obs);
    out.push(case("fov 5x5 centre", open.fov_states(12).len() as f64, 13.0, 0.0));
    out.push(case("detection d=1", open.detection_prob(13, 12), 0.8 * (-0.5f64).exp(), CLOSED));
    out.push(case("detection d=0", open.detection_prob(12, 12), 0.8, CLOSED));
    out.push(case("detection out of view", open.detection_prob(0, 24), 0.05, CLOSED));

    let two = two_cells();
    let b = Belief::uniform(2);
    let absent = belief_update(&b, 0, Observation::Absent, &two).unwrap();
    let present = belief_update(&b, 0, Observation::Present, &two).unwrap();
    out.push(case("update absent", absent.probs()[0], 0.1 / 0.575, CLOSED));
    out.push(case("update present", present.probs()[0], 0.4 / 0.425, CLOSED));
    out.push(case("entropy (.5,.25,.25)", entropy(&[0.5, 0.25, 0.25]), 1.5, CLOSED));
    out.push(case("entropy uniform 4", entropy(&[0.25; 4]), 2.0, CLOSED));
    out.push(case(
        "reward",
        reward(
            &Belief::uniform(4),
            &Belief::from_weights(vec![0.5, 0.25, 0.25, 0.0]).unwrap(),
        ),
        0.5,
        CLOSED,
    ));
    let gains = expected_info_gains(&b, &two);
    out.push(case("closed-form gain", gains[0], brute_force_gain(&b, 0, &two), CLOSED));
    out.push(case("3x3 action oracle", brute_force_agreement(), 1.0, 0.0));

    // Existence.
    let before = Belief::from_weights(vec![0.4, 0.6]).unwrap();
    let after = Belief::from_weights(vec![0.25, 0.75]).unwrap();
    out.push(case(
        "negative update",
        update_negative(0.2, &before, &after, &[0]).unwrap(),
        0.32,
        CLOSED,
    ));
    let (de, dne) = detection_likelihoods(&before, 0, &two);
    out.push(case("p(D|E)", de, 0.35, CLOSED));
    out.push(case("p(D|not E)", dne, 0.03, CLOSED));
    out.push(case(
        "positive update",
        update_positive(0.2, (0.35, 0.03)).unwrap(),
        0.006 / 0.286,
        CLOSED,
    ));
    out.push(case("positive update, eps=0", update_positive(0.2, (0.35, 0.0)).unwrap(), 0.0, CLOSED));

    // Fusion.
    out.push(case("bayesian merge", bayesian_merge(&[0.8, 0.2], &[0.5, 0.5])[0], 0.8, CLOSED));
    out.push(case(
        "trust merge",
        weighted_average_merge(&[0.8, 0.2], &[0.4, 0.6], 0.5)[0],
        0.6,
        CLOSED,
    ));
    out.push(case("dirichlet trust uniform", dirichlet_trust(&[1.0, 1.0], &[0.3, 0.7]), 0.5, CLOSED));
    let three = rooms_model(&[2, 3, 4], ObservationModel::default());
    let b = Belief::from_weights(vec![0.3, 0.2, 0.2, 0.2, 0.1, 0.0, 0.0, 0.0, 0.0]).unwrap();
    let moved = redistribute(&b, &[0.8, 0.1, 0.1], &three);
    out.push(case("redistribute first cell", moved.probs()[0], 0.48, CLOSED));
    out.push(case("redistribute second cell", moved.probs()[1], 0.32, CLOSED));
    out.push(case("redistribute empty room", moved.probs()[5], 0.025, CLOSED));
    let split = rooms_model(&[10, 30], ObservationModel::default());
    out.push(case(
        "marginals 10/30",
        room_marginals(&Belief::uniform(40), &split)[0],
        0.25,
        CLOSED,
    ));
    out
}
