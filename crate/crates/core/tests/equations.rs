mod common;

use proptest::prelude::*;

use asp_pomdp::existence::{detection_likelihoods, update_negative, update_positive, ExistenceBelief};
use asp_pomdp::fusion::{bayesian_merge, redistribute, room_marginals, weighted_average_merge};
use asp_pomdp::pomdp::{
    argmax, belief_update, expected_info_gains, Belief, Observation, ObservationModel,
};
use asp_pomdp::priors::{
    attenuated_support, dirichlet_expectation, domain_nonexistence, RoomPrior,
};

use common::equations::{brute_force_gain, cases, open_room, rooms_model};

#[test]
fn oracle_table() {
    let failed: Vec<String> = cases()
        .into_iter()
        .filter(|c| !c.ok())
        .map(|c| format!("{}: got {} want {} ± {}", c.name, c.got, c.want, c.tol))
        .collect();
    assert!(failed.is_empty(), "{failed:#?}");
}

#[test]
fn repeated_absent_shrinks_view_mass() {
    let model = open_room(5, 5, ObservationModel::default());
    let mut b = Belief::uniform(25);
    let fov = model.fov_states(12).to_vec();
    for _ in 0..10 {
        let next = belief_update(&b, 12, Observation::Absent, &model).unwrap();
        assert!(next.mass(&fov) < b.mass(&fov));
        b = next;
    }
}

#[test]
fn uniform_likelihood_keeps_belief() {
    let obs = ObservationModel {
        p_max: 0.5,
        sigma: 1e6,
        fov_radius: 10.0,
        epsilon: 0.05,
    };
    let model = open_room(3, 3, obs);
    let b = Belief::from_weights((1..=9).map(f64::from).collect()).unwrap();
    let next = belief_update(&b, 4, Observation::Absent, &model).unwrap();
    for (x, y) in b.probs().iter().zip(next.probs()) {
        assert!((x - y).abs() < 1e-9);
    }
}

#[test]
fn exhaustive_sweep_without_target_reaches_threshold() {
    let model = rooms_model(&[9, 9, 9], ObservationModel::default());
    let mut b = Belief::uniform(model.len());
    let mut e = ExistenceBelief::new(RoomPrior::from_alpha(vec![1.0, 1.0, 1.0], 0.1).p_not_exist());
    let mut steps = 0;
    while !e.should_terminate(0.9) {
        let a = steps % model.len();
        let next = belief_update(&b, a, Observation::Absent, &model).unwrap();
        e.observe(a, Observation::Absent, &b, &next, &model).unwrap();
        b = next;
        steps += 1;
        assert!(steps < 5 * model.len(), "p(¬E) stuck at {}", e.p_not_exist());
    }
}

fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.001f64..1.0, n).prop_map(|w| {
        let t: f64 = w.iter().sum();
        w.into_iter().map(|x| x / t).collect()
    })
}

proptest! {
    #[test]
    fn info_gain_matches_enumeration_and_is_nonnegative(w in simplex(16), a in 0usize..16) {
        let model = open_room(4, 4, ObservationModel::default());
        let b = Belief::from_weights(w).unwrap();
        let gains = expected_info_gains(&b, &model);
        prop_assert!(gains.iter().all(|g| *g >= 0.0));
        prop_assert!((gains[a] - brute_force_gain(&b, a, &model)).abs() < 1e-9);
    }

    #[test]
    fn argmax_ignores_positive_scaling(s in prop::collection::vec(0.0f64..10.0, 1..20), k in 0.01f64..100.0) {
        let scaled: Vec<f64> = s.iter().map(|x| x * k).collect();
        prop_assert_eq!(argmax(&s), argmax(&scaled));
    }

    #[test]
    fn belief_update_stays_normalized(w in simplex(9), a in 0usize..9, present in any::<bool>()) {
        let model = open_room(3, 3, ObservationModel::default());
        let z = if present { Observation::Present } else { Observation::Absent };
        let next = belief_update(&Belief::from_weights(w).unwrap(), a, z, &model).unwrap();
        prop_assert!((next.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn expectation_is_on_simplex(alpha in prop::collection::vec(0.0f64..5.0, 1..8)) {
        let e = dirichlet_expectation(&alpha, 0.1);
        prop_assert!(e.iter().all(|x| (0.0..=1.0).contains(x)));
        prop_assert!((e.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn attenuation_never_grows_with_width(a in 1usize..20, w in prop::collection::vec(1usize..6, 1..4), i in 0usize..4) {
        let mut wider = w.clone();
        let i = i % w.len();
        wider[i] += 1;
        prop_assert!(attenuated_support(a, 1.0, &wider).unwrap() <= attenuated_support(a, 1.0, &w).unwrap());
    }

    #[test]
    fn nonexistence_decreases_in_each_room(p in prop::collection::vec(0.0f64..0.9, 1..6), i in 0usize..6, bump in 0.01f64..0.1) {
        let i = i % p.len();
        let mut q = p.clone();
        q[i] += bump;
        prop_assert!(domain_nonexistence(&q) < domain_nonexistence(&p));
    }

    #[test]
    fn bayesian_merge_commutes(a in simplex(4), b in simplex(4), c in simplex(4)) {
        let ab = bayesian_merge(&a, &b);
        let ba = bayesian_merge(&b, &a);
        let left = bayesian_merge(&ab, &c);
        let right = bayesian_merge(&a, &bayesian_merge(&b, &c));
        for k in 0..4 {
            prop_assert!((ab[k] - ba[k]).abs() < 1e-9);
            prop_assert!((left[k] - right[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn merges_are_distributions(a in simplex(3), b in simplex(3), t in 0.0f64..=1.0) {
        for m in [bayesian_merge(&a, &b), weighted_average_merge(&a, &b, t)] {
            prop_assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(m.iter().all(|x| *x >= 0.0));
        }
    }

    #[test]
    fn redistribute_hits_target_marginals(w in simplex(9), m in simplex(3)) {
        let model = rooms_model(&[2, 3, 4], ObservationModel::default());
        let b = Belief::from_weights(w).unwrap();
        let moved = redistribute(&b, &m, &model);
        let got = room_marginals(&moved, &model);
        for k in 0..3 {
            prop_assert!((got[k] - m[k]).abs() < 1e-9);
        }
        // Within-room order survives.
        for r in 0..3 {
            let cells = model.room_cells(r);
            for &i in cells {
                for &j in cells {
                    if b.probs()[i] < b.probs()[j] {
                        prop_assert!(moved.probs()[i] <= moved.probs()[j]);
                    }
                }
            }
        }
    }

    #[test]
    fn existence_stays_bounded_and_moves_the_right_way(
        w in simplex(9),
        p0 in 0.0f64..1.0,
        seq in prop::collection::vec((0usize..9, any::<bool>()), 1..30),
    ) {
        let model = rooms_model(&[4, 5], ObservationModel::default());
        let mut b = Belief::from_weights(w).unwrap();
        let mut p = p0;
        for (a, present) in seq {
            let z = if present { Observation::Present } else { Observation::Absent };
            let next = belief_update(&b, a, z, &model).unwrap();
            let q = if present {
                let like = detection_likelihoods(&b, a, &model);
                let q = update_positive(p, like).unwrap();
                if like.0 >= like.1 {
                    prop_assert!(q <= p + 1e-12);
                }
                q
            } else {
                let q = update_negative(p, &b, &next, model.fov_states(a)).unwrap();
                prop_assert!(q >= p - 1e-12);
                q
            };
            prop_assert!((0.0..=1.0).contains(&q));
            p = q;
            b = next;
        }
    }

    #[test]
    fn detection_with_no_false_positives_proves_existence(w in simplex(9), p0 in 0.0f64..1.0, a in 0usize..9) {
        let obs = ObservationModel { epsilon: 0.0, ..ObservationModel::default() };
        let model = rooms_model(&[4, 5], obs);
        let b = Belief::from_weights(w).unwrap();
        let mut e = ExistenceBelief::new(p0);
        let next = belief_update(&b, a, Observation::Present, &model).unwrap();
        e.observe(a, Observation::Present, &b, &next, &model).unwrap();
        prop_assert_eq!(e.p_not_exist(), 0.0);
    }
}
