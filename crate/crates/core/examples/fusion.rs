//! Folding a room prior into a cell belief with each merge strategy.
use asp_pomdp::fusion::{redistribute, room_marginals, MergeStrategy};
use asp_pomdp::fusion::{bayesian_merge, dirichlet_weight_merge, weighted_average_merge};
use asp_pomdp::pomdp::{Belief, GridModel, ObservationModel};
use asp_pomdp::priors::RoomPrior;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let coords: Vec<(i32, i32)> = (0..12).map(|i| (i, 0)).collect();
    let room_of: Vec<usize> = (0..12).map(|i| i / 4).collect();
    let names = vec!["kitchen".into(), "lab".into(), "office".into()];
    let model = GridModel::new(coords, room_of, names, ObservationModel::default())?;
    // The robot has already looked around the kitchen.
    let mut w = vec![1.0; 12];
    for x in &mut w[..4] {
        *x = 0.2;
    }
    let b = Belief::from_weights(w).unwrap();
    let marg = room_marginals(&b, &model);
    let prior = RoomPrior::from_alpha(vec![3.0, 1.0, 0.0], 0.1);
    let p = prior.expectation();
    println!("belief by room {marg:.3?}\nprior {p:.3?}");
    let strategies = [
        MergeStrategy::Bayesian,
        MergeStrategy::TrustFactor { weight: 0.5 },
        MergeStrategy::DirichletWeight,
    ];
    for s in strategies {
        let merged = match s {
            MergeStrategy::Bayesian => bayesian_merge(&p, &marg),
            MergeStrategy::TrustFactor { weight } => weighted_average_merge(&p, &marg, weight),
            MergeStrategy::DirichletWeight => dirichlet_weight_merge(&prior.smoothed_alpha(), &p, &marg),
            MergeStrategy::None => marg.clone(),
        };
        let cells = redistribute(&b, &merged, &model);
        println!("{:18} {merged:.3?} first cell {:.3}", s.name(), cells.probs()[0]);
    }
    Ok(())
}
