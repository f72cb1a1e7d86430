//! Greedy information-gain search in one open room with a hidden target.
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use asp_pomdp::pomdp::{
    belief_update, select_action, Belief, GridModel, Observation, ObservationModel, PolicyConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (w, h) = (8, 8);
    let coords: Vec<(i32, i32)> = (0..h).flat_map(|y| (0..w).map(move |x| (x, y))).collect();
    let n = coords.len();
    let model = GridModel::new(coords, vec![0; n], vec!["room".into()], ObservationModel::default())?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let target = rng.gen_range(0..n);
    let mut b = Belief::uniform(n);
    for step in 1..=40 {
        let a = select_action(&b, &model, &PolicyConfig::default(), None, &mut rng);
        let z = if rng.gen_bool(model.detection_prob(target, a)) {
            Observation::Present
        } else {
            Observation::Absent
        };
        b = belief_update(&b, a, z, &model)?;
        println!(
            "step {step:2} look {:?} saw {z:?}: H = {:.2} bits, max {:.2}",
            model.coords(a),
            b.entropy(),
            b.max()
        );
        if b.max() >= 0.8 {
            break;
        }
    }
    println!("guess {:?}, truth {:?}", model.coords(b.argmax()), model.coords(target));
    Ok(())
}
