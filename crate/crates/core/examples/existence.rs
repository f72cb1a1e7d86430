//! p(absent) climbing while a robot sweeps an empty three-room floor.
use asp_pomdp::existence::ExistenceBelief;
use asp_pomdp::pomdp::{belief_update, Belief, GridModel, Observation, ObservationModel};
use asp_pomdp::priors::RoomPrior;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut coords = Vec::new();
    let mut room_of = Vec::new();
    for r in 0..3 {
        for y in 0..4 {
            for x in 0..4 {
                coords.push((x + 10 * r as i32, y));
                room_of.push(r);
            }
        }
    }
    let names = vec!["a".into(), "b".into(), "c".into()];
    let model = GridModel::new(coords, room_of, names, ObservationModel::default())?;
    let prior = RoomPrior::from_alpha(vec![2.0, 1.0, 0.5], 0.1);
    let mut e = ExistenceBelief::new(prior.p_not_exist());
    let mut b = Belief::uniform(model.len());
    println!("start p(absent) = {:.3}", e.p_not_exist());
    let sweep = [5, 6, 9, 10];
    for (i, a) in (0..3).flat_map(|r| sweep.map(|c| c + 16 * r)).enumerate() {
        let next = belief_update(&b, a, Observation::Absent, &model)?;
        let p = e.observe(a, Observation::Absent, &b, &next, &model)?;
        b = next;
        println!("look {:2}: p(absent) = {p:.3}", i + 1);
        if e.should_terminate(0.9) {
            println!("declare absent");
            break;
        }
    }
    Ok(())
}
