//! Trait substitution sequence towards an interior singular strategy.

use diploid_ad::model::{DemographyModel, ModelSpec, TraitSpace};
use diploid_ad::rng::stream;
use diploid_ad::tss::{find_singular_strategies, total_jump_rate, TssEngine};

fn main() -> diploid_ad::Result<()> {
    let model = DemographyModel::new(
        ModelSpec::gaussian(TraitSpace::new(0.0, 1.0)?, 2.0, 1.0, 0.8, 1.0, 0.5).with_sigma(0.05),
    )?;
    for s in find_singular_strategies(&model, 400)? {
        println!("singular strategy {:.4} ({:?})", s.u, s.kind);
    }
    println!("jump rate at u = 0.1: {:.3e}", total_jump_rate(&model, 0.1)?);
    let engine = TssEngine::new(&model, 0.01, 400)?;
    let path = engine.simulate(0.1, 1e6, &mut stream(3, 0))?;
    for j in path.jumps.iter().step_by(5) {
        println!("jump {:3}  t = {:10.1}  u = {:.4}  S = {:.2e}", j.index, j.time, j.u, j.fitness);
    }
    println!("final trait {:.4}, stopped near a singular strategy: {}", path.final_trait(), path.stopped);
    Ok(())
}
