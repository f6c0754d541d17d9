//! Monomorphic individual-based runs against the logistic curve.

use diploid_ad::dynamics::logistic_solution;
use diploid_ad::ibm::{PopulationState, Recorder, Simulator, StopRule};
use diploid_ad::model::{DemographyModel, ModelSpec};
use diploid_ad::rng::stream;

fn main() -> diploid_ad::Result<()> {
    let (f, d, c) = (2.0, 1.0, 1.0);
    for k in [100u64, 1_000, 10_000] {
        let model = DemographyModel::new(ModelSpec::logistic(f, d, c).with_k(k))?;
        let n0 = 0.1;
        let start = PopulationState::monomorphic(0.0, (n0 * k as f64) as u64, k as f64);
        let mut sim = Simulator::new(&model, &start)?;
        let mut rec = Recorder::new(1.0, k as f64);
        let summary = sim.run(StopRule::horizon(10.0), &mut stream(7, k), &mut rec, |_| false)?;
        println!("K = {k}: {} events", summary.events);
        for (t, n) in rec.finish().total_density().iter().step_by(2) {
            println!("  t = {t:4.1}  ibm {n:.4}  logistic {:.4}", logistic_solution(n0, f, d, c, *t));
        }
    }
    Ok(())
}
