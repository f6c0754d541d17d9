//! Phase boundaries of invasions that fix: growth of the mutant, the
//! deterministic switch, and loss of the resident allele.

use diploid_ad::dynamics::DimorphicModel;
use diploid_ad::ibm::NoObserver;
use diploid_ad::invasion::{invasion_phases, without_mutation};
use diploid_ad::model::{DemographyModel, ModelSpec};
use diploid_ad::rng::stream;

fn main() -> diploid_ad::Result<()> {
    for k in [1_000u64, 10_000] {
        let model = without_mutation(&DemographyModel::new(ModelSpec::fertility_selection(2.0, 2.4, 1.0, 1.0).with_k(k))?)?;
        let dm = DimorphicModel::new(&model, 0.0, 0.5)?;
        let (mut fixed, mut r) = (0, 0);
        while fixed < 3 {
            if let Some(split) = invasion_phases(&model, &dm, 0.1, u64::MAX, &mut stream(k, r), &mut NoObserver)? {
                let [a, b, c] = split.durations();
                println!("K = {k}: phase durations {a:6.2} {b:6.2} {c:6.2}");
                fixed += 1;
            }
            r += 1;
        }
    }
    Ok(())
}
