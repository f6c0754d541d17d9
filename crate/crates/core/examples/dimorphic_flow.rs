//! Three-genotype flow of a mutant that invades: densities and the
//! monotone mean phenotype along the trajectory.

use diploid_ad::dynamics::{average_phenotype_series, integrate_flow, DimorphicModel, FlowOptions, GenotypeDensities};
use diploid_ad::model::{DemographyModel, ModelSpec, TraitSpace};

fn main() -> diploid_ad::Result<()> {
    let model = DemographyModel::new(ModelSpec::gaussian(TraitSpace::new(0.0, 1.0)?, 2.0, 1.0, 0.5, 1.0, 2.0))?;
    let dm = DimorphicModel::new(&model, 0.4, 0.45)?;
    println!(
        "S(mutant; resident) = {:.5}, S(resident; mutant) = {:.5}",
        dm.fitness_in_resident(),
        dm.fitness_in_mutant()
    );
    let n = dm.resident_equilibrium();
    let path = integrate_flow(GenotypeDensities::new(n, 1e-3, 0.0), &dm, 800.0, &FlowOptions::recorded(50.0))?;
    let phenotype = average_phenotype_series(&path, &dm)?;
    for ((t, y), (_, w)) in path.t.iter().zip(&path.y).zip(&phenotype) {
        println!("t = {t:6.0}  AA {:.4}  Aa {:.4}  aa {:.4}  mean phenotype {w:.5}", y[0], y[1], y[2]);
    }
    println!("mutant equilibrium {:.4}", dm.mutant_equilibrium());
    Ok(())
}
