//! Canonical equation in its three forms and its comparison with the mean
//! substitution sequence for shrinking mutation steps.

use diploid_ad::canonical::{integrate_canonical, rhs_general, rhs_symmetric, CanonicalForm, CanonicalOptions};
use diploid_ad::convergence::tss_canonical_distance;
use diploid_ad::model::{DemographyModel, ModelSpec, MutationKernel, TraitSpace};

fn main() -> diploid_ad::Result<()> {
    let spec = ModelSpec::gaussian(TraitSpace::new(0.0, 1.0)?, 2.0, 1.0, 0.5, 1.0, 2.0).with_sigma(0.02);
    let model = DemographyModel::new(spec.clone())?;
    let skewed = DemographyModel::new(spec.with_mutation(MutationKernel::Skewed { right_mass: 0.75 }))?;
    let opts = CanonicalOptions::default();
    for u in [0.2, 0.5, 0.8] {
        println!(
            "u = {u}: symmetric {:.5}, general {:.5}, general with right-skewed steps {:.5}",
            rhs_symmetric(&model, u, &opts)?,
            rhs_general(&model, u, &opts)?,
            rhs_general(&skewed, u, &opts)?
        );
    }
    let path = integrate_canonical(&model, 0.1, 20.0, CanonicalForm::Symmetric, &opts, Some(5.0))?;
    for p in &path.points {
        println!("tau = {:5.1}  u = {:.4}  phenotype {:.4}", p.t, p.u, p.phenotype);
    }
    for sigma in [0.04, 0.02] {
        let m = DemographyModel::new(model.spec().clone().with_sigma(sigma))?;
        let rep = tss_canonical_distance(&m, 0.1, 20.0, 20, 0.01, 400, 100, 5)?;
        println!("sigma = {sigma}: sup distance of the mean TSS path {:.4}", rep.sup_distance);
    }
    Ok(())
}
