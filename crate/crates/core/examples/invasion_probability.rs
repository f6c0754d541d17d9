//! Survival probability of a single heterozygote mutant: closed form,
//! extinction equations, branching process and the full process.

use diploid_ad::dynamics::DimorphicModel;
use diploid_ad::invasion::{
    branching_survival, extinction_fixed_point, integrate_extinction, monte_carlo_invasion, survival_probability,
    BranchingSpec, Founder, InvasionSetup,
};
use diploid_ad::model::{DemographyModel, ModelSpec};

fn main() -> diploid_ad::Result<()> {
    let model = DemographyModel::new(ModelSpec::fertility_selection(2.0, 2.4, 1.0, 1.0).with_k(1_000))?;
    let dm = DimorphicModel::new(&model, 0.0, 0.5)?;
    let spec = BranchingSpec::from_dimorphic(&dm)?;
    println!("closed form          {:.5}", survival_probability(&dm)?);
    println!("fixed point          {:.5}", 1.0 - extinction_fixed_point(&spec)?.q1);
    let (t, q) = integrate_extinction(&spec, None)?;
    println!("extinction ODE t={t:.0}  {:.5}", 1.0 - q.q1);
    let b = branching_survival(&spec, Founder::Heterozygote, 1_000, 5_000, 1);
    println!("branching process    {:.5} [{:.5}, {:.5}]", b.survival.estimate, b.survival.ci_low, b.survival.ci_high);
    let ibm = monte_carlo_invasion(&model, &InvasionSetup::new(0.0, 0.5, 0.1, 500), 2)?;
    println!("individual-based     {:.5} [{:.5}, {:.5}]", ibm.survival.estimate, ibm.survival.ci_low, ibm.survival.ci_high);
    Ok(())
}
