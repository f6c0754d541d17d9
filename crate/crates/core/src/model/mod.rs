//! Trait space, genotypes, demographic coefficients and the mutation law.
//! Every other module evaluates the model through [`DemographyModel`].

mod families;
mod genotype;
mod mutation;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use families::{gaussian_competition, Competition, CubicSpline, Curve, GaussianKernelParams, PhenotypeMap};
pub use genotype::{Genotype, TraitSpace};
pub use mutation::{MutationKernel, MutationLaw};

use crate::error::{Error, Result};

/// Optional user-declared bounds on the coefficients. When present they are
/// enforced on the validation grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeclaredBounds {
    pub fertility_max: f64,
    pub death_max: f64,
    pub competition_min: f64,
    pub competition_max: f64,
}

/// Coefficient ranges observed on the validation grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservedBounds {
    pub fertility_max: f64,
    pub death_max: f64,
    pub competition_min: f64,
    pub competition_max: f64,
    pub growth_min: f64,
}

fn default_mu() -> f64 {
    0.0
}

fn default_k() -> u64 {
    1000
}

fn default_sigma() -> f64 {
    0.05
}

/// Serializable description of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub space: TraitSpace,
    #[serde(default = "additive")]
    pub phenotype: PhenotypeMap,
    pub fertility: Curve,
    pub death: Curve,
    pub competition: Competition,
    #[serde(default)]
    pub mutation: MutationKernel,
    /// Mutation amplitude.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Mutation probability per birth.
    #[serde(default = "default_mu")]
    pub mu: f64,
    /// System size scaling competition.
    #[serde(default = "default_k")]
    pub k: u64,
    #[serde(default)]
    pub bounds: Option<DeclaredBounds>,
}

fn additive() -> PhenotypeMap {
    PhenotypeMap::Additive
}

impl ModelSpec {
    /// Monomorphic logistic model with constant coefficients.
    pub fn logistic(fertility: f64, death: f64, competition: f64) -> Self {
        Self {
            space: TraitSpace { min: 0.0, max: 1.0 },
            phenotype: PhenotypeMap::Additive,
            fertility: Curve::constant(fertility),
            death: Curve::constant(death),
            competition: Competition::constant(competition),
            mutation: MutationKernel::Uniform,
            sigma: default_sigma(),
            mu: 0.0,
            k: default_k(),
            bounds: None,
        }
    }

    /// Fertility linear in phenotype, constant death and competition.
    pub fn fertility_selection(base: f64, slope: f64, death: f64, competition: f64) -> Self {
        Self {
            fertility: Curve::linear(base, slope),
            ..Self::logistic(base, death, competition)
        }
    }

    /// Constant fertility and death with the Gaussian competition kernel; the
    /// kernel's `r_bar` is set to `fertility - death`.
    pub fn gaussian(space: TraitSpace, fertility: f64, death: f64, sigma_a: f64, sigma_k: f64, phi_0: f64) -> Self {
        Self {
            space,
            competition: Competition::Gaussian(GaussianKernelParams {
                r_bar: fertility - death,
                sigma_a,
                sigma_k,
                phi_0,
            }),
            ..Self::logistic(fertility, death, 1.0)
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_k(mut self, k: u64) -> Self {
        self.k = k;
        self
    }

    pub fn with_space(mut self, space: TraitSpace) -> Self {
        self.space = space;
        self
    }

    pub fn with_phenotype(mut self, phenotype: PhenotypeMap) -> Self {
        self.phenotype = phenotype;
        self
    }

    pub fn with_mutation(mut self, kernel: MutationKernel) -> Self {
        self.mutation = kernel;
        self
    }
}

const VALIDATION_GRID: usize = 17;

/// Validated, immutable demographic model.
#[derive(Debug, Clone, PartialEq)]
pub struct DemographyModel {
    spec: ModelSpec,
    law: MutationLaw,
    observed: ObservedBounds,
}

impl DemographyModel {
    /// Builds the model and checks the standing assumptions on a grid of
    /// allelic traits: finite nonnegative fertility and death, positive
    /// competition, and positive growth rate `f - D`.
    pub fn new(spec: ModelSpec) -> Result<Self> {
        let model = Self::new_unchecked(spec)?;
        model.check_assumptions()?;
        Ok(model)
    }

    /// Builds the model validating only parameter syntax, not the
    /// demographic assumptions (used for degenerate test models such as pure
    /// death).
    pub fn new_unchecked(spec: ModelSpec) -> Result<Self> {
        spec.space.validate()?;
        families::validate_families(&spec.phenotype, &spec.fertility, &spec.death, &spec.competition)?;
        if !(0.0..=1.0).contains(&spec.mu) {
            return Err(Error::InvalidParameter(format!(
                "mutation probability must lie in [0, 1], got {}",
                spec.mu
            )));
        }
        if spec.k == 0 {
            return Err(Error::InvalidParameter("system size k must be positive".into()));
        }
        let law = MutationLaw::new(spec.mutation, spec.sigma, spec.space)?;
        let mut model = Self {
            spec,
            law,
            observed: ObservedBounds {
                fertility_max: 0.0,
                death_max: 0.0,
                competition_min: 0.0,
                competition_max: 0.0,
                growth_min: 0.0,
            },
        };
        model.observed = model.scan_bounds();
        Ok(model)
    }

    fn grid(&self) -> Vec<f64> {
        let s = self.spec.space;
        (0..VALIDATION_GRID)
            .map(|i| s.min + s.width() * i as f64 / (VALIDATION_GRID - 1) as f64)
            .collect()
    }

    fn scan_bounds(&self) -> ObservedBounds {
        let grid = self.grid();
        let mut b = ObservedBounds {
            fertility_max: f64::NEG_INFINITY,
            death_max: f64::NEG_INFINITY,
            competition_min: f64::INFINITY,
            competition_max: f64::NEG_INFINITY,
            growth_min: f64::INFINITY,
        };
        let genotypes: Vec<Genotype> = grid
            .iter()
            .enumerate()
            .flat_map(|(i, &a)| grid[i..].iter().map(move |&c| Genotype::new(a, c)))
            .collect();
        for g in &genotypes {
            let f = self.fertility(g);
            let d = self.death(g);
            b.fertility_max = b.fertility_max.max(f);
            b.death_max = b.death_max.max(d);
            b.growth_min = b.growth_min.min(f - d);
        }
        // competition on homozygote/heterozygote pairs of a coarser grid
        for g in genotypes.iter().step_by(3) {
            for h in genotypes.iter().step_by(3) {
                let c = self.competition(g, h);
                b.competition_min = b.competition_min.min(c);
                b.competition_max = b.competition_max.max(c);
            }
        }
        b
    }

    fn check_assumptions(&self) -> Result<()> {
        let grid = self.grid();
        for (i, &a) in grid.iter().enumerate() {
            for &c in &grid[i..] {
                let g = Genotype::new(a, c);
                let f = self.fertility(&g);
                let d = self.death(&g);
                if !(f.is_finite() && f >= 0.0) {
                    return Err(Error::Assumption(format!("fertility {f} at {g:?} is not a finite nonnegative rate")));
                }
                if !(d.is_finite() && d >= 0.0) {
                    return Err(Error::Assumption(format!("death {d} at {g:?} is not a finite nonnegative rate")));
                }
                if f - d <= 0.0 {
                    return Err(Error::Assumption(format!(
                        "growth rate f - D = {} at {g:?} must be positive",
                        f - d
                    )));
                }
            }
        }
        let o = self.observed;
        if !(o.competition_min > 0.0 && o.competition_max.is_finite()) {
            return Err(Error::Assumption(format!(
                "competition must be positive and finite, observed range [{}, {}]",
                o.competition_min, o.competition_max
            )));
        }
        if let Some(d) = self.spec.bounds {
            let violated = o.fertility_max > d.fertility_max
                || o.death_max > d.death_max
                || o.competition_min < d.competition_min
                || o.competition_max > d.competition_max;
            if violated {
                return Err(Error::Assumption(format!(
                    "declared bounds {d:?} violated by observed ranges {o:?}"
                )));
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn space(&self) -> TraitSpace {
        self.spec.space
    }

    pub fn observed_bounds(&self) -> ObservedBounds {
        self.observed
    }

    pub fn sigma(&self) -> f64 {
        self.spec.sigma
    }

    pub fn mutation_probability(&self) -> f64 {
        self.spec.mu
    }

    pub fn system_size(&self) -> f64 {
        self.spec.k as f64
    }

    pub fn mutation_law(&self) -> &MutationLaw {
        &self.law
    }

    pub fn phenotype_map(&self) -> &PhenotypeMap {
        &self.spec.phenotype
    }

    /// Phenotype of a genotype whose alleles must lie in the trait space.
    pub fn phenotype(&self, g: &Genotype) -> Result<f64> {
        self.spec.space.check(g.u1())?;
        self.spec.space.check(g.u2())?;
        Ok(self.phi(g.u1(), g.u2()))
    }

    /// Unchecked phenotype `phi(u1, u2)`.
    pub fn phi(&self, u1: f64, u2: f64) -> f64 {
        self.spec.phenotype.eval(u1, u2)
    }

    /// Derivative of the phenotype in its first allele.
    pub fn phi_d1(&self, u1: f64, u2: f64) -> f64 {
        self.spec.phenotype.d1(u1, u2)
    }

    pub fn fertility(&self, g: &Genotype) -> f64 {
        self.fertility_of_phenotype(self.phi(g.u1(), g.u2()))
    }

    pub fn death(&self, g: &Genotype) -> f64 {
        self.death_of_phenotype(self.phi(g.u1(), g.u2()))
    }

    /// Competition exerted by `other` on `focal`.
    pub fn competition(&self, focal: &Genotype, other: &Genotype) -> f64 {
        self.competition_of_phenotypes(self.phi(focal.u1(), focal.u2()), self.phi(other.u1(), other.u2()))
    }

    pub fn fertility_of_phenotype(&self, phi: f64) -> f64 {
        self.spec.fertility.eval(phi)
    }

    pub fn death_of_phenotype(&self, phi: f64) -> f64 {
        self.spec.death.eval(phi)
    }

    pub fn competition_of_phenotypes(&self, focal: f64, other: f64) -> f64 {
        self.spec.competition.eval(focal, other)
    }

    /// Monomorphic equilibrium density `(f - D) / C` of homozygote `(u, u)`.
    pub fn carrying_capacity(&self, u: f64) -> Result<f64> {
        let g = Genotype::homozygote(u);
        let c = self.competition(&g, &g);
        if c == 0.0 {
            return Err(Error::SingularModel(format!("self-competition vanishes at u = {u}")));
        }
        Ok((self.fertility(&g) - self.death(&g)) / c)
    }

    /// Draws a mutation step from `m_sigma(u, .)`.
    pub fn sample_mutation_step<R: Rng + ?Sized>(&self, u: f64, rng: &mut R) -> Result<f64> {
        self.spec.space.check(u)?;
        self.law.sample(u, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gaussian_model() -> DemographyModel {
        let spec = ModelSpec::gaussian(TraitSpace::new(0.0, 1.0).unwrap(), 2.0, 1.0, 0.6, 1.0, 0.4).with_phenotype(
            PhenotypeMap::Polynomial {
                coeffs: vec![0.0, 1.0, 0.3],
                dominance: 0.2,
            },
        );
        DemographyModel::new(spec).unwrap()
    }

    #[test]
    fn additive_phenotype() {
        let m = DemographyModel::new(ModelSpec::logistic(2.0, 1.0, 1.0)).unwrap();
        assert_eq!(m.phenotype(&Genotype::new(0.4, 0.6)).unwrap(), 0.5);
        assert!(matches!(
            m.phenotype(&Genotype::new(0.4, 1.6)),
            Err(Error::OutOfSpace { .. })
        ));
    }

    #[test]
    fn coefficients_symmetric_bitwise() {
        let m = gaussian_model();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let a: f64 = rng.random();
            let b: f64 = rng.random();
            let (g, h) = (Genotype::new(a, b), Genotype::new(b, a));
            assert_eq!(m.fertility(&g).to_bits(), m.fertility(&h).to_bits());
            assert_eq!(m.death(&g).to_bits(), m.death(&h).to_bits());
            assert_eq!(m.phi(a, b).to_bits(), m.phi(b, a).to_bits());
        }
    }

    #[test]
    fn smooth_phenotype_is_locally_additive() {
        let m = gaussian_model();
        for &u in &[0.1, 0.4, 0.8] {
            let defect = |z: f64| m.phi(u, u + z) - 0.5 * (m.phi(u, u) + m.phi(u + z, u + z));
            let d1 = defect(1e-3).abs();
            let d2 = defect(5e-4).abs();
            assert!(d1 < 1e-5, "defect {d1}");
            // second-order: halving the step quarters the defect
            assert!((d1 / d2 - 4.0).abs() < 0.1);
        }
    }

    #[test]
    fn nonpositive_growth_rejected_at_load() {
        let err = DemographyModel::new(ModelSpec::logistic(1.0, 1.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::Assumption(_)));
        assert!(DemographyModel::new_unchecked(ModelSpec::logistic(0.0, 1.0, 1.0)).is_ok());
    }

    #[test]
    fn declared_bounds_enforced() {
        let mut spec = ModelSpec::fertility_selection(2.0, 2.4, 1.0, 1.0);
        spec.bounds = Some(DeclaredBounds {
            fertility_max: 3.0,
            death_max: 1.0,
            competition_min: 1.0,
            competition_max: 1.0,
        });
        assert!(DemographyModel::new(spec.clone()).is_err());
        spec.bounds.as_mut().unwrap().fertility_max = 4.4;
        let m = DemographyModel::new(spec).unwrap();
        assert!((m.observed_bounds().fertility_max - 4.4).abs() < 1e-12);
    }

    #[test]
    fn spec_roundtrips_through_toml() {
        let spec = ModelSpec::gaussian(TraitSpace::new(-1.0, 2.0).unwrap(), 2.0, 1.0, 0.5, 1.0, 0.0)
            .with_mutation(MutationKernel::Skewed { right_mass: 0.6 });
        let text = toml::to_string(&spec).unwrap();
        let back: ModelSpec = toml::from_str(&text).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn gaussian_capacity_closed_form() {
        let m = gaussian_model();
        for &u in &[0.0, 0.3, 0.9] {
            let phi = m.phi(u, u);
            let expect = (-(phi - 0.4f64).powi(2) / 2.0).exp();
            assert!((m.carrying_capacity(u).unwrap() - expect).abs() < 1e-14);
        }
    }
}
