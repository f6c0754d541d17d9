//! Canonical equation: the deterministic small-step limit of the trait
//! substitution sequence, in time rescaled by `1 / sigma^2`.
//!
//! The general form is `du/dt = n(u) int h [h g(u)]_+ m(u, h) dh` with `g`
//! the selection gradient and `m` the unit-scale mutation kernel; with a
//! symmetric kernel it reduces to `du/dt = n(u) V_a g(u) / 2`. The
//! phenotypic form follows the resident phenotype `U = phi(u, u)`.

use serde::{Deserialize, Serialize};

use crate::dynamics::selection_gradient;
use crate::error::{Error, Result};
use crate::model::DemographyModel;
use crate::numerics::ode::{integrate_with, OdeOptions, Output};
use crate::numerics::quad::{integrate_pieces, QuadOptions};
use crate::numerics::richardson_derivative;
use crate::numerics::roots::bisect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalForm {
    /// Truncated-moment form, valid for any kernel.
    General,
    /// Mutational-variance form for symmetric kernels.
    #[default]
    Symmetric,
    /// Phenotype-level form.
    Phenotypic,
}

/// How the phenotypic mutational variance is reported. The rate of change
/// of the phenotype does not depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VpConvention {
    /// Variance of heterozygote phenotypes, `(d1 phi)^2 V_a`; prefactor 1.
    #[default]
    Heterozygote,
    /// Variance of homozygote phenotypes, `(2 d1 phi)^2 V_a`; prefactor 1/4.
    Homozygote,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CanonicalOptions {
    /// Multiply the speed by the resident fertility `f(u, u)`.
    #[serde(default)]
    pub fertility_prefactor: bool,
    #[serde(default)]
    pub vp_convention: VpConvention,
}

/// Selection gradient `d/dh S(u + h; u)` at `h = 0`.
pub fn fitness_gradient(model: &DemographyModel, u: f64) -> Result<f64> {
    let space = model.space();
    if u - space.min < 1e-3 * space.width() || space.max - u < 1e-3 * space.width() {
        log::warn!("selection gradient at u = {u} uses a one-sided difference near the boundary");
    }
    selection_gradient(model, u)
}

/// Phenotype-level invasion fitness `S~(psi; phi)`.
pub fn phenotypic_fitness(model: &DemographyModel, psi: f64, phi: f64) -> f64 {
    let n = (model.fertility_of_phenotype(phi) - model.death_of_phenotype(phi)) / model.competition_of_phenotypes(phi, phi);
    model.fertility_of_phenotype(psi) - model.death_of_phenotype(psi) - model.competition_of_phenotypes(psi, phi) * n
}

/// Ecological component of the gradient: `d/dpsi S~(psi; phi)` at `psi = phi`.
pub fn phenotypic_gradient(model: &DemographyModel, phi: f64) -> f64 {
    richardson_derivative(|psi| phenotypic_fitness(model, psi, phi), phi, 1e-4)
}

fn prefactor(model: &DemographyModel, u: f64, opts: &CanonicalOptions) -> f64 {
    if opts.fertility_prefactor {
        model.fertility(&crate::model::Genotype::homozygote(u))
    } else {
        1.0
    }
}

/// General form, by quadrature of the truncated moment over the admissible
/// mutation steps.
pub fn rhs_general(model: &DemographyModel, u: f64, opts: &CanonicalOptions) -> Result<f64> {
    let g = selection_gradient(model, u)?;
    let n = model.carrying_capacity(u)?;
    let law = model.mutation_law();
    let sigma = law.sigma;
    let (lo, hi) = law.support(u);
    let mut points = vec![lo];
    if lo < 0.0 && hi > 0.0 {
        points.push(0.0);
    }
    points.push(hi);
    let quad = QuadOptions {
        atol: 1e-14,
        rtol: 1e-12,
        ..QuadOptions::default()
    };
    // steps in trait units; dividing by sigma^2 returns to unit scale
    let (moment, _) = integrate_pieces(|h| h * (h * g).max(0.0) * law.density(u, h), &points, &quad)?;
    Ok(prefactor(model, u, opts) * n * moment / (sigma * sigma))
}

/// Symmetric-kernel form `n V_a g / 2`.
pub fn rhs_symmetric(model: &DemographyModel, u: f64, opts: &CanonicalOptions) -> Result<f64> {
    let kernel = model.mutation_law().kernel;
    if !kernel.is_symmetric() {
        return Err(Error::Precondition(format!(
            "the mutational-variance form needs a symmetric kernel, got {kernel:?}"
        )));
    }
    let g = selection_gradient(model, u)?;
    Ok(prefactor(model, u, opts) * 0.5 * model.carrying_capacity(u)? * kernel.variance() * g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhenotypicRate {
    pub rate: f64,
    pub phenotypic_variance: f64,
    pub u: f64,
}

/// Phenotypic form at phenotype `big_u`: `c n V_p dS~`, with `(V_p, c)`
/// fixed by the convention.
pub fn rhs_phenotypic(model: &DemographyModel, big_u: f64, opts: &CanonicalOptions) -> Result<PhenotypicRate> {
    let u = allele_of_phenotype(model, big_u)?;
    let kernel = model.mutation_law().kernel;
    if !kernel.is_symmetric() {
        return Err(Error::Precondition("the phenotypic form needs a symmetric kernel".into()));
    }
    let slope = model.phi_d1(u, u);
    let (vp, c) = match opts.vp_convention {
        VpConvention::Heterozygote => (slope * slope * kernel.variance(), 1.0),
        VpConvention::Homozygote => (4.0 * slope * slope * kernel.variance(), 0.25),
    };
    let rate = prefactor(model, u, opts) * c * model.carrying_capacity(u)? * vp * phenotypic_gradient(model, big_u);
    Ok(PhenotypicRate {
        rate,
        phenotypic_variance: vp,
        u,
    })
}

/// Checks that `u -> phi(u, u)` is strictly monotone on the trait space.
pub fn check_monotone_phenotype(model: &DemographyModel) -> Result<()> {
    let s = model.space();
    let vals: Vec<f64> = (0..=200)
        .map(|i| {
            let u = s.min + s.width() * i as f64 / 200.0;
            model.phi(u, u)
        })
        .collect();
    let up = vals.windows(2).all(|w| w[1] > w[0]);
    let down = vals.windows(2).all(|w| w[1] < w[0]);
    if up || down {
        Ok(())
    } else {
        Err(Error::Precondition("u -> phi(u, u) is not strictly monotone on the trait space".into()))
    }
}

/// Allele `u` with `phi(u, u) = big_u`.
pub fn allele_of_phenotype(model: &DemographyModel, big_u: f64) -> Result<f64> {
    check_monotone_phenotype(model)?;
    let s = model.space();
    bisect(|u| model.phi(u, u) - big_u, s.min, s.max, 1e-15 * s.width().max(1.0), 200).map_err(|_| {
        Error::OutOfSpace {
            value: big_u,
            min: model.phi(s.min, s.min),
            max: model.phi(s.max, s.max),
        }
    })
}

/// Speed `du/dt` in the requested form (the phenotypic form is mapped back
/// through `dU = 2 d1 phi du`).
pub fn allelic_rate(model: &DemographyModel, u: f64, form: CanonicalForm, opts: &CanonicalOptions) -> Result<f64> {
    match form {
        CanonicalForm::General => rhs_general(model, u, opts),
        CanonicalForm::Symmetric => rhs_symmetric(model, u, opts),
        CanonicalForm::Phenotypic => {
            let r = rhs_phenotypic(model, model.phi(u, u), opts)?;
            Ok(r.rate / (2.0 * model.phi_d1(u, u)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalEnd {
    Horizon,
    /// The speed fell below the equilibrium threshold.
    Equilibrium,
    /// The trait reached an end of the trait space.
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalPoint {
    pub t: f64,
    pub u: f64,
    pub phenotype: f64,
    pub rhs: f64,
    pub gradient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalPath {
    pub points: Vec<CanonicalPoint>,
    pub end: CanonicalEnd,
}

impl CanonicalPath {
    /// Linear interpolation of the trait at time `t`; constant after the end.
    pub fn value_at(&self, t: f64) -> f64 {
        let p = &self.points;
        let i = p.partition_point(|q| q.t <= t);
        if i == 0 {
            return p[0].u;
        }
        if i == p.len() {
            return p[p.len() - 1].u;
        }
        let (a, b) = (&p[i - 1], &p[i]);
        a.u + (b.u - a.u) * (t - a.t) / (b.t - a.t)
    }
}

const EQUILIBRIUM_SPEED: f64 = 1e-10;

/// Integrates the canonical equation from `u0` over `[0, horizon]`.
pub fn integrate_canonical(
    model: &DemographyModel,
    u0: f64,
    horizon: f64,
    form: CanonicalForm,
    opts: &CanonicalOptions,
    record_every: Option<f64>,
) -> Result<CanonicalPath> {
    let space = model.space();
    space.check(u0)?;
    if form == CanonicalForm::Phenotypic {
        check_monotone_phenotype(model)?;
    }
    let output = record_every.map_or(Output::Steps, Output::Grid);
    let mut failure = None;
    let mut end = CanonicalEnd::Horizon;
    let path = integrate_with(
        |_, y: &[f64; 1]| allelic_rate(model, space.clamp(y[0]), form, opts).map(|r| [r]),
        0.0,
        [u0],
        horizon,
        &OdeOptions::with_tolerances(1e-10, 1e-13),
        output,
        |y| y[0] = space.clamp(y[0]),
        |_, y| match allelic_rate(model, y[0], form, opts) {
            Ok(r) if r.abs() < EQUILIBRIUM_SPEED => {
                end = CanonicalEnd::Equilibrium;
                true
            }
            Ok(r) if (y[0] <= space.min && r < 0.0) || (y[0] >= space.max && r > 0.0) => {
                end = CanonicalEnd::Boundary;
                true
            }
            Ok(_) => false,
            Err(e) => {
                failure.get_or_insert(e);
                true
            }
        },
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let points = path
        .t
        .iter()
        .zip(&path.y)
        .map(|(&t, y)| {
            let u = y[0];
            Ok(CanonicalPoint {
                t,
                u,
                phenotype: model.phi(u, u),
                rhs: allelic_rate(model, u, form, opts)?,
                gradient: selection_gradient(model, u)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CanonicalPath { points, end })
}
