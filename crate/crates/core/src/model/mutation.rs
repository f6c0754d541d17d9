//! Mutation step law. A unit-scale kernel on `[-1, 1]` is scaled by the
//! mutation amplitude and truncated to the admissible steps `u + h` inside
//! the trait space, then renormalized.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::genotype::TraitSpace;
use crate::error::{Error, Result};

/// Unit-scale mutation kernel with support in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MutationKernel {
    #[default]
    Uniform,
    /// Density `1 - |x|`.
    Triangular,
    /// Piecewise uniform: mass `right_mass` spread on `(0, 1]`, the rest on
    /// `[-1, 0]`. Same variance as the uniform kernel.
    Skewed { right_mass: f64 },
}

impl MutationKernel {
    pub fn validate(&self) -> Result<()> {
        if let MutationKernel::Skewed { right_mass } = self {
            if !(0.0..=1.0).contains(right_mass) {
                return Err(Error::InvalidParameter(format!(
                    "skewed kernel right_mass must lie in [0, 1], got {right_mass}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            MutationKernel::Skewed { right_mass } => *right_mass == 0.5,
            _ => true,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(-1.0..=1.0).contains(&x) {
            return 0.0;
        }
        match self {
            MutationKernel::Uniform => 0.5,
            MutationKernel::Triangular => 1.0 - x.abs(),
            MutationKernel::Skewed { right_mass } => {
                if x > 0.0 {
                    *right_mass
                } else {
                    1.0 - right_mass
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= -1.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        match self {
            MutationKernel::Uniform => 0.5 * (x + 1.0),
            MutationKernel::Triangular => {
                if x < 0.0 {
                    0.5 * (1.0 + x).powi(2)
                } else {
                    1.0 - 0.5 * (1.0 - x).powi(2)
                }
            }
            MutationKernel::Skewed { right_mass } => {
                let left = 1.0 - right_mass;
                if x <= 0.0 {
                    left * (x + 1.0)
                } else {
                    left + right_mass * x
                }
            }
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match self {
            MutationKernel::Uniform => 2.0 * p - 1.0,
            MutationKernel::Triangular => {
                if p < 0.5 {
                    (2.0 * p).sqrt() - 1.0
                } else {
                    1.0 - (2.0 * (1.0 - p)).sqrt()
                }
            }
            MutationKernel::Skewed { right_mass } => {
                let left = 1.0 - right_mass;
                if p <= left && left > 0.0 {
                    p / left - 1.0
                } else if *right_mass > 0.0 {
                    (p - left) / right_mass
                } else {
                    0.0
                }
            }
        }
    }

    /// Second moment of the untruncated kernel.
    pub fn variance(&self) -> f64 {
        match self {
            MutationKernel::Uniform | MutationKernel::Skewed { .. } => 1.0 / 3.0,
            MutationKernel::Triangular => 1.0 / 6.0,
        }
    }
}

/// Scaled and truncated mutation law `m_sigma(u, .)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MutationLaw {
    pub kernel: MutationKernel,
    pub sigma: f64,
    pub space: TraitSpace,
}

impl MutationLaw {
    pub fn new(kernel: MutationKernel, sigma: f64, space: TraitSpace) -> Result<Self> {
        kernel.validate()?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mutation amplitude sigma must be positive, got {sigma}"
            )));
        }
        Ok(Self {
            kernel,
            sigma,
            space,
        })
    }

    /// Admissible unit-scale step interval `[a, b]` at parent allele `u`.
    pub fn unit_support(&self, u: f64) -> (f64, f64) {
        let a = ((self.space.min - u) / self.sigma).max(-1.0);
        let b = ((self.space.max - u) / self.sigma).min(1.0);
        (a, b)
    }

    /// Admissible step interval `[lo, hi]` in trait units.
    pub fn support(&self, u: f64) -> (f64, f64) {
        let (a, b) = self.unit_support(u);
        (a * self.sigma, b * self.sigma)
    }

    fn mass(&self, u: f64) -> f64 {
        let (a, b) = self.unit_support(u);
        if b <= a {
            0.0
        } else {
            self.kernel.cdf(b) - self.kernel.cdf(a)
        }
    }

    /// Density of the step `h` at parent allele `u`, renormalized over the
    /// admissible support.
    pub fn density(&self, u: f64, h: f64) -> f64 {
        let (lo, hi) = self.support(u);
        if h < lo || h > hi {
            return 0.0;
        }
        let mass = self.mass(u);
        if mass <= 0.0 {
            return 0.0;
        }
        self.kernel.pdf(h / self.sigma) / (self.sigma * mass)
    }

    /// Cumulative distribution of the truncated step law.
    pub fn cdf(&self, u: f64, h: f64) -> f64 {
        let (a, b) = self.unit_support(u);
        let x = (h / self.sigma).clamp(a, b);
        let ca = self.kernel.cdf(a);
        (self.kernel.cdf(x) - ca) / (self.kernel.cdf(b) - ca)
    }

    pub fn sample<R: Rng + ?Sized>(&self, u: f64, rng: &mut R) -> Result<f64> {
        let (a, b) = self.unit_support(u);
        let (ca, cb) = (self.kernel.cdf(a), self.kernel.cdf(b));
        if !(cb > ca) {
            return Err(Error::Degenerate(format!(
                "mutation law has empty admissible support at u = {u}"
            )));
        }
        let p = ca + (cb - ca) * rng.random::<f64>();
        let x = self.kernel.quantile(p).clamp(a, b);
        Ok(self.sigma * x)
    }
}
