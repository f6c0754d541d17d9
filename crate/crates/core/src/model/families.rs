//! Parametric families for the genotype-to-phenotype map and the demographic
//! coefficients. Fertility, background death and competition are functions
//! of phenotype, which makes every coefficient symmetric in the two alleles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Genotype-to-phenotype map `phi(u1, u2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhenotypeMap {
    /// `(u1 + u2) / 2`
    Additive,
    /// `sum_k coeffs[k] * m^k + dominance * (u1 - u2)^2` with `m = (u1 + u2) / 2`.
    Polynomial {
        coeffs: Vec<f64>,
        #[serde(default)]
        dominance: f64,
    },
}

impl PhenotypeMap {
    pub fn eval(&self, u1: f64, u2: f64) -> f64 {
        match self {
            PhenotypeMap::Additive => 0.5 * (u1 + u2),
            PhenotypeMap::Polynomial { coeffs, dominance } => {
                let m = 0.5 * (u1 + u2);
                horner(coeffs, m) + dominance * (u1 - u2) * (u1 - u2)
            }
        }
    }

    /// Partial derivative in the first allele.
    pub fn d1(&self, u1: f64, u2: f64) -> f64 {
        match self {
            PhenotypeMap::Additive => 0.5,
            PhenotypeMap::Polynomial { coeffs, dominance } => {
                let m = 0.5 * (u1 + u2);
                let dp: Vec<f64> = coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, c)| k as f64 * c)
                    .collect();
                0.5 * horner(&dp, m) + 2.0 * dominance * (u1 - u2)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let PhenotypeMap::Polynomial { coeffs, dominance } = self {
            if coeffs.is_empty() || coeffs.iter().chain([dominance]).any(|c| !c.is_finite()) {
                return Err(Error::InvalidParameter(
                    "polynomial phenotype needs at least one finite coefficient".into(),
                ));
            }
        }
        Ok(())
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// A scalar function of phenotype.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Curve {
    Constant {
        value: f64,
    },
    Linear {
        intercept: f64,
        slope: f64,
    },
    /// `base + amplitude * exp(-(phi - center)^2 / (2 width^2))`
    Gaussian {
        #[serde(default)]
        base: f64,
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// Natural cubic spline through tabulated points, constant beyond the
    /// end knots.
    Spline(CubicSpline),
}

impl Curve {
    pub fn constant(value: f64) -> Self {
        Curve::Constant { value }
    }

    pub fn linear(intercept: f64, slope: f64) -> Self {
        Curve::Linear { intercept, slope }
    }

    pub fn eval(&self, phi: f64) -> f64 {
        match self {
            Curve::Constant { value } => *value,
            Curve::Linear { intercept, slope } => intercept + slope * phi,
            Curve::Gaussian {
                base,
                amplitude,
                center,
                width,
            } => base + amplitude * (-(phi - center).powi(2) / (2.0 * width * width)).exp(),
            Curve::Spline(s) => s.eval(phi),
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        let ok = match self {
            Curve::Constant { value } => value.is_finite(),
            Curve::Linear { intercept, slope } => intercept.is_finite() && slope.is_finite(),
            Curve::Gaussian {
                base,
                amplitude,
                center,
                width,
            } => base.is_finite() && amplitude.is_finite() && center.is_finite() && *width > 0.0,
            Curve::Spline(_) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid parameters for {name}: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SplineTable {
    knots: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SplineTable", into = "SplineTable")]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = knots.len();
        if n < 2 || values.len() != n {
            return Err(Error::InvalidParameter(
                "spline needs at least two knots and one value per knot".into(),
            ));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "spline knots must be strictly increasing with finite values".into(),
            ));
        }
        // natural boundary conditions; tridiagonal solve for the second derivatives
        let mut second = vec![0.0; n];
        if n > 2 {
            let mut diag = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            let mut upper = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = knots[i] - knots[i - 1];
                let h1 = knots[i + 1] - knots[i];
                let lower = h0 / 6.0;
                diag[i] = (h0 + h1) / 3.0;
                upper[i] = h1 / 6.0;
                rhs[i] = (values[i + 1] - values[i]) / h1 - (values[i] - values[i - 1]) / h0;
                if i > 1 {
                    let w = lower / diag[i - 1];
                    diag[i] -= w * upper[i - 1];
                    rhs[i] -= w * rhs[i - 1];
                }
            }
            for i in (1..n - 1).rev() {
                second[i] = (rhs[i] - upper[i] * second[i + 1]) / diag[i];
            }
        }
        Ok(Self {
            knots,
            values,
            second,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.knots.len();
        if x <= self.knots[0] {
            return self.values[0];
        }
        if x >= self.knots[n - 1] {
            return self.values[n - 1];
        }
        let i = self.knots.partition_point(|&k| k <= x) - 1;
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - x) / h;
        let b = (x - self.knots[i]) / h;
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h / 6.0
    }
}

impl TryFrom<SplineTable> for CubicSpline {
    type Error = Error;

    fn try_from(t: SplineTable) -> Result<Self> {
        CubicSpline::new(t.knots, t.values)
    }
}

impl From<CubicSpline> for SplineTable {
    fn from(s: CubicSpline) -> Self {
        SplineTable {
            knots: s.knots,
            values: s.values,
        }
    }
}

/// Parameters of the classical Gaussian competition kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianKernelParams {
    pub r_bar: f64,
    pub sigma_a: f64,
    pub sigma_k: f64,
    pub phi_0: f64,
}

impl GaussianKernelParams {
    pub fn new(r_bar: f64, sigma_a: f64, sigma_k: f64, phi_0: f64) -> Result<Self> {
        let p = Self {
            r_bar,
            sigma_a,
            sigma_k,
            phi_0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_bar > 0.0 && self.sigma_a > 0.0 && self.sigma_k > 0.0 && self.phi_0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gaussian kernel needs r_bar, sigma_a, sigma_k > 0: {self:?}"
            )));
        }
        Ok(())
    }

    /// Equilibrium density `r_bar / C(phi, phi)` of a monomorphic population.
    pub fn carrying_capacity(&self, phi: f64) -> f64 {
        (-(phi - self.phi_0).powi(2) / (2.0 * self.sigma_k * self.sigma_k)).exp()
    }
}

/// `r_bar * exp(-(phi_focal - phi_other)^2 / (2 sigma_a^2) + (phi_focal - phi_0)^2 / (2 sigma_k^2))`.
///
/// Not symmetric in its two arguments: the first is the individual whose
/// death rate is raised.
pub fn gaussian_competition(params: &GaussianKernelParams, phi_focal: f64, phi_other: f64) -> f64 {
    let GaussianKernelParams {
        r_bar,
        sigma_a,
        sigma_k,
        phi_0,
    } = *params;
    let d = phi_focal - phi_other;
    let e = phi_focal - phi_0;
    r_bar * (-d * d / (2.0 * sigma_a * sigma_a) + e * e / (2.0 * sigma_k * sigma_k)).exp()
}

/// Competition kernel `C(focal, other)` on phenotypes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Competition {
    Constant {
        value: f64,
    },
    Gaussian(GaussianKernelParams),
    /// `sensitivity(phi_focal) * impact(phi_other)`
    Product {
        sensitivity: Curve,
        impact: Curve,
    },
}

impl Competition {
    pub fn constant(value: f64) -> Self {
        Competition::Constant { value }
    }

    pub fn eval(&self, phi_focal: f64, phi_other: f64) -> f64 {
        match self {
            Competition::Constant { value } => *value,
            Competition::Gaussian(p) => gaussian_competition(p, phi_focal, phi_other),
            Competition::Product {
                sensitivity,
                impact,
            } => sensitivity.eval(phi_focal) * impact.eval(phi_other),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Competition::Constant { value } if !value.is_finite() => Err(Error::InvalidParameter(
                format!("competition constant must be finite, got {value}"),
            )),
            Competition::Gaussian(p) => p.validate(),
            Competition::Product {
                sensitivity,
                impact,
            } => {
                sensitivity.validate("competition sensitivity")?;
                impact.validate("competition impact")
            }
            _ => Ok(()),
        }
    }
}

pub(crate) fn validate_families(
    phenotype: &PhenotypeMap,
    fertility: &Curve,
    death: &Curve,
    competition: &Competition,
) -> Result<()> {
    phenotype.validate()?;
    fertility.validate("fertility")?;
    death.validate("death")?;
    competition.validate()
}
