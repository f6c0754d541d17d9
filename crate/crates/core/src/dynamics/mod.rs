//! Deterministic large-population limits: the logistic equation, the
//! three-genotype vector field of a dimorphic population, its equilibria and
//! spectra, invasion fitness, the neutral geometry and the zero curve of the
//! weakly perturbed field.

mod flow;
mod neutral;
mod zeros;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

pub use flow::{average_phenotype_series, integrate_flow, is_fixed_point, FlowOptions};
pub use neutral::NeutralGeometry;
pub use zeros::{count_zeros_near_curve, reduced_field, reduced_field_limit, zero_curve, ZeroCurveOptions, ZerosReport};

use crate::error::{Error, Result};
use crate::model::{DemographyModel, Genotype};
use crate::numerics::{one_sided_derivative, richardson_derivative};

/// `n (f - D - C n)`.
pub fn logistic_rhs(n: f64, fertility: f64, death: f64, competition: f64) -> f64 {
    n * (fertility - death - competition * n)
}

/// Closed-form solution of the logistic equation started at `n0 > 0`.
pub fn logistic_solution(n0: f64, fertility: f64, death: f64, competition: f64, t: f64) -> f64 {
    let r = fertility - death;
    let cap = r / competition;
    cap / (1.0 + (cap / n0 - 1.0) * (-r * t).exp())
}

/// Invasion fitness `S(u_a; u_A)` of a rare heterozygote `(u_A, u_a)` in a
/// resident homozygote population `(u_A, u_A)` at equilibrium.
pub fn invasion_fitness(model: &DemographyModel, u_mutant: f64, u_resident: f64) -> Result<f64> {
    let space = model.space();
    space.check(u_mutant)?;
    space.check(u_resident)?;
    Ok(fitness_unchecked(model, u_mutant, u_resident))
}

/// Invasion fitness without range checks; the model functions are defined
/// beyond the trait space, which finite differences at the boundary need.
pub(crate) fn fitness_unchecked(model: &DemographyModel, u_mutant: f64, u_resident: f64) -> f64 {
    if u_mutant == u_resident {
        return 0.0;
    }
    let res = Genotype::homozygote(u_resident);
    let het = Genotype::new(u_resident, u_mutant);
    let c_res = model.competition(&res, &res);
    let n_bar = (model.fertility(&res) - model.death(&res)) / c_res;
    model.fertility(&het) - model.death(&het) - model.competition(&het, &res) * n_bar
}

/// Selection gradient `d/dh S(u + h; u)` at `h = 0`. Central differences
/// with one Richardson step in the interior, one-sided within `step` of the
/// boundary.
pub fn selection_gradient(model: &DemographyModel, u: f64) -> Result<f64> {
    let space = model.space();
    space.check(u)?;
    let step = 1e-3 * space.width();
    let s = |h: f64| fitness_unchecked(model, u + h, u);
    Ok(if u - step < space.min {
        one_sided_derivative(s, 0.0, step)
    } else if u + step > space.max {
        one_sided_derivative(s, 0.0, -step)
    } else {
        richardson_derivative(s, 0.0, step)
    })
}

/// Densities of the homozygote `AA`, the heterozygote `Aa` and the
/// homozygote `aa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenotypeDensities {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl GenotypeDensities {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn total(&self) -> f64 {
        self.x + self.y + self.z
    }

    /// Total density, `A`-allele frequency and excess heterozygosity.
    pub fn to_nph(&self) -> Result<NphCoordinates> {
        let n = self.total();
        if !(n > 0.0) {
            return Err(Error::Precondition("(n, p, h) coordinates need a positive total density".into()));
        }
        let p = (self.x + 0.5 * self.y) / n;
        Ok(NphCoordinates {
            n,
            p,
            h: self.y / n - 2.0 * p * (1.0 - p),
        })
    }
}

impl From<[f64; 3]> for GenotypeDensities {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

/// Total density `n`, allele frequency `p` and excess heterozygosity `h`
/// (zero at Hardy–Weinberg proportions).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NphCoordinates {
    pub n: f64,
    pub p: f64,
    pub h: f64,
}

impl NphCoordinates {
    pub fn to_densities(&self) -> GenotypeDensities {
        let y = self.n * (self.h + 2.0 * self.p * (1.0 - self.p));
        let x = self.p * self.n - 0.5 * y;
        GenotypeDensities::new(x, y, self.n - x - y)
    }
}

/// Genotype index order used throughout: `AA`, `Aa`, `aa`.
pub const GENOTYPE_LABELS: [&str; 3] = ["AA", "Aa", "aa"];

/// Coefficients of a population carrying two alleles `u_A` (resident) and
/// `u_a` (mutant). Arrays are indexed `[AA, Aa, aa]`; `competition[i][j]`
/// is the effect of genotype `j` on genotype `i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimorphicModel {
    pub u_resident: f64,
    pub u_mutant: f64,
    pub fertility: [f64; 3],
    pub death: [f64; 3],
    pub competition: [[f64; 3]; 3],
    pub phenotype: [f64; 3],
}

impl DimorphicModel {
    pub fn new(model: &DemographyModel, u_resident: f64, u_mutant: f64) -> Result<Self> {
        let space = model.space();
        space.check(u_resident)?;
        space.check(u_mutant)?;
        let gs = [
            Genotype::homozygote(u_resident),
            Genotype::new(u_resident, u_mutant),
            Genotype::homozygote(u_mutant),
        ];
        let mut competition = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                competition[i][j] = model.competition(&gs[i], &gs[j]);
            }
        }
        Ok(Self {
            u_resident,
            u_mutant,
            fertility: gs.map(|g| model.fertility(&g)),
            death: gs.map(|g| model.death(&g)),
            competition,
            phenotype: gs.map(|g| model.phi(g.u1(), g.u2())),
        })
    }

    /// Model with explicitly given constants (traits set to 0 and 1).
    pub fn from_constants(fertility: [f64; 3], death: [f64; 3], competition: [[f64; 3]; 3]) -> Self {
        Self {
            u_resident: 0.0,
            u_mutant: 1.0,
            fertility,
            death,
            competition,
            phenotype: [0.0, 0.5, 1.0],
        }
    }

    /// Mutation step `u_a - u_A`.
    pub fn zeta(&self) -> f64 {
        self.u_mutant - self.u_resident
    }

    /// The same population with the roles of the two alleles exchanged.
    pub fn swapped(&self) -> Self {
        let p = [2, 1, 0];
        let mut competition = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                competition[i][j] = self.competition[p[i]][p[j]];
            }
        }
        Self {
            u_resident: self.u_mutant,
            u_mutant: self.u_resident,
            fertility: p.map(|i| self.fertility[i]),
            death: p.map(|i| self.death[i]),
            competition,
            phenotype: p.map(|i| self.phenotype[i]),
        }
    }

    /// Equilibrium density of a pure `AA` population.
    pub fn resident_equilibrium(&self) -> f64 {
        (self.fertility[0] - self.death[0]) / self.competition[0][0]
    }

    /// Equilibrium density of a pure `aa` population.
    pub fn mutant_equilibrium(&self) -> f64 {
        (self.fertility[2] - self.death[2]) / self.competition[2][2]
    }

    /// Growth rate of rare heterozygotes in the `AA` equilibrium.
    pub fn fitness_in_resident(&self) -> f64 {
        self.fertility[1] - self.death[1] - self.competition[1][0] * self.resident_equilibrium()
    }

    /// Growth rate of rare heterozygotes in the `aa` equilibrium.
    pub fn fitness_in_mutant(&self) -> f64 {
        self.swapped().fitness_in_resident()
    }

    /// The vector field `X(x, y, z)`: Mendelian births minus deaths.
    pub fn rhs(&self, d: &[f64; 3]) -> [f64; 3] {
        let [x, y, z] = *d;
        let f = &self.fertility;
        let denom = f[0] * x + f[1] * y + f[2] * z;
        if x + y + z <= 0.0 || denom <= 0.0 {
            return [0.0; 3];
        }
        let gam_a = f[0] * x + 0.5 * f[1] * y;
        let gam_b = f[2] * z + 0.5 * f[1] * y;
        let births = [gam_a * gam_a / denom, 2.0 * gam_a * gam_b / denom, gam_b * gam_b / denom];
        let mut out = [0.0; 3];
        for i in 0..3 {
            let load: f64 = (0..3).map(|j| self.competition[i][j] * d[j]).sum();
            out[i] = births[i] - (self.death[i] + load) * d[i];
        }
        out
    }

    /// Jacobian of [`Self::rhs`] by central differences.
    pub fn jacobian(&self, d: &[f64; 3]) -> Matrix3<f64> {
        let mut j = Matrix3::zeros();
        let scale = d.iter().map(|v| v.abs()).fold(1e-3, f64::max);
        let h = 1e-5 * scale;
        for c in 0..3 {
            let mut hi = *d;
            let mut lo = *d;
            hi[c] += h;
            lo[c] -= h;
            // one Richardson step to reach O(h^4)
            let mut hi2 = *d;
            let mut lo2 = *d;
            hi2[c] += 0.5 * h;
            lo2[c] -= 0.5 * h;
            let (a, b, a2, b2) = (self.rhs(&hi), self.rhs(&lo), self.rhs(&hi2), self.rhs(&lo2));
            for r in 0..3 {
                let d1 = (a[r] - b[r]) / (2.0 * h);
                let d2 = (a2[r] - b2[r]) / h;
                j[(r, c)] = (4.0 * d2 - d1) / 3.0;
            }
        }
        j
    }

    /// Eigenvalues of the Jacobian at the `AA` equilibrium in closed form:
    /// `(D_AA - f_AA, -(D_aa + C_{aa,AA} n_AA), S)`.
    pub fn spectrum_at_resident(&self) -> [f64; 3] {
        let n = self.resident_equilibrium();
        [
            self.death[0] - self.fertility[0],
            -(self.death[2] + self.competition[2][0] * n),
            self.fitness_in_resident(),
        ]
    }

    /// Eigenvector of the Jacobian at `AA` for the heterozygote growth rate,
    /// normalized to unit length with a nonnegative heterozygote component.
    pub fn invasion_direction(&self) -> [f64; 3] {
        let n = self.resident_equilibrium();
        let m = self.jacobian(&[n, 0.0, 0.0]) - Matrix3::identity() * self.fitness_in_resident();
        let r0 = m.row(0).transpose();
        let r2 = m.row(2).transpose();
        let mut v = r0.cross(&r2);
        if v.norm() < 1e-12 {
            v = m.row(1).transpose().cross(&r2);
        }
        v /= v.norm();
        if v[1] < 0.0 {
            v = -v;
        }
        [v[0], v[1], v[2]]
    }

    /// Mean phenotype weighted by densities.
    pub fn mean_phenotype(&self, d: &[f64; 3]) -> Result<f64> {
        let n = d[0] + d[1] + d[2];
        if !(n > 0.0) {
            return Err(Error::Precondition("mean phenotype of an empty population".into()));
        }
        Ok((0..3).map(|i| d[i] * self.phenotype[i]).sum::<f64>() / n)
    }
}

/// Real parts of the eigenvalues of a 3x3 matrix, sorted increasingly.
pub fn sorted_eigenvalues(m: &Matrix3<f64>) -> [f64; 3] {
    let ev = m.complex_eigenvalues();
    let mut v = [ev[0].re, ev[1].re, ev[2].re];
    v.sort_by(f64::total_cmp);
    v
}

/// Numerical spectrum of the Jacobian at the `AA` equilibrium.
pub fn jacobian_spectrum_at_resident(dm: &DimorphicModel) -> [f64; 3] {
    sorted_eigenvalues(&dm.jacobian(&[dm.resident_equilibrium(), 0.0, 0.0]))
}
