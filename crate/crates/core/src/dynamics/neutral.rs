use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::DimorphicModel;
use crate::error::{Error, Result};

/// Geometry of the neutral field, where all genotypes share fertility `f`,
/// death `D0` and competition `D1`. Its fixed points form the
/// Hardy–Weinberg line `Gamma0(v)`, `v` in `[-n0, n0]`, running from the
/// pure `AA` equilibrium to the pure `aa` one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeutralGeometry {
    pub fertility: f64,
    pub death: f64,
    pub competition: f64,
    pub n0: f64,
}

impl NeutralGeometry {
    pub fn new(fertility: f64, death: f64, competition: f64) -> Result<Self> {
        if !(fertility > death && competition > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "neutral geometry needs f > D0 and D1 > 0, got f = {fertility}, D0 = {death}, D1 = {competition}"
            )));
        }
        Ok(Self {
            fertility,
            death,
            competition,
            n0: (fertility - death) / competition,
        })
    }

    /// Geometry of the unperturbed field of a dimorphic population, built
    /// from its resident homozygote coefficients.
    pub fn for_resident(dm: &DimorphicModel) -> Result<Self> {
        Self::new(dm.fertility[0], dm.death[0], dm.competition[0][0])
    }

    /// The neutral vector field itself.
    pub fn field(&self) -> DimorphicModel {
        DimorphicModel::from_constants([self.fertility; 3], [self.death; 3], [[self.competition; 3]; 3])
    }

    pub fn gamma(&self, v: f64) -> [f64; 3] {
        let n0 = self.n0;
        [
            (v - n0).powi(2) / (4.0 * n0),
            -(v * v - n0 * n0) / (2.0 * n0),
            (v + n0).powi(2) / (4.0 * n0),
        ]
    }

    /// Radial eigenvector, eigenvalue `D0 - f`.
    pub fn e1(&self, v: f64) -> [f64; 3] {
        self.gamma(v)
    }

    /// Tangent to the fixed-point line, eigenvalue 0.
    pub fn e2(&self, v: f64) -> [f64; 3] {
        let n0 = self.n0;
        [(v - n0) / (2.0 * n0), -v / n0, (v + n0) / (2.0 * n0)]
    }

    /// Transverse eigenvector, eigenvalue `-f`.
    pub fn e3(&self, _v: f64) -> [f64; 3] {
        let n0 = self.n0;
        [0.5 / n0, -1.0 / n0, 0.5 / n0]
    }

    pub fn eigenvalues(&self) -> [f64; 3] {
        [self.death - self.fertility, 0.0, -self.fertility]
    }

    /// Dual basis: `beta_i . e_j = delta_ij`.
    pub fn duals(&self, v: f64) -> Result<[[f64; 3]; 3]> {
        let (a, b, c) = (self.e1(v), self.e2(v), self.e3(v));
        let m = Matrix3::new(a[0], b[0], c[0], a[1], b[1], c[1], a[2], b[2], c[2]);
        let inv = m
            .try_inverse()
            .ok_or_else(|| Error::Degenerate(format!("neutral eigenbasis is singular at v = {v}")))?;
        Ok([0, 1, 2].map(|i| [inv[(i, 0)], inv[(i, 1)], inv[(i, 2)]]))
    }

    pub fn beta(&self, i: usize, v: f64) -> Result<[f64; 3]> {
        Ok(self.duals(v)?[i])
    }
}

pub(crate) fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
