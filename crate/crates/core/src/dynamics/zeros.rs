//! Zero curve of a weakly perturbed field near the neutral fixed-point line.
//!
//! Points are parametrized as `M(v, r, s) = (1 + r) Gamma0(v) + s e3(v)`.
//! For each `v` the two transverse components (along `beta1` and `beta3`)
//! of the field are cancelled by Newton's method; what remains, the
//! component along `beta2`, is a scalar field on the curve whose zeros are
//! the fixed points of the full field near the line.

use serde::{Deserialize, Serialize};

use super::neutral::{dot, NeutralGeometry};
use super::DimorphicModel;
use crate::error::{Error, Result};
use crate::numerics::roots::{bisect, scan_brackets};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroCurveOptions {
    /// Half-width of the scanned neighbourhood beyond the line's endpoints,
    /// as a fraction of `n0`.
    pub delta_fraction: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub grid: usize,
}

impl Default for ZeroCurveOptions {
    fn default() -> Self {
        Self {
            delta_fraction: 0.1,
            max_iterations: 50,
            tolerance: 1e-14,
            grid: 400,
        }
    }
}

fn point(geom: &NeutralGeometry, v: f64, r: f64, s: f64) -> [f64; 3] {
    let g = geom.gamma(v);
    let e = geom.e3(v);
    [0, 1, 2].map(|i| (1.0 + r) * g[i] + s * e[i])
}

/// Solves for `(r, s)` on the zero curve at parameter `v`.
pub fn zero_curve(dm: &DimorphicModel, geom: &NeutralGeometry, v: f64, opts: &ZeroCurveOptions) -> Result<(f64, f64)> {
    let duals = geom.duals(v)?;
    let residual = |r: f64, s: f64| {
        let x = dm.rhs(&point(geom, v, r, s));
        [dot(&duals[0], &x), dot(&duals[2], &x)]
    };
    let norm = |a: [f64; 2]| a[0].abs().max(a[1].abs());
    let (mut r, mut s) = (0.0, 0.0);
    let mut res = residual(r, s);
    let eps = 1e-7;
    for _ in 0..opts.max_iterations {
        if norm(res) <= opts.tolerance {
            return Ok((r, s));
        }
        let fr = residual(r + eps, s);
        let fs = residual(r, s + eps);
        let j = [
            [(fr[0] - res[0]) / eps, (fs[0] - res[0]) / eps],
            [(fr[1] - res[1]) / eps, (fs[1] - res[1]) / eps],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Degenerate(format!("singular Newton system on the zero curve at v = {v}")));
        }
        let dr = (j[1][1] * res[0] - j[0][1] * res[1]) / det;
        let ds = (j[0][0] * res[1] - j[1][0] * res[0]) / det;
        // damped step: halve while the residual grows
        let mut lambda = 1.0;
        let mut next = residual(r - dr, s - ds);
        while norm(next) > norm(res) && lambda > 1e-6 {
            lambda *= 0.5;
            next = residual(r - lambda * dr, s - lambda * ds);
        }
        r -= lambda * dr;
        s -= lambda * ds;
        if (lambda * dr).abs().max((lambda * ds).abs()) < 1e-15 {
            res = next;
            if norm(res) <= opts.tolerance.max(1e-13) {
                return Ok((r, s));
            }
            break;
        }
        res = next;
    }
    if norm(res) <= 1e-12 {
        return Ok((r, s));
    }
    Err(Error::NoConvergence {
        what: "zero-curve Newton iteration",
        iterations: opts.max_iterations,
    })
}

/// Component of the field along the fixed-point line, on the zero curve.
pub fn reduced_field(dm: &DimorphicModel, geom: &NeutralGeometry, v: f64, opts: &ZeroCurveOptions) -> Result<f64> {
    let (r, s) = zero_curve(dm, geom, v, opts)?;
    let x = dm.rhs(&point(geom, v, r, s));
    Ok(dot(&geom.beta(1, v)?, &x))
}

/// First-order limit of `reduced_field / zeta`:
/// `-(1 / (2 n0)) dS/dzeta(0) (v^2 - n0^2)`.
pub fn reduced_field_limit(geom: &NeutralGeometry, fitness_slope: f64, v: f64) -> f64 {
    -fitness_slope * (v * v - geom.n0 * geom.n0) / (2.0 * geom.n0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZerosReport {
    pub roots: Vec<f64>,
    pub v_min: f64,
    pub v_max: f64,
}

impl ZerosReport {
    pub fn count(&self) -> usize {
        self.roots.len()
    }
}

/// Zeros of the reduced field on `[-n0 - delta, n0 + delta]`.
pub fn count_zeros_near_curve(dm: &DimorphicModel, geom: &NeutralGeometry, opts: &ZeroCurveOptions) -> Result<ZerosReport> {
    if dm.zeta() == 0.0 {
        return Err(Error::Degenerate(
            "zero mutation step: the whole curve consists of fixed points".into(),
        ));
    }
    let delta = opts.delta_fraction * geom.n0;
    let (lo, hi) = (-geom.n0 - delta, geom.n0 + delta);
    let mut failure = None;
    let mut field = |v: f64| match reduced_field(dm, geom, v, opts) {
        Ok(x) => x,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let brackets = scan_brackets(&mut field, lo, hi, opts.grid);
    let mut roots = Vec::new();
    for (a, b) in brackets {
        roots.push(if a == b { a } else { bisect(&mut field, a, b, 1e-13, 200)? });
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(ZerosReport {
        roots,
        v_min: lo,
        v_max: hi,
    })
}
