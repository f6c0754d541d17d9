use serde::{Deserialize, Serialize};

use super::{DimorphicModel, GenotypeDensities};
use crate::error::{Error, Result};
use crate::numerics::ode::{integrate_with, OdeOptions, OdePath, Output};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Recording interval; `None` keeps every accepted step.
    pub record_every: Option<f64>,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            record_every: None,
        }
    }
}

impl FlowOptions {
    pub fn recorded(dt: f64) -> Self {
        Self {
            record_every: Some(dt),
            ..Self::default()
        }
    }
}

/// Integrates the three-genotype field from `d0` over `[0, horizon]`.
/// Components are clamped at zero after each step: the faces of the
/// positive octant are invariant, so negative values are round-off.
pub fn integrate_flow(d0: GenotypeDensities, dm: &DimorphicModel, horizon: f64, opts: &FlowOptions) -> Result<OdePath<3>> {
    let y0 = d0.as_array();
    if y0.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::Precondition(format!("initial densities {y0:?} must be nonnegative")));
    }
    let output = match opts.record_every {
        Some(dt) => Output::Grid(dt),
        None => Output::Steps,
    };
    integrate_with(
        |_, y: &[f64; 3]| Ok(dm.rhs(y)),
        0.0,
        y0,
        horizon,
        &OdeOptions::with_tolerances(opts.rtol, opts.atol),
        output,
        |y| {
            for v in y.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        },
        |_, _| false,
    )
}

/// True when the field is below `tol` in max-norm at `d`.
pub fn is_fixed_point(d: &[f64; 3], dm: &DimorphicModel, tol: f64) -> bool {
    dm.rhs(d).iter().all(|v| v.abs() < tol)
}

/// Density-weighted mean phenotype along a flow.
pub fn average_phenotype_series(path: &OdePath<3>, dm: &DimorphicModel) -> Result<Vec<(f64, f64)>> {
    path.t
        .iter()
        .zip(&path.y)
        .map(|(t, y)| Ok((*t, dm.mean_phenotype(y)?)))
        .collect()
}
