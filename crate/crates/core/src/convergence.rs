//! Distances between adjacent layers: the individual-based process against
//! its deterministic limit, and the trait substitution sequence against the
//! canonical equation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonical::{integrate_canonical, CanonicalForm, CanonicalOptions};
use crate::dynamics::{integrate_flow, DimorphicModel, FlowOptions, GenotypeDensities};
use crate::error::{Error, Result};
use crate::ibm::{PopulationState, Recorder, Simulator, StopRule};
use crate::invasion::without_mutation;
use crate::model::{DemographyModel, Genotype};
use crate::numerics::stats::{mean, median};
use crate::rng::stream;
use crate::tss::TssEngine;

/// Largest pointwise distance between two series sampled on the same grid.
pub fn sup_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidParameter(format!("series lengths differ: {} and {}", a.len(), b.len())));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IbmOdeReport {
    pub k: u64,
    /// Sup over the grid of the max-norm distance, one entry per replicate.
    pub errors: Vec<f64>,
    pub median: f64,
}

/// Runs the two-allele process without mutation from `round(K d0)` and
/// compares its genotype densities with the flow on a grid of step `dt`.
pub fn ibm_ode_distance(
    model: &DemographyModel,
    dm: &DimorphicModel,
    d0: GenotypeDensities,
    horizon: f64,
    dt: f64,
    replicates: u64,
    seed: u64,
) -> Result<IbmOdeReport> {
    let model = without_mutation(model)?;
    let k = model.system_size();
    let gs = [
        Genotype::homozygote(dm.u_resident),
        Genotype::new(dm.u_resident, dm.u_mutant),
        Genotype::homozygote(dm.u_mutant),
    ];
    let start = gs
        .iter()
        .zip(d0.as_array())
        .fold(PopulationState::new(k), |s, (g, d)| s.with(*g, (d * k).round() as u64));
    let start_d = GenotypeDensities::from(gs.map(|g| start.count(&g) as f64 / k));
    let flow = integrate_flow(start_d, dm, horizon, &FlowOptions::recorded(dt))?;
    let errors = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut sim = Simulator::new(&model, &start)?;
            let mut rec = Recorder::new(dt, k);
            sim.run(StopRule::horizon(horizon), &mut stream(seed, r), &mut rec, |_| false)?;
            let traj = rec.finish();
            let series = traj.densities(&gs);
            let mut worst: f64 = 0.0;
            for ((t, d), (s, y)) in series.iter().zip(flow.t.iter().zip(&flow.y)) {
                debug_assert!((t - s).abs() < 1e-9 * dt.max(1.0));
                for i in 0..3 {
                    worst = worst.max((d[i] - y[i]).abs());
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(IbmOdeReport {
        k: k as u64,
        median: median(&errors),
        errors,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TssCanonicalReport {
    pub sigma: f64,
    /// Rescaled times `t sigma^2` of the comparison grid.
    pub times: Vec<f64>,
    pub canonical: Vec<f64>,
    /// Replicate mean of the substitution sequence at each grid time.
    pub tss_mean: Vec<f64>,
    pub sup_distance: f64,
    pub replicates: u64,
}

/// Mean of `replicates` substitution sequences against the canonical
/// solution over `[0, horizon]` in rescaled time, on `grid + 1` points.
#[allow(clippy::too_many_arguments)]
pub fn tss_canonical_distance(
    model: &DemographyModel,
    u0: f64,
    horizon: f64,
    grid: usize,
    eta: f64,
    resolution: usize,
    replicates: u64,
    seed: u64,
) -> Result<TssCanonicalReport> {
    if grid == 0 || replicates == 0 {
        return Err(Error::InvalidParameter("grid and replicates must be positive".into()));
    }
    let sigma = model.sigma();
    let s2 = sigma * sigma;
    let canonical_path = integrate_canonical(model, u0, horizon, CanonicalForm::Symmetric, &CanonicalOptions::default(), None)?;
    let times: Vec<f64> = (0..=grid).map(|i| horizon * i as f64 / grid as f64).collect();
    let canonical: Vec<f64> = times.iter().map(|t| canonical_path.value_at(*t)).collect();
    let engine = TssEngine::new(model, eta, resolution)?;
    let paths = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let path = engine.simulate(u0, horizon / s2, &mut stream(seed, r))?;
            Ok(times.iter().map(|t| path.value_at(t / s2)).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let tss_mean: Vec<f64> = (0..times.len())
        .map(|i| mean(&paths.iter().map(|p| p[i]).collect::<Vec<_>>()))
        .collect();
    Ok(TssCanonicalReport {
        sigma,
        sup_distance: sup_distance(&tss_mean, &canonical)? / model.space().width(),
        times,
        canonical,
        tss_mean,
        replicates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;

    #[test]
    fn identical_series_are_at_distance_zero() {
        let a = [0.1, 0.5, -2.0];
        assert_eq!(sup_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(sup_distance(&a, &[0.1, 0.6, -2.0]).unwrap(), 0.6 - 0.5);
        assert!(sup_distance(&a, &a[..2]).is_err());
    }

    #[test]
    fn ibm_follows_the_flow() {
        let model = DemographyModel::new(ModelSpec::fertility_selection(2.0, 2.4, 1.0, 1.0).with_k(20_000)).unwrap();
        let dm = DimorphicModel::new(&model, 0.0, 0.5).unwrap();
        let rep = ibm_ode_distance(&model, &dm, GenotypeDensities::new(0.5, 0.3, 0.2), 5.0, 0.5, 3, 1).unwrap();
        assert_eq!(rep.errors.len(), 3);
        assert!(rep.median < 0.08, "{rep:?}");
    }
}
