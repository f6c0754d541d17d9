//! Trait substitution sequence: the pure jump process of the resident allele
//! on the mutational time scale, singular strategies, and the M1 continuity
//! modulus used to compare paths.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::dynamics::{fitness_unchecked, selection_gradient};
use crate::error::{Error, Result};
use crate::model::{DemographyModel, Genotype};
use crate::numerics::quad::{integrate_pieces, QuadOptions};
use crate::numerics::roots::{bisect, maximize, scan_brackets};

/// Rate density of a jump from resident `u` to `u + h`:
/// `f(u,u) n(u) [S(u+h; u)]_+ / f(u, u+h) * m_sigma(u, h)`.
pub fn jump_rate_density(model: &DemographyModel, u: f64, h: f64) -> Result<f64> {
    model.space().check(u)?;
    model.space().check(u + h)?;
    let m = model.mutation_law().density(u, h);
    if m == 0.0 {
        return Ok(0.0);
    }
    Ok(selective_factor(model, u, h)? * m)
}

/// `f(u,u) n(u) [S(u+h; u)]_+ / f(u, u+h)`: the jump density relative to
/// the mutation law.
fn selective_factor(model: &DemographyModel, u: f64, h: f64) -> Result<f64> {
    let s = fitness_unchecked(model, u + h, u);
    if !(s > 0.0) {
        return Ok(0.0);
    }
    let res = Genotype::homozygote(u);
    let f_het = model.fertility(&Genotype::new(u, u + h));
    if f_het == 0.0 {
        return Err(Error::SingularModel(format!(
            "heterozygote fertility vanishes at ({u}, {})",
            u + h
        )));
    }
    Ok(model.fertility(&res) * model.carrying_capacity(u)? * s / f_het)
}

fn quad_options() -> QuadOptions {
    QuadOptions {
        atol: 1e-10,
        rtol: 1e-10,
        ..QuadOptions::default()
    }
}

/// Total jump rate out of resident `u`.
pub fn total_jump_rate(model: &DemographyModel, u: f64) -> Result<f64> {
    model.space().check(u)?;
    let (lo, hi) = model.mutation_law().support(u);
    let mut err = None;
    let mut f = |h: f64| match jump_rate_density(model, u, h) {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            0.0
        }
    };
    let mut points = vec![lo];
    if lo < 0.0 && hi > 0.0 {
        points.push(0.0);
    }
    points.push(hi);
    let (value, _) = if hi > lo {
        integrate_pieces(&mut f, &points, &quad_options())?
    } else {
        (0.0, 0.0)
    };
    match err {
        Some(e) => Err(e),
        None => Ok(value.max(0.0)),
    }
}

/// Exact sampler of the next jump out of a fixed resident.
#[derive(Debug, Clone)]
pub struct JumpSampler<'m> {
    model: &'m DemographyModel,
    u: f64,
    rate: f64,
    envelope: f64,
}

impl<'m> JumpSampler<'m> {
    pub fn new(model: &'m DemographyModel, u: f64) -> Result<Self> {
        let rate = total_jump_rate(model, u)?;
        let (lo, hi) = model.mutation_law().support(u);
        let mut sup: f64 = 0.0;
        let mut err = None;
        let mut g = |h: f64| match selective_factor(model, u, h) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        };
        for (a, b) in [(lo, 0.0_f64.clamp(lo, hi)), (0.0_f64.clamp(lo, hi), hi)] {
            if b > a {
                sup = sup.max(maximize(&mut g, a, b, 200).1);
            }
        }
        if let Some(e) = err {
            return Err(e);
        }
        Ok(Self {
            model,
            u,
            rate,
            envelope: sup * 1.01 + f64::MIN_POSITIVE,
        })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Draws `(waiting time, step)`; `None` when the resident cannot be
    /// invaded (zero total rate).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Option<(f64, f64)>> {
        if !(self.rate > 0.0) {
            return Ok(None);
        }
        let wait = rng.sample::<f64, _>(Exp1) / self.rate;
        let law = self.model.mutation_law();
        loop {
            let h = law.sample(self.u, rng)?;
            let accept = selective_factor(self.model, self.u, h)? / self.envelope;
            if accept > 1.0 {
                return Err(Error::Degenerate(format!(
                    "rejection envelope {} too small at u = {}",
                    self.envelope, self.u
                )));
            }
            if rng.random::<f64>() < accept {
                return Ok(Some((wait, h)));
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularKind {
    /// The phenotype-level gradient vanishes.
    Ecological,
    /// The phenotype does not respond to the allele.
    Developmental,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularStrategy {
    pub u: f64,
    pub kind: SingularKind,
    /// Derivative of the selection gradient along the diagonal.
    pub slope: f64,
    /// True when the slope vanishes (the root is not simple).
    pub degenerate: bool,
    pub at_boundary: bool,
}

/// Roots of the selection gradient `g(u) = d/dh S(u + h; u)|_{h=0}` on a
/// grid of `resolution` cells, refined by bisection.
pub fn find_singular_strategies(model: &DemographyModel, resolution: usize) -> Result<Vec<SingularStrategy>> {
    let space = model.space();
    let g = |u: f64| selection_gradient(model, space.clamp(u)).unwrap_or(f64::NAN);
    let scale = (0..=resolution)
        .map(|i| g(space.min + space.width() * i as f64 / resolution as f64).abs())
        .fold(0.0, f64::max);
    if scale < 1e-12 {
        return Err(Error::Degenerate(
            "selection gradient vanishes identically: every trait is singular".into(),
        ));
    }
    let tol = 1e-12 * space.width();
    let mut out: Vec<SingularStrategy> = Vec::new();
    for (a, b) in scan_brackets(g, space.min, space.max, resolution) {
        let u = if a == b { a } else { bisect(g, a, b, tol, 200)? };
        if out.iter().any(|s| (s.u - u).abs() < 10.0 * tol) {
            continue;
        }
        let step = 1e-4 * space.width();
        let slope = if u - step < space.min {
            (g(u + step) - g(u)) / step
        } else if u + step > space.max {
            (g(u) - g(u - step)) / step
        } else {
            (g(u + step) - g(u - step)) / (2.0 * step)
        };
        let kind = if model.phi_d1(u, u).abs() < 1e-6 {
            SingularKind::Developmental
        } else {
            SingularKind::Ecological
        };
        out.push(SingularStrategy {
            u,
            kind,
            slope,
            degenerate: slope.abs() < 1e-8,
            at_boundary: u - space.min < 1e-9 * space.width() || space.max - u < 1e-9 * space.width(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TssJump {
    pub index: usize,
    pub time: f64,
    /// Resident trait from `time` on.
    pub u: f64,
    /// Invasion fitness of the new resident against the previous one.
    pub fitness: f64,
}

/// Piecewise-constant jump chain. The first entry is the initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TssPath {
    pub jumps: Vec<TssJump>,
    pub horizon: f64,
    /// Entered the `eta`-neighbourhood of a singular strategy.
    pub stopped: bool,
    /// Reached a resident with zero jump rate.
    pub absorbed: bool,
}

impl TssPath {
    /// Resident trait at time `t`.
    pub fn value_at(&self, t: f64) -> f64 {
        let i = self.jumps.partition_point(|j| j.time <= t);
        self.jumps[i.saturating_sub(1)].u
    }

    pub fn final_trait(&self) -> f64 {
        self.jumps.last().map_or(f64::NAN, |j| j.u)
    }
}

/// TSS simulator with its singular set computed once.
#[derive(Debug, Clone)]
pub struct TssEngine<'m> {
    model: &'m DemographyModel,
    eta: f64,
    singular: Vec<SingularStrategy>,
}

impl<'m> TssEngine<'m> {
    pub fn new(model: &'m DemographyModel, eta: f64, resolution: usize) -> Result<Self> {
        if !(eta >= 0.0) {
            return Err(Error::InvalidParameter(format!("eta must be nonnegative, got {eta}")));
        }
        let singular = match find_singular_strategies(model, resolution) {
            Ok(s) => s,
            Err(Error::Degenerate(_)) => Vec::new(),
            Err(e) => return Err(e),
        };
        Ok(Self { model, eta, singular })
    }

    /// Engine with an explicitly given singular set.
    pub fn with_singular_set(model: &'m DemographyModel, eta: f64, singular: Vec<SingularStrategy>) -> Self {
        Self { model, eta, singular }
    }

    pub fn singular_set(&self) -> &[SingularStrategy] {
        &self.singular
    }

    pub fn distance_to_singular(&self, u: f64) -> f64 {
        self.singular.iter().map(|s| (s.u - u).abs()).fold(f64::INFINITY, f64::min)
    }

    pub fn simulate<R: Rng + ?Sized>(&self, u0: f64, horizon: f64, rng: &mut R) -> Result<TssPath> {
        self.model.space().check(u0)?;
        if self.distance_to_singular(u0) <= self.eta {
            return Err(Error::Precondition(format!(
                "initial trait {u0} lies within eta = {} of a singular strategy",
                self.eta
            )));
        }
        let mut path = TssPath {
            jumps: vec![TssJump {
                index: 0,
                time: 0.0,
                u: u0,
                fitness: 0.0,
            }],
            horizon,
            stopped: false,
            absorbed: false,
        };
        let (mut u, mut t) = (u0, 0.0);
        loop {
            let sampler = JumpSampler::new(self.model, u)?;
            let Some((wait, h)) = sampler.sample(rng)? else {
                path.absorbed = true;
                break;
            };
            if t + wait > horizon {
                break;
            }
            t += wait;
            let fitness = fitness_unchecked(self.model, u + h, u);
            u += h;
            path.jumps.push(TssJump {
                index: path.jumps.len(),
                time: t,
                u,
                fitness,
            });
            if self.distance_to_singular(u) <= self.eta {
                path.stopped = true;
                break;
            }
        }
        Ok(path)
    }
}

/// M1 continuity modulus of a sampled path: the largest distance from
/// `x(t)` to the segment `[x(t1), x(t2)]` over `t1 <= t <= t2`,
/// `t2 - t1 <= delta`. `O(n^2)`.
pub fn m1_modulus(times: &[f64], values: &[f64], delta: f64) -> Result<f64> {
    if times.len() != values.len() {
        return Err(Error::InvalidParameter("times and values differ in length".into()));
    }
    let gap = times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if gap > delta / 10.0 * (1.0 + 1e-9) {
        return Err(Error::TooCoarse { gap, limit: delta / 10.0 });
    }
    let mut w: f64 = 0.0;
    for i in 0..times.len() {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in i + 1..times.len() {
            if times[k] - times[i] > delta {
                break;
            }
            if k > i + 1 {
                lo = lo.min(values[k - 1]);
                hi = hi.max(values[k - 1]);
                let (a, b) = (values[i].min(values[k]), values[i].max(values[k]));
                w = w.max(hi - b).max(a - lo);
            }
        }
    }
    Ok(w)
}
