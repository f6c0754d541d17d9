//! Dormand–Prince 5(4) integrator with embedded error control.
//!
//! Works on fixed-size states `[f64; N]`. The right-hand side may fail
//! (quadrature-backed vector fields do), in which case integration aborts
//! with that error.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            h_init: None,
            h_max: f64::INFINITY,
            h_min: 1e-13,
            max_steps: 5_000_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }
}

/// Which points of the numerical solution are kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Output {
    /// Every accepted step.
    Steps,
    /// A regular grid `t0 + k * dt` (plus the final time); steps are shortened
    /// to land on grid points exactly.
    Grid(f64),
    /// Only the initial and final states.
    Final,
}

#[derive(Debug, Clone)]
pub struct OdePath<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    /// True when the stop predicate ended integration before `t_end`.
    pub stopped: bool,
}

impl<const N: usize> OdePath<N> {
    pub fn last(&self) -> (f64, [f64; N]) {
        let i = self.t.len() - 1;
        (self.t[i], self.y[i])
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c == 0.0 {
            continue;
        }
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t_end`.
pub fn integrate<const N: usize, F>(
    rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    output: Output,
) -> Result<OdePath<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    integrate_with(rhs, t0, y0, t_end, opts, output, |_| {}, |_, _| false)
}

/// Like [`integrate`], with a projection applied after each accepted step
/// (used to clamp onto invariant faces) and a stop predicate checked after
/// each accepted step.
#[allow(clippy::too_many_arguments)]
pub fn integrate_with<const N: usize, F, P, S>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    output: Output,
    mut project: P,
    mut stop: S,
) -> Result<OdePath<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    P: FnMut(&mut [f64; N]),
    S: FnMut(f64, &[f64; N]) -> bool,
{
    if !(t_end >= t0) {
        return Err(Error::InvalidParameter(format!(
            "integration end {t_end} precedes start {t0}"
        )));
    }
    let mut path = OdePath {
        t: vec![t0],
        y: vec![y0],
        stopped: false,
    };
    if t_end == t0 {
        return Ok(path);
    }
    if stop(t0, &y0) {
        path.stopped = true;
        return Ok(path);
    }

    let span = t_end - t0;
    let mut next_grid = match output {
        Output::Grid(dt) if dt > 0.0 => Some((1usize, dt)),
        Output::Grid(dt) => {
            return Err(Error::InvalidParameter(format!(
                "output grid spacing must be positive, got {dt}"
            )))
        }
        _ => None,
    };

    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y)?;
    let mut h = opts
        .h_init
        .unwrap_or_else(|| initial_step(&y, &k1, opts, span))
        .min(opts.h_max)
        .min(span);
    let mut steps = 0usize;
    let mut last_recorded = true;

    while t < t_end {
        if steps >= opts.max_steps {
            return Err(Error::NoConvergence {
                what: "ODE integration (step budget)",
                iterations: steps,
            });
        }
        // land exactly on the next output point / the end
        let mut target = t_end;
        if let Some((k, dt)) = next_grid {
            target = target.min(t0 + k as f64 * dt);
        }
        let mut h_try = h.min(target - t);
        let hits_target = h_try >= target - t - 1e-12 * target.abs().max(1.0);
        if hits_target {
            h_try = target - t;
        }

        let k2 = rhs(t + C2 * h_try, &axpy(&y, h_try, &[(A21, &k1)]))?;
        let k3 = rhs(t + C3 * h_try, &axpy(&y, h_try, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = rhs(
            t + C4 * h_try,
            &axpy(&y, h_try, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        )?;
        let k5 = rhs(
            t + C5 * h_try,
            &axpy(&y, h_try, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let k6 = rhs(
            t + h_try,
            &axpy(
                &y,
                h_try,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        )?;
        let y_new = axpy(
            &y,
            h_try,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = rhs(t + h_try, &y_new)?;

        let mut err = 0.0;
        for i in 0..N {
            let e = h_try
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc) * (e / sc);
        }
        let err = (err / N as f64).sqrt();
        steps += 1;

        if !err.is_finite() {
            h = h_try * 0.1;
            if h < opts.h_min {
                return Err(Error::StepUnderflow { t, h });
            }
            continue;
        }

        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };

        if err <= 1.0 {
            t = if hits_target { target } else { t + h_try };
            y = y_new;
            project(&mut y);
            k1 = if hits_target || y != y_new {
                rhs(t, &y)?
            } else {
                k7
            };
            let on_grid = hits_target && target < t_end;
            if on_grid {
                if let Some((k, _)) = next_grid.as_mut() {
                    *k += 1;
                }
            }
            last_recorded = false;
            if output == Output::Steps || on_grid || t >= t_end {
                path.t.push(t);
                path.y.push(y);
                last_recorded = true;
            }
            if stop(t, &y) {
                path.stopped = true;
                break;
            }
            // keep the proposed size when we only shortened it to hit a target
            if !hits_target || h_try >= h {
                h = (h_try * factor).min(opts.h_max);
            }
        } else {
            h = h_try * factor.min(1.0);
            if h < opts.h_min {
                return Err(Error::StepUnderflow { t, h });
            }
        }
    }

    if !last_recorded {
        path.t.push(t);
        path.y.push(y);
    }
    Ok(path)
}

fn initial_step<const N: usize>(y: &[f64; N], f: &[f64; N], opts: &OdeOptions, span: f64) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (f[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h.min(span).max(1e-10 * span)
}
