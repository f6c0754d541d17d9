//! Numerical building blocks: adaptive ODE integration, quadrature, root
//! finding and the goodness-of-fit statistics used by the checks.

pub mod ode;
pub mod quad;
pub mod roots;
pub mod stats;

/// Central difference with one Richardson extrapolation step, `O(h^4)`.
pub fn richardson_derivative<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> f64 {
    let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
    let d2 = (f(x + h / 2.0) - f(x - h / 2.0)) / h;
    (4.0 * d2 - d1) / 3.0
}

/// One-sided (forward if `h > 0`, backward if `h < 0`) second-order
/// difference, extrapolated once.
pub fn one_sided_derivative<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> f64 {
    let f0 = f(x);
    let d = |f1: f64, f2: f64, h: f64| (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h);
    let d1 = d(f(x + h), f(x + 2.0 * h), h);
    let d2 = d(f(x + h / 2.0), f(x + h), h / 2.0);
    (4.0 * d2 - d1) / 3.0
}
