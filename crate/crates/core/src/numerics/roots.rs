use crate::error::{Error, Result};

/// Bisection on a bracketing interval. Exact zeros at either end are
/// returned as-is.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64, max_iter: usize) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::Bracketing(format!(
            "f({a}) = {fa} and f({b}) = {fb} do not bracket a root"
        )));
    }
    for _ in 0..max_iter {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m == a || m == b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Sign-change brackets of `f` sampled on `n` equal subintervals of `[a, b]`.
/// Grid points where `f` is exactly zero come back as degenerate brackets
/// `(x, x)`.
pub fn scan_brackets<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let xs: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut out = Vec::new();
    for i in 0..=n {
        if fs[i] == 0.0 {
            out.push((xs[i], xs[i]));
            continue;
        }
        if i < n && fs[i + 1] != 0.0 && fs[i].signum() != fs[i + 1].signum() {
            out.push((xs[i], xs[i + 1]));
        }
    }
    out
}

/// Maximum of `f` on `[a, b]`: grid search followed by golden-section
/// refinement around the best grid cell. Returns `(argmax, max)`.
pub fn maximize<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, grid: usize) -> (f64, f64) {
    let n = grid.max(2);
    let mut best = (a, f(a));
    let mut best_i = 0;
    for i in 1..=n {
        let x = a + (b - a) * i as f64 / n as f64;
        let v = f(x);
        if v > best.1 {
            best = (x, v);
            best_i = i;
        }
    }
    let step = (b - a) / n as f64;
    let mut lo = (a + step * (best_i as f64 - 1.0)).max(a);
    let mut hi = (a + step * (best_i as f64 + 1.0)).min(b);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..60 {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
        if hi - lo < 1e-14 * (1.0 + hi.abs()) {
            break;
        }
    }
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}
