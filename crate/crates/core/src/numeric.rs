//! Quadrature and scalar root/extremum search used by the analytic modules.

use crate::{Error, Result};

/// Absolute error target handed to the double-exponential rule.
pub const DEFAULT_ABS_TOL: f64 = 1e-12;

const MAX_SPLIT_DEPTH: u32 = 12;

/// Integrates `f` over `[a, b]` with tanh-sinh quadrature.
///
/// When the rule's error estimate misses `abs_tol` the interval is bisected and
/// each half integrated with half the budget, up to a fixed depth. The final
/// estimate is accepted if its error is below `abs_tol` or below `1e-8` of the
/// integral's magnitude.
pub fn integrate<F>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) || !(abs_tol > 0.0) {
        return Err(Error::domain("integrate", format!("[{a}, {b}], tol = {abs_tol}")));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate(f, b, a, abs_tol).map(|v| -v);
    }
    let (integral, err) = adaptive(&f, a, b, abs_tol, 0);
    if err <= abs_tol || err <= 1e-8 * integral.abs() {
        Ok(integral)
    } else {
        Err(Error::Quadrature {
            integral,
            error_estimate: err,
        })
    }
}

/// Raw adaptive tanh-sinh result on a finite interval: `(integral, error_estimate)`.
pub fn integrate_with_estimate<F>(f: F, a: f64, b: f64, abs_tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    adaptive(&f, a, b, abs_tol, 0)
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> (f64, f64) {
    let out = quadrature::integrate(f, a, b, tol);
    if out.error_estimate <= tol || depth >= MAX_SPLIT_DEPTH {
        return (out.integral, out.error_estimate);
    }
    let mid = 0.5 * (a + b);
    let (l, le) = adaptive(f, a, mid, 0.5 * tol, depth + 1);
    let (r, re) = adaptive(f, mid, b, 0.5 * tol, depth + 1);
    if le + re < out.error_estimate {
        (l + r, le + re)
    } else {
        (out.integral, out.error_estimate)
    }
}

/// Integrates `f` over `[a, ∞)` through the substitution `x = a + t/(1−t)`.
pub fn integrate_to_inf<F>(f: F, a: f64, abs_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate(
        |t| {
            let s = 1.0 - t;
            let v = f(a + t / s) / (s * s);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        abs_tol,
    )
}

/// Finds a root of `f` in `[lo, hi]` by bisection. The endpoints must bracket a sign change.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, x_tol: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::domain(
            "bisect",
            format!("no sign change on [{lo}, {hi}] ({f_lo:e}, {f_hi:e})"),
        ));
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= x_tol {
            return Ok(mid);
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence {
        func: "bisect",
        iterations: max_iter,
    })
}

/// Minimizes a unimodal `f` on `[lo, hi]` by golden-section search, returning the argmin.
pub fn golden_section_min<F>(f: F, mut lo: f64, mut hi: f64, x_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > x_tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(0.5 * (lo + hi))
}
