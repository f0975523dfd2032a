//! Linear exchange `u' = a ū − b u` with `ū = p − u`.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CopyError {
    #[error("rates must be nonnegative and not both zero: a={a}, b={b}")]
    Rates { a: f64, b: f64 },
    #[error("total p must be positive, got {0}")]
    Total(f64),
}

fn check(a: f64, b: f64, p: f64) -> Result<(), CopyError> {
    if !(a >= 0.0 && b >= 0.0 && a + b > 0.0) {
        return Err(CopyError::Rates { a, b });
    }
    if !(p > 0.0) {
        return Err(CopyError::Total(p));
    }
    Ok(())
}

/// `u(t0 + t)` given `u(t0) = u0`.
pub fn copy_solution(u0: f64, a: f64, b: f64, p: f64, t: f64) -> Result<f64, CopyError> {
    check(a, b, p)?;
    let e = (-(a + b) * t).exp();
    Ok(u0 * e + a * p / (a + b) * (1.0 - e))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CopyBounds {
    /// `p (a/b + e^{−bt})`, valid for any `0 ≤ u0 ≤ p`.
    pub upper: f64,
    /// `p − b/a − e^{−at}`, valid for any `0 ≤ u0 ≤ p` when `p ≤ 1`.
    pub lower: f64,
}

pub fn copy_bounds(a: f64, b: f64, p: f64, t: f64) -> Result<CopyBounds, CopyError> {
    check(a, b, p)?;
    Ok(CopyBounds { upper: p * (a / b + (-b * t).exp()), lower: p - b / a - (-a * t).exp() })
}
