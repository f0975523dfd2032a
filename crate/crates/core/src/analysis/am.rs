//! One-dimensional approximate-majority dynamics with a leak, `ū = p − u`:
//!
//! ```text
//! decay   u' = u ū (a u − b ū) − c u   = (a+b) u (u − E2)(E3 − u)
//! growth  u' = u ū (a u − b ū) + c ū   = (a+b) (p − u)(u − E1*)(u − E2*)
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AmError {
    #[error("parameters must be positive and finite: a={a}, b={b}, c={c}, p={p}")]
    Parameters { a: f64, b: f64, c: f64, p: f64 },
    #[error("leak c = {c} is not below the bound {bound}; the drift has a single real root")]
    Discriminant { c: f64, bound: f64 },
    #[error("endpoints violate the ordering {0}")]
    Ordering(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Decay,
    Growth,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub p: f64,
}

impl AmParams {
    pub fn new(a: f64, b: f64, c: f64, p: f64) -> Result<Self, AmError> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !(ok(a) && ok(b) && ok(c) && ok(p)) {
            return Err(AmError::Parameters { a, b, c, p });
        }
        Ok(AmParams { a, b, c, p })
    }

    /// Largest leak for which three distinct equilibria exist.
    pub fn leak_bound(&self, variant: Variant) -> f64 {
        let s = match variant {
            Variant::Decay => self.a,
            Variant::Growth => self.b,
        };
        self.p * self.p * s * s / (4.0 * (self.a + self.b))
    }

    pub fn drift(&self, variant: Variant, u: f64) -> f64 {
        let AmParams { a, b, c, p } = *self;
        let ub = p - u;
        let am = u * ub * (a * u - b * ub);
        match variant {
            Variant::Decay => am - c * u,
            Variant::Growth => am + c * ub,
        }
    }

    /// `d(drift)/du`; both leak terms contribute `−c`.
    pub fn drift_derivative(&self, u: f64) -> f64 {
        let AmParams { a, b, c, p } = *self;
        // u ū (a u − b ū) = −(a+b)u³ + p(a+2b)u² − b p² u
        -3.0 * (a + b) * u * u + 2.0 * p * (a + 2.0 * b) * u - b * p * p - c
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Stable,
    Unstable,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub value: f64,
    pub stability: Stability,
}

/// The three equilibria in increasing order. For decay these are `E1 = 0, E2, E3`;
/// for growth `E1*, E2*, E3* = p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSet {
    pub variant: Variant,
    pub params: AmParams,
    /// `A` or `A*`.
    pub disc: f64,
    pub points: [Equilibrium; 3],
}

impl EquilibriumSet {
    pub fn e1(&self) -> f64 {
        self.points[0].value
    }
    pub fn e2(&self) -> f64 {
        self.points[1].value
    }
    pub fn e3(&self) -> f64 {
        self.points[2].value
    }
}

pub fn am_equilibria(params: &AmParams, variant: Variant) -> Result<EquilibriumSet, AmError> {
    let AmParams { a, b, c, p } = *params;
    let bound = params.leak_bound(variant);
    if !(c < bound) {
        return Err(AmError::Discriminant { c, bound });
    }
    let s = match variant {
        Variant::Decay => a,
        Variant::Growth => b,
    };
    let disc = (p * p * s * s - 4.0 * c * (a + b)).sqrt();
    let values = match variant {
        Variant::Decay => [0.0, (p * (a + 2.0 * b) - disc) / (2.0 * (a + b)), (p * (a + 2.0 * b) + disc) / (2.0 * (a + b))],
        Variant::Growth => [(b * p - disc) / (2.0 * (a + b)), (b * p + disc) / (2.0 * (a + b)), p],
    };
    let tags = [Stability::Stable, Stability::Unstable, Stability::Stable];
    Ok(EquilibriumSet {
        variant,
        params: *params,
        disc,
        points: std::array::from_fn(|i| Equilibrium { value: values[i], stability: tags[i] }),
    })
}

/// Time for the trajectory to move from `u1` to `u2`.
///
/// Decay requires `E3 > u2 > u1 > E2`; growth requires `E2* > u1 > u2 > E1*`.
pub fn am_travel_time(eq: &EquilibriumSet, u1: f64, u2: f64) -> Result<f64, AmError> {
    let a_ = eq.disc;
    match eq.variant {
        Variant::Decay => {
            let (e2, e3) = (eq.e2(), eq.e3());
            if !(e3 > u2 && u2 >= u1 && u1 > e2) {
                return Err(AmError::Ordering("E3 > u2 > u1 > E2"));
            }
            Ok(((u2 * (e3 - u1) / (u1 * (e3 - u2))).ln() / e3 + (u1 * (u2 - e2) / (u2 * (u1 - e2))).ln() / e2) / a_)
        }
        Variant::Growth => {
            let (e1, e2) = (eq.e1(), eq.e2());
            if !(e2 > u1 && u1 >= u2 && u2 > e1) {
                return Err(AmError::Ordering("E2* > u1 > u2 > E1*"));
            }
            let AmParams { a, c, p, .. } = eq.params;
            // Partial fractions of 1/((a+b)(p−u)(u−E1*)(u−E2*)), using
            // (a+b)(p−E1*)(p−E2*) = a p² + c and (a+b)(E2*−E1*) = A*.
            Ok(((p - u1) / (p - u2)).ln() / (a * p * p + c) - ((u2 - e1) / (u1 - e1)).ln() / (a_ * (p - e1))
                + ((e2 - u2) / (e2 - u1)).ln() / (a_ * (p - e2)))
        }
    }
}

/// The growth-variant time in the form that places the third pole at `0`
/// rather than at `p`. Kept for comparison; it does not solve the ODE.
pub fn growth_travel_time_as_printed(eq: &EquilibriumSet, u1: f64, u2: f64) -> Result<f64, AmError> {
    let (e1, e2) = (eq.e1(), eq.e2());
    if eq.variant != Variant::Growth || !(e2 > u1 && u1 >= u2 && u2 > e1) {
        return Err(AmError::Ordering("E2* > u1 > u2 > E1*"));
    }
    Ok(((u2 * (u1 - e1) / (u1 * (u2 - e1))).ln() / e1 + (u1 * (e2 - u2) / (u2 * (e2 - u1))).ln() / e2) / eq.disc)
}
