//! Single-phase bounds on portal and state species, each with the constants it
//! is built from so a simulated phase can be compared against it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::am::{am_travel_time, AmError};
use super::params::{CopyRate, ParameterSet};

#[derive(Debug, Error, PartialEq)]
pub enum BoundError {
    #[error("{phase}: {reason}")]
    Hypothesis { phase: &'static str, reason: String },
    #[error("{phase}: {source}")]
    Am { phase: &'static str, source: AmError },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "kebab-case")]
pub enum Phase {
    /// `X_r` present; bounds `z_q((k+1)τ)` above.
    Reset,
    /// A symbol present and `(s, a, q) ∈ Δ` with `y_s(kτ) ≥ y0`; bounds `z_q((k+1)τ)` below.
    ComputeHigh { y0: f64 },
    /// A symbol present, every predecessor `y_s(kτ) ≤ y0`, `z_q(kτ) ≤ z0`; bounds `z_q((k+1)τ)` above.
    ComputeLow { y0: f64, z0: f64 },
    /// `X_c` present and `z_q(kτ) ≥ z0`; bounds `y_q(kτ + 2τ/3)` below.
    CopyHigh { z0: f64 },
    /// `X_c` present and `z_q(kτ) ≤ z0`; bounds `y_q(kτ + 2τ/3)` above.
    CopyLow { z0: f64 },
    /// Any input but `X_c`, `y_q(kτ) ≥ y1`; bounds `y_q((k+1)τ) ≥ y2` once `τ` is long enough.
    AmHigh { y1: f64, y2: f64 },
    /// Any input but `X_c`, `y_q(kτ) ≤ y1`; bounds `y_q((k+1)τ) ≤ y2` once `τ` is long enough.
    AmLow { y1: f64, y2: f64 },
}

impl Phase {
    pub fn name(&self) -> &'static str {
        match self {
            Phase::Reset => "reset",
            Phase::ComputeHigh { .. } => "compute-high",
            Phase::ComputeLow { .. } => "compute-low",
            Phase::CopyHigh { .. } => "copy-high",
            Phase::CopyLow { .. } => "copy-low",
            Phase::AmHigh { .. } => "am-high",
            Phase::AmLow { .. } => "am-low",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// The simulated value is at least the bound.
    Lower,
    /// The simulated value is at most the bound.
    Upper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Portal,
    State,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRecord {
    pub phase: &'static str,
    pub value: f64,
    pub direction: Direction,
    pub target: Target,
    /// Offset into the phase, as a fraction of `τ`, at which the bound applies.
    pub at_fraction: f64,
    pub constants: BTreeMap<&'static str, f64>,
}

impl BoundRecord {
    pub fn holds(&self, observed: f64) -> bool {
        match self.direction {
            Direction::Lower => observed >= self.value,
            Direction::Upper => observed <= self.value,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundOptions {
    pub copy_rate: CopyRate,
    /// Total `p = c(Y_q)` for the majority constructions; `1 + 2ε` when unset.
    pub p: Option<f64>,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions { copy_rate: CopyRate::K3, p: None }
    }
}

fn hyp(phase: &'static str, reason: impl Into<String>) -> BoundError {
    BoundError::Hypothesis { phase, reason: reason.into() }
}

pub fn phase_bounds(params: &ParameterSet, phase: Phase, opts: &BoundOptions) -> Result<BoundRecord, BoundError> {
    let ParameterSet { epsilon: e, delta: dl, tau, k1, k3, k4, d, .. } = *params;
    let d = d as f64;
    let kc = params.copy_constant(opts.copy_rate);
    let p = opts.p.unwrap_or(1.0 + 2.0 * e);
    let name = phase.name();
    let mut constants = BTreeMap::new();
    let record = |value, direction, target, at_fraction, constants| BoundRecord {
        phase: name,
        value,
        direction,
        target,
        at_fraction,
        constants,
    };
    match phase {
        Phase::Reset => {
            let a = 2.0 * d * (k1 + dl) * e;
            let b = (k3 - dl) * (1.0 - e);
            if !(b > 0.0) {
                return Err(hyp(name, "k3 − δ must be positive"));
            }
            constants.insert("a", a);
            constants.insert("b", b);
            let v = 2.0 * (a / b + (-b * tau / 3.0).exp()) + a * tau;
            Ok(record(v, Direction::Upper, Target::Portal, 1.0, constants))
        }
        Phase::ComputeHigh { y0 } => {
            let eq = params.am_high(p).map_err(|source| BoundError::Am { phase: name, source })?;
            if y0 < eq.e2() {
                return Err(hyp(name, format!("y0 = {y0} is below E2 = {}", eq.e2())));
            }
            let alpha = (k1 - dl) * (1.0 - e) * y0;
            let beta = (k3 + dl) * e;
            if !(alpha > 0.0) {
                return Err(hyp(name, "k1 − δ must be positive"));
            }
            constants.insert("alpha", alpha);
            constants.insert("beta", beta);
            constants.insert("E2", eq.e2());
            let v = 1.0 - e - beta / alpha - (-alpha * tau / 3.0).exp() - 2.0 * beta * tau;
            Ok(record(v, Direction::Lower, Target::Portal, 1.0, constants))
        }
        Phase::ComputeLow { y0, z0 } => {
            let eq = params.am_low(p).map_err(|source| BoundError::Am { phase: name, source })?;
            if y0 > eq.e2() {
                return Err(hyp(name, format!("y0 = {y0} exceeds E2* = {}", eq.e2())));
            }
            constants.insert("E2*", eq.e2());
            let v = z0 + 4.0 * d * (k1 + dl) * y0 * tau;
            Ok(record(v, Direction::Upper, Target::Portal, 1.0, constants))
        }
        Phase::CopyHigh { z0 } => {
            let alpha = (kc - dl) * (1.0 - e) * (z0 - 2.0 * e * (kc + dl));
            let beta = (kc + dl) * (1.0 + 2.0 * e) * (1.0 + 2.0 * e + 2.0 * e * (kc + dl) - z0) + 4.0 * (k4 + dl);
            if !(alpha > 0.0) {
                return Err(hyp(name, format!("alpha = {alpha} is not positive")));
            }
            constants.insert("alpha", alpha);
            constants.insert("beta", beta);
            let s = alpha + beta;
            let v = alpha / s * (1.0 - e - (-s * tau / 3.0).exp());
            Ok(record(v, Direction::Lower, Target::State, 2.0 / 3.0, constants))
        }
        Phase::CopyLow { z0 } => {
            let alpha = (kc + dl) * (1.0 + 2.0 * e) * (z0 + 4.0 * d * (k1 + dl)) * e + 4.0 * (k4 + dl);
            let beta = (kc - dl) * (1.0 - e) * (1.0 - e - z0 - 4.0 * d * (k1 + dl) * e);
            if !(beta > 0.0) {
                return Err(hyp(name, format!("beta = {beta} is not positive")));
            }
            constants.insert("alpha", alpha);
            constants.insert("beta", beta);
            let s = alpha + beta;
            let v = 2.0 / s * (beta * (-s * tau / 3.0).exp() + alpha);
            Ok(record(v, Direction::Upper, Target::State, 2.0 / 3.0, constants))
        }
        Phase::AmHigh { y1, y2 } => {
            let eq = params.am_high(p).map_err(|source| BoundError::Am { phase: name, source })?;
            let t = am_travel_time(&eq, y1, y2).map_err(|source| BoundError::Am { phase: name, source })?;
            constants.insert("E2", eq.e2());
            constants.insert("E3", eq.e3());
            constants.insert("A", eq.disc);
            constants.insert("time", t);
            if tau < t {
                return Err(hyp(name, format!("tau = {tau} is shorter than the travel time {t}")));
            }
            Ok(record(y2, Direction::Lower, Target::State, 1.0, constants))
        }
        Phase::AmLow { y1, y2 } => {
            let eq = params.am_low(p).map_err(|source| BoundError::Am { phase: name, source })?;
            let t = am_travel_time(&eq, y1, y2).map_err(|source| BoundError::Am { phase: name, source })?;
            constants.insert("E1*", eq.e1());
            constants.insert("E2*", eq.e2());
            constants.insert("A*", eq.disc);
            constants.insert("time", t);
            if tau < t {
                return Err(hyp(name, format!("tau = {tau} is shorter than the travel time {t}")));
            }
            Ok(record(y2, Direction::Upper, Target::State, 1.0, constants))
        }
    }
}
