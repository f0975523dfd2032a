use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::am::{am_equilibria, AmError, AmParams, EquilibriumSet, Variant};
use crate::translate::Rates;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("{name} must lie in {range}, got {value}")]
    Range { name: &'static str, range: &'static str, value: f64 },
    #[error("invalid parameter JSON: {0}")]
    Json(String),
}

/// Everything the correctness argument is stated in terms of.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub epsilon: f64,
    pub eta: f64,
    pub delta: f64,
    pub tau: f64,
    pub gamma: f64,
    pub gamma_star: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    /// Number of transitions `|Δ|`.
    pub d: usize,
}

/// Which rate constant drives the copy reactions inside the copy-phase bounds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CopyRate {
    /// `k3`, as the copy bounds are written.
    #[default]
    K3,
    /// `k2`, the constant the copy reactions actually carry.
    K2,
}

impl ParameterSet {
    pub fn rates(&self) -> Rates {
        Rates::new(self.k1, self.k2, self.k3, self.k4)
    }

    pub fn copy_constant(&self, which: CopyRate) -> f64 {
        match which {
            CopyRate::K3 => self.k3,
            CopyRate::K2 => self.k2,
        }
    }

    /// Range of the conserved totals `c(Y_q)`, `c(Z_q)` under an `ε` initial perturbation.
    pub fn total_band(&self) -> (f64, f64) {
        (1.0 - self.epsilon, 1.0 + 2.0 * self.epsilon)
    }

    /// Decay-variant constants in force outside the copy phase:
    /// `a = k4 − δ, b = k4 + δ, c = 2ε(k2 + δ)`.
    pub fn am_high(&self, p: f64) -> Result<EquilibriumSet, AmError> {
        let c = 2.0 * self.epsilon * (self.k2 + self.delta);
        am_equilibria(&AmParams::new(self.k4 - self.delta, self.k4 + self.delta, c, p)?, Variant::Decay)
    }

    /// Growth-variant constants: `a = k4 + δ, b = k4 − δ, c = 2ε(k2 + δ)`.
    pub fn am_low(&self, p: f64) -> Result<EquilibriumSet, AmError> {
        let c = 2.0 * self.epsilon * (self.k2 + self.delta);
        am_equilibria(&AmParams::new(self.k4 + self.delta, self.k4 - self.delta, c, p)?, Variant::Growth)
    }

    /// Structural checks only; the dynamic constraints live in the checker.
    pub fn validate(&self) -> Result<(), ParamError> {
        let open = |name, v: f64| {
            if v > 0.0 && v < 0.5 {
                Ok(())
            } else {
                Err(ParamError::Range { name, range: "(0, 1/2)", value: v })
            }
        };
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ParamError::Range { name, range: "(0, ∞)", value: v })
            }
        };
        open("epsilon", self.epsilon)?;
        open("eta", self.eta)?;
        open("gamma", self.gamma)?;
        open("gamma_star", self.gamma_star)?;
        positive("tau", self.tau)?;
        for (n, k) in [("k1", self.k1), ("k2", self.k2), ("k3", self.k3), ("k4", self.k4)] {
            positive(n, k)?;
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(ParamError::Range { name: "delta", range: "[0, ∞)", value: self.delta });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("parameters serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, ParamError> {
        let p: ParameterSet = serde_json::from_str(text).map_err(|e| ParamError::Json(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }
}
