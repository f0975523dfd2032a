//! The three perturbation channels: rate constants within `δ`, initial state
//! within `ε`, and observations within `η`. Every random choice is seeded.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::brn::{Brn, BrnError, ConcState, RateFn};

#[derive(Debug, Error, PartialEq)]
pub enum PerturbError {
    #[error("delta {delta} is not below the smallest rate constant {k}")]
    DeltaTooLarge { delta: f64, k: f64 },
    #[error("delta must be finite and nonnegative, got {0}")]
    NegativeDelta(f64),
    #[error("bound must lie in (0, 1/2), got {0}")]
    Bound(f64),
    #[error(transparent)]
    Brn(#[from] BrnError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Adversary {
    None,
    /// `k* = k + sign·δ`; `sign` is clamped to `[-1, 1]`.
    ConstantOffset { sign: f64 },
    /// `k* = k + δ sin(ωt + φ)` with an independent random `φ` per reaction.
    Sinusoid { omega: f64 },
    /// Random values in `[k − δ, k + δ]` at knots `spacing` apart on `[0, horizon]`.
    PiecewiseLinear { spacing: f64, horizon: f64 },
}

impl Adversary {
    /// Sinusoid whose period is one phase.
    pub fn resonant(tau: f64) -> Self {
        Adversary::Sinusoid { omega: std::f64::consts::TAU / tau }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationProfile {
    pub delta: f64,
    pub adversary: Adversary,
    #[serde(default)]
    pub seed: u64,
    /// Perturb only reactions carrying this rate label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub only_label: Option<String>,
}

impl PerturbationProfile {
    pub fn none() -> Self {
        PerturbationProfile { delta: 0.0, adversary: Adversary::None, seed: 0, only_label: None }
    }

    pub fn new(delta: f64, adversary: Adversary, seed: u64) -> Self {
        PerturbationProfile { delta, adversary, seed, only_label: None }
    }

    pub fn only(mut self, label: impl Into<String>) -> Self {
        self.only_label = Some(label.into());
        self
    }
}

/// Replaces every rate constant `k` by a `k*(t)` with `|k*(t) − k| ≤ δ`.
pub fn perturb_rates(brn: &Brn, profile: &PerturbationProfile) -> Result<Brn, PerturbError> {
    let delta = profile.delta;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(PerturbError::NegativeDelta(delta));
    }
    let kmin = brn.reactions().iter().map(|r| r.rate.nominal()).fold(f64::INFINITY, f64::min);
    if !matches!(profile.adversary, Adversary::None) && delta >= kmin {
        return Err(PerturbError::DeltaTooLarge { delta, k: kmin });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let out = brn.map_rates(|_, r| {
        let k = r.rate.nominal();
        let selected = match &profile.only_label {
            Some(l) => r.label.as_deref() == Some(l.as_str()),
            None => true,
        };
        if !selected || delta == 0.0 {
            return RateFn::constant(k);
        }
        match profile.adversary {
            Adversary::None => RateFn::constant(k),
            Adversary::ConstantOffset { sign } => RateFn::Offset { k, offset: sign.clamp(-1.0, 1.0) * delta },
            Adversary::Sinusoid { omega } => RateFn::Sinusoid {
                k,
                amplitude: delta,
                omega,
                phase: rng.gen_range(0.0..std::f64::consts::TAU),
            },
            Adversary::PiecewiseLinear { spacing, horizon } => {
                let n = (horizon / spacing).ceil().max(1.0) as usize;
                let knots = (0..=n).map(|i| (i as f64 * spacing, k + delta * rng.gen_range(-1.0..=1.0))).collect();
                RateFn::PiecewiseLinear { k, knots }
            }
        }
    })?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialMode {
    /// Independent uniform offsets strictly inside the `ε` ball.
    Random,
    /// Entries `≥ ½` lowered and entries below `½` raised by `ε(1 − 10⁻⁹)`.
    WorstCaseSigned,
}

/// Returns `x*` with `‖x* − x0‖ < ε` and `x* ≥ 0`.
pub fn perturb_initial(x0: &ConcState, epsilon: f64, mode: InitialMode, seed: u64) -> ConcState {
    let reach = epsilon * (1.0 - 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = x0
        .as_slice()
        .iter()
        .map(|&x| {
            let d = match mode {
                InitialMode::Random => reach * rng.gen_range(-1.0..=1.0),
                InitialMode::WorstCaseSigned if x >= 0.5 => -reach,
                InitialMode::WorstCaseSigned => reach,
            };
            (x + d).max(0.0)
        })
        .collect();
    ConcState::new(v).expect("clamped state is nonnegative")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservationMode {
    None,
    /// Moves each reading by `η` toward the nearer decision threshold, `⅓` on ties.
    WorstCase,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationScheme {
    pub eta: f64,
    pub mode: ObservationMode,
    #[serde(default)]
    pub seed: u64,
}

impl ObservationScheme {
    pub fn exact() -> Self {
        ObservationScheme { eta: 0.0, mode: ObservationMode::None, seed: 0 }
    }

    pub fn new(eta: f64, mode: ObservationMode, seed: u64) -> Result<Self, PerturbError> {
        if !(eta > 0.0 && eta < 0.5) && mode != ObservationMode::None {
            return Err(PerturbError::Bound(eta));
        }
        Ok(ObservationScheme { eta, mode, seed })
    }

    pub fn observer(&self) -> Observer {
        Observer { scheme: *self, rng: ChaCha8Rng::seed_from_u64(self.seed) }
    }
}

/// Stateful reader for an [`ObservationScheme`]; uniform noise draws from its own stream.
pub struct Observer {
    scheme: ObservationScheme,
    rng: ChaCha8Rng,
}

impl Observer {
    pub fn observe(&mut self, y: f64) -> f64 {
        let eta = self.scheme.eta;
        match self.scheme.mode {
            ObservationMode::None => y,
            ObservationMode::WorstCase => {
                let target = if y > 0.5 { 2.0 / 3.0 } else { 1.0 / 3.0 };
                if y > target {
                    y - eta
                } else if y < target {
                    y + eta
                } else if target > 0.5 {
                    y - eta
                } else {
                    y + eta
                }
            }
            ObservationMode::Uniform => y + eta * self.rng.gen_range(-1.0..=1.0),
        }
    }
}

pub fn observe(y: f64, scheme: &ObservationScheme) -> f64 {
    scheme.observer().observe(y)
}
