//! Input signals: continuous concentration functions for the input species,
//! organised into phases of length `τ`.
//!
//! Phase `k` has role reset when `k = 3i`, symbol `a_i` when `k = 3i + 1`,
//! copy when `k = 3i + 2`, and is silent once `k ≥ 3n`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::brn::piecewise_linear;
use crate::nfa::{SymbolId, Word};
use crate::translate::symbol_species_name;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("epsilon must lie in (0, 1/2), got {0}")]
    Epsilon(f64),
    #[error("tau must be positive, got {0}")]
    Tau(f64),
    #[error("symbol {symbol} outside an alphabet of size {size}")]
    Symbol { symbol: SymbolId, size: usize },
    #[error("signal has {got} channels, expected {want}")]
    Channels { got: usize, want: usize },
    #[error("channel `{0}` is not an input species")]
    UnknownChannel(String),
    #[error("invalid signal CSV: {0}")]
    Csv(String),
    #[error("invalid signal JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    /// Continuous ramp up over the first third, plateau, ramp down over the last third.
    Trapezoid,
    /// Discontinuous pulse on the middle two thirds; only a validator fixture.
    Square,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignalSpec {
    pub word: Word,
    pub epsilon: f64,
    pub tau: f64,
    pub shape: Shape,
    /// Concentration of a present species on its plateau.
    pub peak: f64,
}

impl SignalSpec {
    pub fn new(word: Word, epsilon: f64, tau: f64) -> Result<Self, SignalError> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(SignalError::Epsilon(epsilon));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(SignalError::Tau(tau));
        }
        Ok(SignalSpec { word, epsilon, tau, shape: Shape::Trapezoid, peak: 1.0 })
    }

    pub fn with_shape(mut self, shape: Shape) -> Self {
        self.shape = shape;
        self
    }

    pub fn with_peak(mut self, peak: f64) -> Self {
        self.peak = peak;
        self
    }

    pub fn n(&self) -> usize {
        self.word.len()
    }

    /// End of the last input phase, `3nτ`.
    pub fn input_end(&self) -> f64 {
        3.0 * self.n() as f64 * self.tau
    }

    /// Earliest time at which the state may be read, `(3n + 1)τ`.
    pub fn decision_time(&self) -> f64 {
        (3 * self.n() + 1) as f64 * self.tau
    }

    pub fn role(&self, k: usize) -> PhaseRole {
        phase_role(&self.word, k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseRole {
    Reset,
    Symbol(SymbolId),
    Copy,
    Silent,
}

pub fn phase_role(word: &Word, k: usize) -> PhaseRole {
    if k >= 3 * word.len() {
        return PhaseRole::Silent;
    }
    match k % 3 {
        0 => PhaseRole::Reset,
        1 => PhaseRole::Symbol(word.symbols()[k / 3]),
        _ => PhaseRole::Copy,
    }
}

/// Closed-form concentration of a single input channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Waveform {
    Zero,
    /// Trapezoid of height `peak` on each listed phase.
    Trapezoid { tau: f64, peak: f64, phases: Vec<usize> },
    /// Height `peak` on `[kτ + τ/6, (k+1)τ − τ/6)` of each listed phase.
    Square { tau: f64, peak: f64, phases: Vec<usize> },
    /// Linear interpolation through `(t, value)` knots, constant outside.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
    /// `amplitude · sin²(π (t − start)/(end − start))` on `[start, end]`, zero elsewhere.
    Bump { start: f64, end: f64, amplitude: f64 },
    Sum { parts: Vec<Waveform> },
}

impl Waveform {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Waveform::Zero => 0.0,
            Waveform::Trapezoid { tau, peak, phases } => {
                let Some(s) = phase_offset(*tau, phases, t) else { return 0.0 };
                if s < 1.0 / 3.0 {
                    3.0 * s * peak
                } else if s <= 2.0 / 3.0 {
                    *peak
                } else {
                    3.0 * (1.0 - s) * peak
                }
            }
            Waveform::Square { tau, peak, phases } => match phase_offset(*tau, phases, t) {
                Some(s) if (1.0 / 6.0..5.0 / 6.0).contains(&s) => *peak,
                _ => 0.0,
            },
            Waveform::PiecewiseLinear { knots } => piecewise_linear(knots, t).unwrap_or(0.0),
            Waveform::Bump { start, end, amplitude } => {
                if t < *start || t > *end || end <= start {
                    0.0
                } else {
                    let s = (std::f64::consts::PI * (t - start) / (end - start)).sin();
                    amplitude * s * s
                }
            }
            Waveform::Sum { parts } => parts.iter().map(|p| p.eval(t)).sum(),
        }
    }

    /// Points in `(t0, t1)` where the waveform is not smooth, or attains an extremum.
    pub fn breakpoints(&self, t0: f64, t1: f64, out: &mut Vec<f64>) {
        let keep = |t: f64| t > t0 && t < t1;
        match self {
            Waveform::Zero => {}
            Waveform::Trapezoid { tau, phases, .. } | Waveform::Square { tau, phases, .. } => {
                let fracs: &[f64] = if matches!(self, Waveform::Square { .. }) {
                    &[0.0, 1.0 / 6.0, 5.0 / 6.0, 1.0]
                } else {
                    &[0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]
                };
                for &k in phases {
                    for f in fracs {
                        let t = (k as f64 + f) * tau;
                        if keep(t) {
                            out.push(t);
                        }
                    }
                }
            }
            Waveform::PiecewiseLinear { knots } => out.extend(knots.iter().map(|k| k.0).filter(|&t| keep(t))),
            Waveform::Bump { start, end, .. } => {
                out.extend([*start, 0.5 * (start + end), *end].into_iter().filter(|&t| keep(t)))
            }
            Waveform::Sum { parts } => parts.iter().for_each(|p| p.breakpoints(t0, t1, out)),
        }
    }
}

/// Offset of `t` within its phase as a fraction of `τ`, if that phase is listed.
fn phase_offset(tau: f64, phases: &[usize], t: f64) -> Option<f64> {
    if t < 0.0 {
        return None;
    }
    let k = (t / tau).floor();
    let s = (t - k * tau) / tau;
    let k = k as usize;
    phases.binary_search(&k).ok().map(|_| s)
}

/// One waveform per input species, in the order symbols, `X_r`, `X_c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputSignal {
    pub channels: Vec<String>,
    pub waveforms: Vec<Waveform>,
    pub tau: f64,
}

/// Input species names for an alphabet, in channel order.
pub fn channel_names(alphabet: &[String]) -> Vec<String> {
    let mut names: Vec<String> = alphabet.iter().map(|a| symbol_species_name(a)).collect();
    names.push("X_r".into());
    names.push("X_c".into());
    names
}

pub fn encode(spec: &SignalSpec, alphabet: &[String]) -> Result<InputSignal, SignalError> {
    let s = alphabet.len();
    let mut phases = vec![Vec::new(); s + 2];
    for k in 0..3 * spec.n() {
        let ch = match spec.role(k) {
            PhaseRole::Reset => s,
            PhaseRole::Copy => s + 1,
            PhaseRole::Symbol(a) if a < s => a,
            PhaseRole::Symbol(a) => return Err(SignalError::Symbol { symbol: a, size: s }),
            PhaseRole::Silent => unreachable!(),
        };
        phases[ch].push(k);
    }
    let waveforms = phases
        .into_iter()
        .map(|phases| {
            if phases.is_empty() {
                return Waveform::Zero;
            }
            let (tau, peak) = (spec.tau, spec.peak);
            match spec.shape {
                Shape::Trapezoid => Waveform::Trapezoid { tau, peak, phases },
                Shape::Square => Waveform::Square { tau, peak, phases },
            }
        })
        .collect();
    Ok(InputSignal { channels: channel_names(alphabet), waveforms, tau: spec.tau })
}

impl InputSignal {
    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn eval(&self, channel: usize, t: f64) -> f64 {
        self.waveforms[channel].eval(t)
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        for (o, w) in out.iter_mut().zip(&self.waveforms) {
            *o = w.eval(t);
        }
    }

    /// Sorted, deduplicated non-smooth points of all channels in `(t0, t1)`.
    pub fn breakpoints(&self, t0: f64, t1: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for w in &self.waveforms {
            w.breakpoints(t0, t1, &mut out);
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        out
    }

    /// Adds `extra` to one channel.
    pub fn perturbed(&self, channel: usize, extra: Waveform) -> InputSignal {
        let mut out = self.clone();
        let base = std::mem::replace(&mut out.waveforms[channel], Waveform::Zero);
        out.waveforms[channel] = Waveform::Sum { parts: vec![base, extra] };
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("signal serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SignalError> {
        let s: InputSignal = serde_json::from_str(text).map_err(|e| SignalError::Json(e.to_string()))?;
        if s.channels.len() != s.waveforms.len() {
            return Err(SignalError::Channels { got: s.waveforms.len(), want: s.channels.len() });
        }
        if !(s.tau > 0.0) {
            return Err(SignalError::Tau(s.tau));
        }
        Ok(s)
    }

    /// Samples every channel on a uniform grid of step `dt` over `[0, t_end]`,
    /// always including `t_end` and every breakpoint.
    pub fn sample(&self, dt: f64, t_end: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
        let steps = (t_end / dt).ceil() as usize;
        let mut times: Vec<f64> = (0..=steps).map(|i| (i as f64 * dt).min(t_end)).collect();
        times.extend(self.breakpoints(0.0, t_end));
        times.sort_by(f64::total_cmp);
        times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        let values = times
            .iter()
            .map(|&t| self.waveforms.iter().map(|w| w.eval(t)).collect())
            .collect();
        (times, values)
    }

    pub fn write_csv<W: Write>(&self, out: W, dt: f64, t_end: f64) -> Result<(), SignalError> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| SignalError::Csv(e.to_string());
        let mut header = vec!["t".to_string()];
        header.extend(self.channels.iter().cloned());
        w.write_record(&header).map_err(csv_err)?;
        let (times, values) = self.sample(dt, t_end);
        for (t, row) in times.iter().zip(values) {
            let mut rec = vec![t.to_string()];
            rec.extend(row.iter().map(f64::to_string));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a sampled signal; each channel becomes a piecewise-linear waveform.
    pub fn read_csv<R: Read>(input: R, tau: f64) -> Result<Self, SignalError> {
        let mut r = csv::Reader::from_reader(input);
        let csv_err = |e: csv::Error| SignalError::Csv(e.to_string());
        let header = r.headers().map_err(csv_err)?.clone();
        if header.get(0) != Some("t") {
            return Err(SignalError::Csv("first column must be `t`".into()));
        }
        let channels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut knots = vec![Vec::new(); channels.len()];
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let nums = rec
                .iter()
                .map(|f| f.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| SignalError::Csv(format!("row {}: {e}", line + 2)))?;
            if nums.len() != channels.len() + 1 {
                return Err(SignalError::Csv(format!("row {} has {} fields", line + 2, nums.len())));
            }
            for (k, v) in knots.iter_mut().zip(&nums[1..]) {
                k.push((nums[0], *v));
            }
        }
        let waveforms = knots.into_iter().map(|knots| Waveform::PiecewiseLinear { knots }).collect();
        Ok(InputSignal { channels, waveforms, tau })
    }

    /// JSON descriptor for `.json` paths, sampled CSV otherwise.
    pub fn save(&self, path: &Path, dt: f64, t_end: f64) -> Result<(), SignalError> {
        if is_json(path) {
            std::fs::write(path, self.to_json())?;
            Ok(())
        } else {
            self.write_csv(std::fs::File::create(path)?, dt, t_end)
        }
    }

    pub fn load(path: &Path, tau: f64) -> Result<Self, SignalError> {
        if is_json(path) {
            InputSignal::from_json(&std::fs::read_to_string(path)?)
        } else {
            InputSignal::read_csv(std::fs::File::open(path)?, tau)
        }
    }

    /// Reorders channels to match `names`; channels not mentioned become zero.
    pub fn aligned_to(&self, names: &[String]) -> Result<InputSignal, SignalError> {
        for c in &self.channels {
            if !names.contains(c) {
                return Err(SignalError::UnknownChannel(c.clone()));
            }
        }
        let waveforms = names
            .iter()
            .map(|n| match self.channels.iter().position(|c| c == n) {
                Some(i) => self.waveforms[i].clone(),
                None => Waveform::Zero,
            })
            .collect();
        Ok(InputSignal { channels: names.to_vec(), waveforms, tau: self.tau })
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// One failed admissibility condition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub condition: u8,
    pub phase: usize,
    pub channel: Option<String>,
    pub time: f64,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub violations: Vec<Violation>,
    pub phases_checked: usize,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, condition: u8) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }
}

/// Samples per phase used by [`validate`].
pub const SAMPLES_PER_PHASE: usize = 1000;

/// Checks the eight admissibility conditions on phases `0..=3n` by sampling
/// every `τ/1000`, at phase and third boundaries, and at waveform breakpoints.
/// `signal` must be aligned with the channel order of `alphabet`.
pub fn validate(signal: &InputSignal, spec: &SignalSpec, alphabet_size: usize) -> AdmissibilityReport {
    validate_phases(signal, spec, alphabet_size, 3 * spec.n() + 1)
}

pub fn validate_phases(
    signal: &InputSignal,
    spec: &SignalSpec,
    alphabet_size: usize,
    phases: usize,
) -> AdmissibilityReport {
    let (eps, tau) = (spec.epsilon, spec.tau);
    let mut report = AdmissibilityReport { violations: Vec::new(), phases_checked: phases };
    let nch = signal.num_channels();
    if nch != alphabet_size + 2 {
        report.violations.push(Violation { condition: 3, phase: 0, channel: None, time: 0.0, value: nch as f64 });
        return report;
    }
    for k in 0..phases {
        let t0 = k as f64 * tau;
        let t1 = t0 + tau;
        let mut times: Vec<f64> = (0..=SAMPLES_PER_PHASE).map(|j| t0 + tau * j as f64 / SAMPLES_PER_PHASE as f64).collect();
        times.push(t0 + tau / 3.0);
        times.push(t0 + 2.0 * tau / 3.0);
        times.extend(signal.breakpoints(t0, t1));
        times.sort_by(f64::total_cmp);

        let name = |c: usize| Some(signal.channels[c].clone());
        let mut present = Vec::new();
        for c in 0..nch {
            let w = &signal.waveforms[c];
            let mut max = (f64::NEG_INFINITY, t0);
            let mut plateau_min = (f64::INFINITY, t0);
            for &t in &times {
                let v = w.eval(t);
                if v > max.0 {
                    max = (v, t);
                }
                if t >= t0 + tau / 3.0 && t <= t0 + 2.0 * tau / 3.0 && v < plateau_min.0 {
                    plateau_min = (v, t);
                }
            }
            if max.0 >= 1.0 + eps {
                report.violations.push(Violation { condition: 1, phase: k, channel: name(c), time: max.1, value: max.0 });
            }
            let v0 = w.eval(t0);
            if v0 >= eps {
                report.violations.push(Violation { condition: 2, phase: k, channel: name(c), time: t0, value: v0 });
            }
            if max.0 >= eps {
                present.push(c);
                if plateau_min.0 <= 1.0 - eps {
                    report.violations.push(Violation {
                        condition: 4,
                        phase: k,
                        channel: name(c),
                        time: plateau_min.1,
                        value: plateau_min.0,
                    });
                }
            }
        }
        if present.len() > 1 {
            let c = present[1];
            report.violations.push(Violation { condition: 3, phase: k, channel: name(c), time: t0, value: present.len() as f64 });
        }
        let (condition, expected) = match spec.role(k) {
            PhaseRole::Reset => (5, Some(alphabet_size)),
            PhaseRole::Symbol(a) => (6, Some(a)),
            PhaseRole::Copy => (7, Some(alphabet_size + 1)),
            PhaseRole::Silent => (8, None),
        };
        match expected {
            Some(c) if !present.contains(&c) => {
                report.violations.push(Violation { condition, phase: k, channel: name(c), time: t0, value: 0.0 })
            }
            None if !present.is_empty() => report.violations.push(Violation {
                condition,
                phase: k,
                channel: name(present[0]),
                time: t0,
                value: 1.0,
            }),
            _ => {}
        }
    }
    report
}
