//! Integration of a (possibly time-dependent) network driven by an input
//! signal, and the thresholded reading of its state species.
//!
//! Input species are not integrated. Each evaluation of the vector field sees
//! them at the signal value, and their own derivative is zero.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::brn::{Brn, ConcState};
use crate::nfa::{Nfa, StateSet, Word};
use crate::ode::{self, OdeError, OdeOptions, Segment, StepHint};
use crate::perturb::Observer;
use crate::signal::{InputSignal, SignalError};
use crate::translate::SpeciesIndex;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("integrator fault: {0}")]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error("initial state has {got} entries, network has {want} species")]
    Dimension { got: usize, want: usize },
    #[error("decision time {t} precedes the horizon {horizon}")]
    TooEarly { t: f64, horizon: f64 },
    #[error("time {t} outside the trace [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Method {
    Dopri5,
    /// Fixed-step RK4 with step `h`.
    Rk4 { h: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub t_end: f64,
    /// Spacing of the uniform output grid used by [`Trace::sampled`].
    pub sample_stride: f64,
    pub method: Method,
}

impl SimConfig {
    pub fn new(t_end: f64) -> Self {
        SimConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: f64::INFINITY,
            t_end,
            sample_stride: (t_end / 1000.0).max(1e-6),
            method: Method::Dopri5,
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    /// RK4 at `h = τ/10⁴`.
    pub fn fixed_step(mut self, tau: f64) -> Self {
        self.method = Method::Rk4 { h: tau * 1e-4 };
        self
    }

    fn validate(&self) -> Result<(), SimError> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(SimError::Config("tolerances must be positive".into()));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(SimError::Config(format!("t_end must be finite and nonnegative, got {}", self.t_end)));
        }
        if let Method::Rk4 { h } = self.method {
            if !(h > 0.0) {
                return Err(SimError::Config("fixed step must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Solution of one run: accepted step endpoints plus a dense interpolant.
#[derive(Clone, Debug)]
pub struct Trace {
    pub species: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    segments: Vec<Segment>,
    /// `(species, channel)` pairs held to the signal.
    inputs: Vec<(usize, usize)>,
    signal: InputSignal,
    pub steps: usize,
}

pub fn integrate(brn: &Brn, x0: &ConcState, signal: &InputSignal, config: &SimConfig) -> Result<Trace, SimError> {
    config.validate()?;
    let n = brn.num_species();
    if x0.len() != n {
        return Err(SimError::Dimension { got: x0.len(), want: n });
    }
    let input_names: Vec<String> = brn.input_species().map(|i| brn.species()[i].name.clone()).collect();
    let signal = signal.aligned_to(&input_names)?;
    let inputs: Vec<(usize, usize)> = brn.input_species().enumerate().map(|(c, s)| (s, c)).collect();

    let mut cuts = signal.breakpoints(0.0, config.t_end);
    for r in brn.reactions() {
        cuts.extend(r.rate.breakpoints(0.0, config.t_end));
    }
    cuts.push(config.t_end);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));

    let mut scratch = vec![0.0; n];
    let mut rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        scratch.copy_from_slice(y);
        for &(s, c) in &inputs {
            scratch[s] = signal.eval(c, t);
        }
        brn.vector_field_into(&scratch, t, dy);
        for &(s, _) in &inputs {
            dy[s] = 0.0;
        }
    };

    let opts = OdeOptions {
        rtol: config.rel_tol,
        atol: config.abs_tol,
        max_step: config.max_step,
        ..OdeOptions::default()
    };
    let mut y = x0.as_slice().to_vec();
    let mut segments = Vec::new();
    let mut hint = StepHint::default();
    let mut t = 0.0;
    let mut steps = 0;
    for &cut in &cuts {
        steps += match config.method {
            Method::Dopri5 => ode::dopri5(&mut rhs, t, cut, &mut y, &opts, &mut hint, &mut segments)?,
            Method::Rk4 { h } => ode::rk4(&mut rhs, t, cut, &mut y, h, &opts, &mut segments)?,
        };
        t = cut;
    }

    let mut times = vec![0.0];
    times.extend(segments.iter().map(Segment::t1));
    let mut states = Vec::with_capacity(times.len());
    let mut first = x0.as_slice().to_vec();
    for &(s, c) in &inputs {
        first[s] = signal.eval(c, 0.0);
    }
    states.push(first);
    for seg in &segments {
        let mut v = seg.eval(seg.t1());
        for &(s, c) in &inputs {
            v[s] = signal.eval(c, seg.t1());
        }
        states.push(v);
    }
    Ok(Trace {
        species: brn.species().iter().map(|s| s.name.clone()).collect(),
        times,
        states,
        segments,
        inputs,
        signal,
        steps,
    })
}

impl Trace {
    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// Full state at `t`, inputs taken from the signal.
    pub fn at(&self, t: f64) -> Result<Vec<f64>, SimError> {
        let end = self.t_end();
        if !(0.0..=end * (1.0 + 1e-12)).contains(&t) {
            return Err(SimError::OutOfRange { t, start: 0.0, end });
        }
        let mut v = match ode::find_segment(&self.segments, t) {
            Some(seg) => seg.eval(t),
            None => self.states[0].clone(),
        };
        for x in v.iter_mut() {
            *x = x.max(0.0);
        }
        for &(s, c) in &self.inputs {
            v[s] = self.signal.eval(c, t);
        }
        Ok(v)
    }

    pub fn value(&self, t: f64, species: usize) -> Result<f64, SimError> {
        Ok(self.at(t)?[species])
    }

    /// States on a uniform grid of step `stride`, ending at `t_end`.
    pub fn sampled(&self, stride: f64) -> Vec<(f64, Vec<f64>)> {
        let end = self.t_end();
        let n = (end / stride).ceil().max(1.0) as usize;
        (0..=n)
            .map(|i| {
                let t = (i as f64 * stride).min(end);
                (t, self.at(t).expect("grid lies in range"))
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W, stride: Option<f64>) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| SimError::Io(std::io::Error::other(e));
        let mut header = vec!["t".to_string()];
        header.extend(self.species.iter().cloned());
        w.write_record(&header).map_err(io)?;
        let rows: Vec<(f64, Vec<f64>)> = match stride {
            Some(s) => self.sampled(s),
            None => self.times.iter().cloned().zip(self.states.iter().cloned()).collect(),
        };
        for (t, row) in rows {
            let mut rec = vec![t.to_string()];
            rec.extend(row.iter().map(f64::to_string));
            w.write_record(&rec).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Long-format rows `t,species,value` for plotting.
    pub fn write_plot_data<W: Write>(&self, out: W, stride: f64) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| SimError::Io(std::io::Error::other(e));
        w.write_record(["t", "species", "value"]).map_err(io)?;
        for (t, row) in self.sampled(stride) {
            for (name, v) in self.species.iter().zip(row) {
                w.write_record([t.to_string(), name.clone(), v.to_string()]).map_err(io)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Largest deviation of `y_q + ȳ_q` and `z_q + z̄_q` from their initial totals
    /// over accepted steps.
    pub fn max_conservation_error(&self, index: &SpeciesIndex) -> f64 {
        let x0 = &self.states[0];
        let mut worst: f64 = 0.0;
        for x in &self.states {
            for q in 0..index.y.len() {
                let dy = (x[index.y[q]] + x[index.y_bar[q]]) - (x0[index.y[q]] + x0[index.y_bar[q]]);
                let dz = (x[index.z[q]] + x[index.z_bar[q]]) - (x0[index.z[q]] + x0[index.z_bar[q]]);
                worst = worst.max(dy.abs()).max(dz.abs());
            }
        }
        worst
    }

    pub fn min_concentration(&self) -> f64 {
        self.states.iter().flatten().cloned().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    InSet,
    NotInSet,
    Undetermined,
}

impl Verdict {
    pub fn of(observed: f64) -> Verdict {
        if observed > 2.0 / 3.0 {
            Verdict::InSet
        } else if observed < 1.0 / 3.0 {
            Verdict::NotInSet
        } else {
            Verdict::Undetermined
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateVerdict {
    pub state: String,
    pub y: f64,
    pub observed: f64,
    pub verdict: Verdict,
    /// Membership of the state in the reachable set, from the automaton itself.
    pub expected: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decision {
    pub time: f64,
    pub verdicts: Vec<StateVerdict>,
    /// `Some(true)` if an accepting state reads in-set; `None` if none does and
    /// some accepting state is undetermined.
    pub accept: Option<bool>,
    pub expected_accept: bool,
}

impl Decision {
    /// Every state verdict matches the automaton, and none is undetermined.
    pub fn correct(&self) -> bool {
        self.verdicts.iter().all(|v| match v.verdict {
            Verdict::InSet => v.expected,
            Verdict::NotInSet => !v.expected,
            Verdict::Undetermined => false,
        })
    }

    pub fn undetermined(&self) -> bool {
        self.verdicts.iter().any(|v| v.verdict == Verdict::Undetermined)
    }
}

/// Reads every `Y_q` at time `t ≥ (3n + 1)τ` through `observer`.
pub fn decide(
    trace: &Trace,
    nfa: &Nfa,
    index: &SpeciesIndex,
    word: &Word,
    tau: f64,
    observer: &mut Observer,
    t: f64,
) -> Result<Decision, SimError> {
    let horizon = (3 * word.len() + 1) as f64 * tau;
    if t < horizon * (1.0 - 1e-12) {
        return Err(SimError::TooEarly { t, horizon });
    }
    let x = trace.at(t)?;
    let reach = nfa.reachable(word).map_err(|e| SimError::Config(e.to_string()))?;
    let verdicts: Vec<StateVerdict> = nfa
        .states()
        .iter()
        .enumerate()
        .map(|(q, name)| {
            let y = x[index.y[q]];
            let observed = observer.observe(y);
            StateVerdict { state: name.clone(), y, observed, verdict: Verdict::of(observed), expected: reach.contains(q) }
        })
        .collect();
    let acc = nfa.accepting();
    let accepting: Vec<Verdict> = verdicts.iter().enumerate().filter(|(q, _)| acc.contains(*q)).map(|(_, v)| v.verdict).collect();
    let accept = if accepting.contains(&Verdict::InSet) {
        Some(true)
    } else if accepting.contains(&Verdict::Undetermined) {
        None
    } else {
        Some(false)
    };
    Ok(Decision { time: t, verdicts, accept, expected_accept: reach.intersects(acc) })
}

/// Margins of the invariant at `3|w|τ`: for each state, `y_q − (1 − γ)` if `q` is
/// reachable on `w`, else `γ − y_q`. The invariant holds iff all are `≥ 0`.
pub fn phi_margins(trace: &Trace, nfa: &Nfa, index: &SpeciesIndex, prefix: &Word, gamma: f64, tau: f64) -> Result<Vec<f64>, SimError> {
    let t = 3.0 * prefix.len() as f64 * tau;
    let x = trace.at(t)?;
    let reach: StateSet = nfa.reachable(prefix).map_err(|e| SimError::Config(e.to_string()))?;
    Ok((0..nfa.num_states())
        .map(|q| {
            let y = x[index.y[q]];
            if reach.contains(q) {
                y - (1.0 - gamma)
            } else {
                gamma - y
            }
        })
        .collect())
}

pub fn check_phi(trace: &Trace, nfa: &Nfa, index: &SpeciesIndex, prefix: &Word, gamma: f64, tau: f64) -> Result<bool, SimError> {
    Ok(phi_margins(trace, nfa, index, prefix, gamma, tau)?.iter().all(|&m| m >= 0.0))
}
