//! One verified run: compile, encode, perturb, integrate, decide, and compare
//! both the final reading and every prefix invariant against the automaton.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{check_constraints, CheckOptions, ConstraintReport, ParamError, ParameterSet};
use crate::nfa::{Nfa, NfaError};
use crate::perturb::{perturb_initial, perturb_rates, InitialMode, ObservationScheme, PerturbError, PerturbationProfile};
use crate::signal::{encode, validate, InputSignal, Shape, SignalError, SignalSpec};
use crate::simulate::{decide, integrate, phi_margins, Decision, SimConfig, SimError, Trace, Verdict};
use crate::translate::{translate, SizeReport, TranslateError, TranslationOutput};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("parse: {0}")]
    Parse(#[from] NfaError),
    #[error("parameters: {0}")]
    Params(#[from] ParamError),
    #[error("parameters fail {0:?}; pass force to run anyway")]
    Unchecked(Vec<String>),
    #[error("translate: {0}")]
    Translate(#[from] TranslateError),
    #[error("encode: {0}")]
    Signal(#[from] SignalError),
    #[error("perturb: {0}")]
    Perturb(#[from] PerturbError),
    #[error("simulate: {0}")]
    Simulate(#[from] SimError),
    #[error("manifest: {0}")]
    Manifest(String),
}

fn exact() -> ObservationScheme {
    ObservationScheme::exact()
}

fn trapezoid() -> Shape {
    Shape::Trapezoid
}

/// Everything a run depends on besides the automaton.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub word: String,
    pub params: ParameterSet,
    #[serde(default = "PerturbationProfile::none")]
    pub perturbation: PerturbationProfile,
    /// Unset means the nominal initial state.
    #[serde(default)]
    pub initial: Option<InitialMode>,
    #[serde(default = "exact")]
    pub observation: ObservationScheme,
    /// Unset means defaults integrated to `(3n + 2)τ`.
    #[serde(default)]
    pub sim: Option<SimConfig>,
    #[serde(default = "trapezoid")]
    pub shape: Shape,
    /// Master seed; the rate, initial-state and observation streams derive from it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub force: bool,
    #[serde(default)]
    pub check: CheckOptions,
}

impl RunSpec {
    pub fn new(word: impl Into<String>, params: ParameterSet) -> Self {
        RunSpec {
            word: word.into(),
            params,
            perturbation: PerturbationProfile::none(),
            initial: None,
            observation: ObservationScheme::exact(),
            sim: None,
            shape: Shape::Trapezoid,
            seed: 0,
            force: false,
            check: CheckOptions::default(),
        }
    }

    fn seeds(&self) -> (u64, u64, u64) {
        let s = self.seed;
        (s, s ^ 0x9e37_79b9_7f4a_7c15, s.wrapping_mul(0xbf58_476d_1ce4_e5b9).wrapping_add(1))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot_data: Option<PathBuf>,
}

/// A run on disk: relative paths resolve against the manifest's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub nfa: PathBuf,
    #[serde(flatten)]
    pub spec: RunSpec,
    #[serde(default)]
    pub outputs: OutputPaths,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Manifest(format!("{}: {e}", path.display())))?;
        let mut m: RunManifest = serde_json::from_str(&text).map_err(|e| PipelineError::Manifest(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut m.nfa);
        for p in [&mut m.outputs.report, &mut m.outputs.trace, &mut m.outputs.plot_data].into_iter().flatten() {
            resolve(p);
        }
        m.spec.params.validate()?;
        if !m.nfa.is_file() {
            return Err(PipelineError::Manifest(format!("automaton file {} does not exist", m.nfa.display())));
        }
        Ok(m)
    }

    pub fn load_nfa(&self) -> Result<Nfa, PipelineError> {
        Ok(Nfa::load(&self.nfa)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignalSummary {
    pub admissible: bool,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Oracle {
    pub reachable: Vec<String>,
    pub accepts: bool,
}

/// The invariant at the boundary `3kτ` after the prefix of length `k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiCheck {
    pub k: usize,
    pub time: f64,
    pub holds: bool,
    pub min_margin: f64,
}

/// Correct observed verdicts on a grid over `[(3n + 1)τ, t_end]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Maintenance {
    pub from: f64,
    pub to: f64,
    pub samples: usize,
    pub holds: bool,
    pub first_failure: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Conservation {
    pub max_error: f64,
    pub total_min: f64,
    pub total_max: f64,
    /// Every initial total lies in `[1 − ε, 1 + 2ε]`.
    pub in_band: bool,
}

/// Deterministic summary; contains no timings or host data.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub word: String,
    pub seed: u64,
    pub params: ParameterSet,
    pub constraints: ConstraintReport,
    pub forced: bool,
    pub perturbation: PerturbationProfile,
    pub initial: Option<InitialMode>,
    pub observation: ObservationScheme,
    pub size: SizeReport,
    pub signal: SignalSummary,
    pub t_end: f64,
    pub steps: usize,
    pub decision: Decision,
    pub oracle: Oracle,
    pub phi: Vec<PhiCheck>,
    pub maintenance: Maintenance,
    pub conservation: Conservation,
    pub verified: bool,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub struct RunOutcome {
    pub report: RunReport,
    pub trace: Trace,
    pub translation: TranslationOutput,
    pub signal: InputSignal,
}

/// Samples per phase in the maintenance window.
const MAINTENANCE_SAMPLES_PER_PHASE: usize = 50;

pub fn run_end_to_end(nfa: &Nfa, spec: &RunSpec) -> Result<RunOutcome, PipelineError> {
    let p = &spec.params;
    p.validate()?;
    let constraints = check_constraints(p, &spec.check);
    if !constraints.pass && !spec.force {
        return Err(PipelineError::Unchecked(constraints.violated().map(|e| e.name.clone()).collect()));
    }
    let (rate_seed, init_seed, obs_seed) = spec.seeds();

    let word = nfa.parse_word(&spec.word)?;
    let n = word.len();
    let out = translate(nfa, p.rates())?;
    let sig_spec = SignalSpec::new(word.clone(), p.epsilon, p.tau)?.with_shape(spec.shape);
    let signal = encode(&sig_spec, nfa.alphabet())?;
    let admissibility = validate(&signal, &sig_spec, nfa.num_symbols());

    let profile = PerturbationProfile { seed: rate_seed, ..spec.perturbation.clone() };
    let brn = perturb_rates(&out.brn, &profile)?;
    let x0 = match spec.initial {
        None => out.initial.clone(),
        Some(mode) => perturb_initial(&out.initial, p.epsilon, mode, init_seed),
    };

    let config = spec.sim.unwrap_or_else(|| SimConfig::new((3 * n + 2) as f64 * p.tau));
    let trace = integrate(&brn, &x0, &signal, &config)?;
    let t_end = trace.t_end();

    let scheme = ObservationScheme { seed: obs_seed, ..spec.observation };
    let decision = decide(&trace, nfa, &out.index, &word, p.tau, &mut scheme.observer(), t_end)?;
    let reach = nfa.reachable(&word)?;
    let oracle = Oracle { reachable: nfa.state_names(&reach), accepts: nfa.accepts(&word)? };

    let mut phi = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let margins = phi_margins(&trace, nfa, &out.index, &word.prefix(k), p.gamma, p.tau)?;
        let min_margin = margins.iter().cloned().fold(f64::INFINITY, f64::min);
        phi.push(PhiCheck { k, time: 3.0 * k as f64 * p.tau, holds: min_margin >= 0.0, min_margin });
    }

    let from = (3 * n + 1) as f64 * p.tau;
    let samples = (((t_end - from) / p.tau).max(0.0) * MAINTENANCE_SAMPLES_PER_PHASE as f64).ceil() as usize + 1;
    let mut observer = ObservationScheme { seed: obs_seed.wrapping_add(1), ..spec.observation }.observer();
    let mut first_failure = None;
    for i in 0..samples {
        let t = if samples == 1 { t_end } else { from + (t_end - from) * i as f64 / (samples - 1) as f64 };
        let x = trace.at(t)?;
        let ok = (0..nfa.num_states()).all(|q| {
            let v = Verdict::of(observer.observe(x[out.index.y[q]]));
            v == if reach.contains(q) { Verdict::InSet } else { Verdict::NotInSet }
        });
        if !ok {
            first_failure = Some(t);
            break;
        }
    }
    let maintenance = Maintenance { from, to: t_end, samples, holds: first_failure.is_none(), first_failure };

    let x = x0.as_slice();
    let totals: Vec<f64> = (0..nfa.num_states()).flat_map(|q| [x[out.index.y[q]] + x[out.index.y_bar[q]], x[out.index.z[q]] + x[out.index.z_bar[q]]]).collect();
    let (lo, hi) = p.total_band();
    let total_min = totals.iter().cloned().fold(f64::INFINITY, f64::min);
    let total_max = totals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let conservation = Conservation {
        max_error: trace.max_conservation_error(&out.index),
        total_min,
        total_max,
        in_band: total_min >= lo && total_max <= hi,
    };

    let verified = decision.correct() && decision.accept == Some(oracle.accepts) && phi.iter().all(|c| c.holds) && maintenance.holds;
    let report = RunReport {
        word: spec.word.clone(),
        seed: spec.seed,
        params: *p,
        constraints,
        forced: spec.force,
        perturbation: profile,
        initial: spec.initial,
        observation: scheme,
        size: out.size.clone(),
        signal: SignalSummary { admissible: admissibility.admissible(), violations: admissibility.violations.len() },
        t_end,
        steps: trace.steps,
        decision,
        oracle,
        phi,
        maintenance,
        conservation,
        verified,
    };
    Ok(RunOutcome { report, trace, translation: out, signal })
}
