//! Compile nondeterministic finite automata into mass-action reaction networks
//! that simulate them robustly, drive them with input signals, and analyse the
//! constraints under which the simulation is correct.

pub mod analysis;
pub mod brn;
pub mod corpus;
pub mod nfa;
pub mod ode;
pub mod perturb;
pub mod pipeline;
pub mod signal;
pub mod simulate;
pub mod translate;

pub use brn::{Brn, BrnError, ConcState, RateFn, Reaction, ReactionFamily, Species, SpeciesKind};
pub use nfa::{Nfa, NfaError, StateSet, Word};
pub use translate::{translate, Rates, SizeReport, SpeciesIndex, TranslateError, TranslationOutput};
pub use signal::{encode, validate, AdmissibilityReport, InputSignal, PhaseRole, Shape, SignalSpec, Waveform};
pub use perturb::{perturb_initial, perturb_rates, Adversary, InitialMode, ObservationMode, ObservationScheme, Observer, PerturbationProfile};
pub use simulate::{check_phi, decide, integrate, Decision, Method, SimConfig, SimError, StateVerdict, Trace, Verdict};
pub use pipeline::{run_end_to_end, PipelineError, RunManifest, RunOutcome, RunReport, RunSpec};
pub use analysis::{check_constraints, plan_parameters, ParameterSet, Plan, PlanRequest};
