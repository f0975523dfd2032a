use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use crnfa::analysis::{
    am_equilibria, am_travel_time, copy_bounds, copy_solution, AmParams, CheckOptions, CopyRate, GrowthTime, PBand, Variant,
};
use crnfa::corpus::{all_words, random_nfa};
use crnfa::nfa::second_to_last_one;
use crnfa::perturb::{Adversary, InitialMode, ObservationMode, ObservationScheme, PerturbationProfile};
use crnfa::signal::{encode, Shape, SignalSpec};
use crnfa::simulate::SimConfig;
use crnfa::translate::{translate, Rates};
use crnfa::{check_constraints, plan_parameters, run_end_to_end, Nfa, ParameterSet, PipelineError, PlanRequest, RunManifest, RunSpec};

/// Exit status when a run completes but does not verify, or a plan is infeasible.
const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INTEGRATOR: u8 = 3;

#[derive(Parser)]
#[command(name = "crnfa", version, about = "Compile automata into robust mass-action networks and verify them by simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Translate an automaton into its reaction network.
    Compile {
        nfa: PathBuf,
        #[command(flatten)]
        rates: RateArgs,
        #[arg(long)]
        pretty: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the input signal for a word as CSV, or as JSON when the output ends in `.json`.
    Encode {
        nfa: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        tau: f64,
        #[arg(long, value_enum, default_value_t = ShapeArg::Trapezoid)]
        shape: ShapeArg,
        /// Sample spacing; defaults to τ/100.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Search for rate constants and a phase length meeting every constraint.
    Plan {
        /// Transition count; taken from `--nfa` when omitted.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        nfa: Option<PathBuf>,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        eta: f64,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long)]
        tau_max: Option<f64>,
        /// Emit the whole plan with its constraint report instead of the parameters alone.
        #[arg(long)]
        report: bool,
        #[command(flatten)]
        check: CheckArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the slack of every constraint for a parameter file.
    Check {
        params: PathBuf,
        #[command(flatten)]
        check: CheckArgs,
        #[arg(long)]
        json: bool,
    },
    /// Integrate the network for a word and write the trace as CSV.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Output grid spacing; accepted steps when omitted.
        #[arg(long)]
        stride: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write long-format `t,species,value` rows here.
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
    /// Integrate and print the thresholded reading of every state.
    Decide {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Full verified run from a manifest, or from flags.
    Run {
        #[arg(long, conflicts_with = "nfa")]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        pretty: bool,
    },
    /// Verify the built-in example and a batch of random automata on every short word.
    VerifyCorpus {
        #[arg(long, default_value_t = 30)]
        count: usize,
        #[arg(long, default_value_t = 4)]
        q_max: usize,
        #[arg(long, default_value_t = 2)]
        s_max: usize,
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        #[arg(long, default_value_t = 5e-4)]
        eps: f64,
        #[arg(long, default_value_t = 0.05)]
        eta: f64,
        #[arg(long, default_value_t = 5e-5)]
        delta: f64,
        #[arg(long, default_value_t = 10.0)]
        tau_max: f64,
        /// Apply the planned perturbations: resonant rates, worst-case initial state and observation.
        #[arg(long)]
        robust: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Closed forms of the majority and copy dynamics.
    Analyze {
        #[command(subcommand)]
        what: Analyze,
    },
}

#[derive(Subcommand)]
enum Analyze {
    Equilibria {
        #[command(flatten)]
        am: AmArgs,
    },
    Travel {
        #[command(flatten)]
        am: AmArgs,
        #[arg(long)]
        u1: f64,
        #[arg(long)]
        u2: f64,
    },
    Copy {
        #[arg(long)]
        u0: f64,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        t: f64,
    },
}

#[derive(Args)]
struct AmArgs {
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    #[arg(long)]
    c: f64,
    #[arg(long)]
    p: f64,
    #[arg(long, value_enum, default_value_t = VariantArg::Decay)]
    variant: VariantArg,
}

#[derive(Args)]
struct RateArgs {
    /// Parameter file whose rate constants to use; overrides the individual flags.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    k1: f64,
    #[arg(long, default_value_t = 1.0)]
    k2: f64,
    #[arg(long, default_value_t = 1.0)]
    k3: f64,
    #[arg(long, default_value_t = 1.0)]
    k4: f64,
}

#[derive(Args, Clone, Copy)]
struct CheckArgs {
    /// Constant used for the copy reactions inside the copy-phase bounds.
    #[arg(long, value_enum, default_value_t = CopyRateArg::K3)]
    copy_rate: CopyRateArg,
    /// Use the growth travel time exactly as printed instead of the corrected form.
    #[arg(long)]
    printed_growth_time: bool,
    /// Evaluate total-dependent constraints only at the top of the band.
    #[arg(long)]
    upper_end_only: bool,
}

impl CheckArgs {
    fn options(&self) -> CheckOptions {
        CheckOptions {
            copy_rate: match self.copy_rate {
                CopyRateArg::K3 => CopyRate::K3,
                CopyRateArg::K2 => CopyRate::K2,
            },
            growth_time: if self.printed_growth_time { GrowthTime::AsPrinted } else { GrowthTime::Corrected },
            p_band: if self.upper_end_only { PBand::UpperEnd } else { PBand::BothEnds },
        }
    }
}

/// `--nfa`, `--params` and `--word` are checked at use so `run` can take a manifest instead.
#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    nfa: Option<PathBuf>,
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    word: Option<String>,
    #[command(flatten)]
    perturb: PerturbArgs,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    force: bool,
    #[command(flatten)]
    check: CheckArgs,
}

#[derive(Args)]
struct PerturbArgs {
    /// Rate perturbation bound.
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, value_enum, default_value_t = AdversaryArg::None)]
    adversary: AdversaryArg,
    /// Angular frequency for the sinusoid adversary; one period per phase when omitted.
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long, value_enum, default_value_t = InitialArg::Nominal)]
    initial: InitialArg,
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    #[arg(long, value_enum, default_value_t = ObsArg::None)]
    obs_mode: ObsArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Trapezoid,
    Square,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Decay,
    Growth,
}

#[derive(Clone, Copy, ValueEnum)]
enum CopyRateArg {
    K3,
    K2,
}

#[derive(Clone, Copy, ValueEnum)]
enum AdversaryArg {
    None,
    Up,
    Down,
    Sinusoid,
    Piecewise,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitialArg {
    Nominal,
    Random,
    WorstCase,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObsArg {
    None,
    WorstCase,
    Uniform,
}

fn load_params(path: &Path) -> Result<ParameterSet> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ParameterSet::from_json(&text)?)
}

fn load_nfa(path: &Path) -> Result<Nfa> {
    Ok(Nfa::load(path)?)
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    let mut w = sink(path)?;
    w.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

impl RunArgs {
    fn nfa(&self) -> Result<Nfa> {
        load_nfa(self.nfa.as_deref().context("--nfa is required")?)
    }

    fn spec(&self) -> Result<RunSpec> {
        let params = load_params(self.params.as_deref().context("--params is required")?)?;
        let word = self.word.clone().context("--word is required")?;
        let mut spec = RunSpec::new(word.clone(), params);
        let pa = &self.perturb;
        let adversary = match pa.adversary {
            AdversaryArg::None => Adversary::None,
            AdversaryArg::Up => Adversary::ConstantOffset { sign: 1.0 },
            AdversaryArg::Down => Adversary::ConstantOffset { sign: -1.0 },
            AdversaryArg::Sinusoid => pa.omega.map_or(Adversary::resonant(params.tau), |omega| Adversary::Sinusoid { omega }),
            AdversaryArg::Piecewise => Adversary::PiecewiseLinear {
                spacing: params.tau / 7.0,
                horizon: self.t_end.unwrap_or((3 * word.len() + 2) as f64 * params.tau),
            },
        };
        spec.perturbation = PerturbationProfile::new(pa.delta, adversary, pa.seed);
        spec.initial = match pa.initial {
            InitialArg::Nominal => None,
            InitialArg::Random => Some(InitialMode::Random),
            InitialArg::WorstCase => Some(InitialMode::WorstCaseSigned),
        };
        let mode = match pa.obs_mode {
            ObsArg::None => ObservationMode::None,
            ObsArg::WorstCase => ObservationMode::WorstCase,
            ObsArg::Uniform => ObservationMode::Uniform,
        };
        spec.observation = ObservationScheme::new(pa.eta, mode, pa.seed)?;
        spec.seed = pa.seed;
        spec.force = self.force;
        spec.check = self.check.options();
        spec.sim = self.t_end.map(SimConfig::new);
        Ok(spec)
    }
}

/// Exit status for a verified or unverified report.
fn verdict_code(verified: bool) -> u8 {
    if verified {
        0
    } else {
        EXIT_MISMATCH
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Compile { nfa, rates, pretty, output } => {
            let nfa = load_nfa(&nfa)?;
            let r = match &rates.params {
                Some(p) => load_params(p)?.rates(),
                None => Rates::new(rates.k1, rates.k2, rates.k3, rates.k4),
            };
            let out = translate(&nfa, r)?;
            let text = if pretty { out.brn.pretty() } else { out.to_json() };
            emit(output.as_deref(), &text)?;
            Ok(0)
        }
        Command::Encode { nfa, word, eps, tau, shape, dt, output } => {
            let nfa = load_nfa(&nfa)?;
            let w = nfa.parse_word(&word)?;
            let shape = match shape {
                ShapeArg::Trapezoid => Shape::Trapezoid,
                ShapeArg::Square => Shape::Square,
            };
            let spec = SignalSpec::new(w, eps, tau)?.with_shape(shape);
            let signal = encode(&spec, nfa.alphabet())?;
            let dt = dt.unwrap_or(tau / 100.0);
            let t_end = (3 * spec.n() + 2) as f64 * tau;
            match output {
                Some(p) => signal.save(&p, dt, t_end)?,
                None => {
                    let mut w = sink(None)?;
                    signal.write_csv(&mut w, dt, t_end)?;
                    w.flush()?;
                }
            }
            Ok(0)
        }
        Command::Plan { d, nfa, eps, eta, delta, tau_max, report, check, output } => {
            let d = match (d, nfa) {
                (Some(d), _) => d,
                (None, Some(p)) => load_nfa(&p)?.num_transitions(),
                (None, None) => bail!("pass --d or --nfa"),
            };
            let req = PlanRequest { d, epsilon: eps, eta, delta, tau_budget: tau_max, options: check.options() };
            let plan = plan_parameters(&req)?;
            if !plan.feasible {
                eprintln!("infeasible: {} binds with normalized slack {:.4e}", plan.binding, plan.objective);
            }
            let text = if report { serde_json::to_string_pretty(&plan)? } else { plan.params.to_json() };
            emit(output.as_deref(), &text)?;
            Ok(verdict_code(plan.feasible))
        }
        Command::Check { params, check, json } => {
            let p = load_params(&params)?;
            let report = check_constraints(&p, &check.options());
            let text = if json { serde_json::to_string_pretty(&report)? } else { report.table() };
            emit(None, &text)?;
            Ok(verdict_code(report.pass))
        }
        Command::Simulate { run, stride, output, plot_data } => {
            let nfa = run.nfa()?;
            let spec = RunSpec { force: true, ..run.spec()? };
            let outcome = run_end_to_end(&nfa, &spec)?;
            let mut w = sink(output.as_deref())?;
            outcome.trace.write_csv(&mut w, stride)?;
            w.flush()?;
            if let Some(p) = plot_data {
                let f = BufWriter::new(File::create(&p).with_context(|| format!("creating {}", p.display()))?);
                outcome.trace.write_plot_data(f, stride.unwrap_or(spec.params.tau / 50.0))?;
            }
            Ok(0)
        }
        Command::Decide { run } => {
            let nfa = run.nfa()?;
            let outcome = run_end_to_end(&nfa, &run.spec()?)?;
            emit(None, &serde_json::to_string_pretty(&outcome.report.decision)?)?;
            Ok(verdict_code(outcome.report.decision.correct()))
        }
        Command::Run { manifest, run, pretty } => {
            let (nfa, spec, outputs) = match manifest {
                Some(m) => {
                    let m = RunManifest::load(&m)?;
                    (m.load_nfa()?, m.spec, m.outputs)
                }
                None => (run.nfa()?, run.spec()?, Default::default()),
            };
            let outcome = run_end_to_end(&nfa, &spec)?;
            let report = &outcome.report;
            let text = if pretty { report.to_json() } else { serde_json::to_string(report)? };
            if let Some(p) = &outputs.trace {
                outcome.trace.write_csv(BufWriter::new(File::create(p)?), None)?;
            }
            if let Some(p) = &outputs.plot_data {
                outcome.trace.write_plot_data(BufWriter::new(File::create(p)?), spec.params.tau / 50.0)?;
            }
            emit(outputs.report.as_deref(), &text)?;
            if outputs.report.is_some() {
                emit(None, &json!({ "verified": report.verified, "seed": report.seed }).to_string())?;
            }
            Ok(verdict_code(report.verified))
        }
        Command::VerifyCorpus { count, q_max, s_max, max_len, eps, eta, delta, tau_max, robust, seed } => {
            let mut corpus = vec![("example".to_string(), second_to_last_one())];
            corpus.extend((0..count as u64).map(|i| (format!("random-{}", seed + i), random_nfa(seed + i, q_max, s_max))));
            let results: Vec<Result<serde_json::Value>> = corpus
                .par_iter()
                .map(|(name, nfa)| -> Result<serde_json::Value> {
                    let req = PlanRequest { tau_budget: Some(tau_max), ..PlanRequest::new(nfa.num_transitions(), eps, eta, delta) };
                    let plan = plan_parameters(&req)?;
                    if !plan.feasible {
                        return Ok(json!({ "nfa": name, "feasible": false, "binding": plan.binding }));
                    }
                    let mut failures = Vec::new();
                    let words = all_words(nfa.num_symbols(), max_len);
                    for w in &words {
                        let mut spec = RunSpec::new(nfa.format_word(w), plan.params);
                        if robust {
                            spec.perturbation = PerturbationProfile::new(plan.params.delta, Adversary::resonant(plan.params.tau), 0);
                            spec.initial = Some(InitialMode::WorstCaseSigned);
                            spec.observation = ObservationScheme::new(eta, ObservationMode::WorstCase, 0)?;
                        }
                        let r = run_end_to_end(nfa, &spec)?.report;
                        if !r.verified {
                            failures.push(spec.word);
                        }
                    }
                    Ok(json!({ "nfa": name, "feasible": true, "words": words.len(), "failures": failures }))
                })
                .collect();
            let results: Vec<serde_json::Value> = results.into_iter().collect::<Result<_>>()?;
            let ok = results.iter().all(|r| r["feasible"] == true && r["failures"].as_array().is_some_and(|f| f.is_empty()));
            emit(None, &serde_json::to_string_pretty(&json!({ "verified": ok, "robust": robust, "results": results }))?)?;
            Ok(verdict_code(ok))
        }
        Command::Analyze { what } => {
            let value = match what {
                Analyze::Equilibria { am } => serde_json::to_value(am_equilibria(&am.params()?, am.variant())?)?,
                Analyze::Travel { am, u1, u2 } => {
                    let eq = am_equilibria(&am.params()?, am.variant())?;
                    json!({ "equilibria": eq, "u1": u1, "u2": u2, "time": am_travel_time(&eq, u1, u2)? })
                }
                Analyze::Copy { u0, a, b, p, t } => {
                    json!({ "value": copy_solution(u0, a, b, p, t)?, "bounds": copy_bounds(a, b, p, t)? })
                }
            };
            emit(None, &serde_json::to_string_pretty(&value)?)?;
            Ok(0)
        }
    }
}

impl AmArgs {
    fn params(&self) -> Result<AmParams> {
        Ok(AmParams::new(self.a, self.b, self.c, self.p)?)
    }

    fn variant(&self) -> Variant {
        match self.variant {
            VariantArg::Decay => Variant::Decay,
            VariantArg::Growth => Variant::Growth,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let integrator = matches!(
                e.downcast_ref::<PipelineError>(),
                Some(PipelineError::Simulate(crnfa::SimError::Ode(_)))
            );
            ExitCode::from(if integrator { EXIT_INTEGRATOR } else { EXIT_USAGE })
        }
    }
}
