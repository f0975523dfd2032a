use std::sync::OnceLock;

use proptest::prelude::*;

use crnfa::analysis::{am_equilibria, am_travel_time, check_constraints, AmParams, CheckOptions, Variant};
use crnfa::brn::ConcState;
use crnfa::corpus::random_nfa;
use crnfa::nfa::second_to_last_one;
use crnfa::perturb::{perturb_initial, Adversary, InitialMode, ObservationMode, ObservationScheme, PerturbationProfile};
use crnfa::signal::{encode, validate, SignalSpec};
use crnfa::simulate::{integrate, SimConfig};
use crnfa::translate::{translate, verify_catalyst_property, Rates, SizeReport};
use crnfa::{perturb_rates, plan_parameters, Nfa, ParameterSet, PlanRequest, Word};

fn planned() -> &'static ParameterSet {
    static PLAN: OnceLock<ParameterSet> = OnceLock::new();
    PLAN.get_or_init(|| {
        let req = PlanRequest { tau_budget: Some(10.0), ..PlanRequest::new(5, 1e-3, 0.05, 1e-4) };
        let plan = plan_parameters(&req).unwrap();
        assert!(plan.feasible);
        plan.params
    })
}

fn word(nfa: &Nfa, raw: &[usize]) -> Word {
    Word(raw.iter().map(|a| a % nfa.num_symbols()).collect())
}

/// Classic RK4 on a scalar field, returning every step.
fn rk4(f: impl Fn(f64) -> f64, u0: f64, t: f64, n: usize) -> Vec<f64> {
    let h = t / n as f64;
    let mut u = u0;
    let mut out = vec![u];
    for _ in 0..n {
        let k1 = f(u);
        let k2 = f(u + 0.5 * h * k1);
        let k3 = f(u + 0.5 * h * k2);
        let k4 = f(u + h * k3);
        u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push(u);
    }
    out
}

fn am_strategy(v: Variant) -> impl Strategy<Value = AmParams> {
    (-1.0f64..1.0, -1.0f64..1.0, 0.5f64..2.0, 0.02f64..0.9).prop_map(move |(la, lb, p, frac)| {
        let (a, b) = (10f64.powf(la), 10f64.powf(lb));
        let c = AmParams { a, b, c: 1.0, p }.leak_bound(v) * frac;
        AmParams::new(a, b, c, p).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sizes_and_catalysts(seed in any::<u64>()) {
        let nfa = random_nfa(seed, 8, 4);
        let out = translate(&nfa, Rates::uniform(2.0)).unwrap();
        prop_assert_eq!(&out.size, &SizeReport::predicted(nfa.num_states(), nfa.num_symbols(), nfa.num_transitions()));
        prop_assert!(verify_catalyst_property(&out));
        prop_assert!(out.brn.inputs_only_catalytic());
    }

    #[test]
    fn automaton_json_round_trip(seed in any::<u64>()) {
        let nfa = random_nfa(seed, 6, 3);
        prop_assert_eq!(Nfa::from_json(&nfa.to_json()).unwrap(), nfa);
    }

    #[test]
    fn conservation_and_nonnegativity(
        seed in 0u64..10_000,
        raw in prop::collection::vec(0usize..4, 0..4),
        k in prop::array::uniform4(0.1f64..5.0),
        eps in 0.001f64..0.2,
    ) {
        let nfa = random_nfa(seed, 4, 2);
        let w = word(&nfa, &raw);
        let out = translate(&nfa, Rates::new(k[0], k[1], k[2], k[3])).unwrap();
        let x0 = perturb_initial(&out.initial, eps, InitialMode::Random, seed);
        let spec = SignalSpec::new(w.clone(), eps, 1.0).unwrap();
        let signal = encode(&spec, nfa.alphabet()).unwrap();
        let brn = perturb_rates(&out.brn, &PerturbationProfile::new(0.05, Adversary::Sinusoid { omega: 3.0 }, seed)).unwrap();
        let trace = integrate(&brn, &x0, &signal, &SimConfig::new((3 * w.len() + 1) as f64)).unwrap();
        prop_assert!(trace.max_conservation_error(&out.index) <= 1e-6);
        prop_assert!(trace.min_concentration() >= 0.0);
    }

    #[test]
    fn initial_perturbation_stays_in_ball(seed in any::<u64>(), eps in 1e-4f64..0.49, worst in any::<bool>()) {
        let out = translate(&second_to_last_one(), Rates::uniform(1.0)).unwrap();
        let mode = if worst { InitialMode::WorstCaseSigned } else { InitialMode::Random };
        let x = perturb_initial(&out.initial, eps, mode, seed);
        prop_assert!(x.distance(&out.initial) < eps);
        prop_assert!(x.as_slice().iter().all(|&v| v >= 0.0));
        let _ = ConcState::new(x.as_slice().to_vec()).unwrap();
    }

    #[test]
    fn observation_within_eta(y in 0.0f64..1.1, eta in 1e-3f64..0.49, seed in any::<u64>(), uniform in any::<bool>()) {
        let mode = if uniform { ObservationMode::Uniform } else { ObservationMode::WorstCase };
        let mut obs = ObservationScheme::new(eta, mode, seed).unwrap().observer();
        for _ in 0..4 {
            prop_assert!((obs.observe(y) - y).abs() <= eta * (1.0 + 1e-12));
        }
    }

    #[test]
    fn encoded_signals_are_admissible(raw in prop::collection::vec(0usize..3, 0..5), eps in 1e-3f64..0.49, tau in 0.1f64..8.0) {
        let alphabet: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        let w = Word(raw);
        let spec = SignalSpec::new(w, eps, tau).unwrap();
        let sig = encode(&spec, &alphabet).unwrap();
        prop_assert!(validate(&sig, &spec, 3).admissible());
    }

    #[test]
    fn decay_trajectories_rise_from_above_threshold(ap in am_strategy(Variant::Decay), s in 0.0f64..1.0) {
        let eq = am_equilibria(&ap, Variant::Decay).unwrap();
        let u0 = eq.e2() + s * (eq.e3() - eq.e2());
        let path = rk4(|u| ap.drift(Variant::Decay, u), u0, 5.0, 5000);
        prop_assert!(path.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        // Above E3 the trajectory relaxes down to E3, so only min(u0, E3) is a floor.
        let high = eq.e3() + s * (ap.p - eq.e3());
        let path = rk4(|u| ap.drift(Variant::Decay, u), high, 5.0, 5000);
        prop_assert!(path.iter().all(|&u| u >= high.min(eq.e3()) - 1e-12));
    }

    #[test]
    fn growth_trajectories_fall_from_below_threshold(ap in am_strategy(Variant::Growth), s in 0.0f64..1.0) {
        let eq = am_equilibria(&ap, Variant::Growth).unwrap();
        let u0 = eq.e1() + s * (eq.e2() - eq.e1());
        let path = rk4(|u| ap.drift(Variant::Growth, u), u0, 5.0, 5000);
        prop_assert!(path.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        let low = s * eq.e1();
        let path = rk4(|u| ap.drift(Variant::Growth, u), low, 5.0, 5000);
        prop_assert!(path.iter().all(|&u| u <= low.max(eq.e1()) + 1e-12));
    }

    #[test]
    fn travel_time_lands_on_target(ap in am_strategy(Variant::Decay), s1 in 0.05f64..0.5, s2 in 0.5f64..0.95, growth in any::<bool>()) {
        let v = if growth { Variant::Growth } else { Variant::Decay };
        let ap = if growth { AmParams { c: ap.c.min(AmParams { c: 1.0, ..ap }.leak_bound(v) * 0.9), ..ap } } else { ap };
        let eq = am_equilibria(&ap, v).unwrap();
        let (u1, u2) = match v {
            Variant::Decay => (eq.e2() + s1 * (eq.e3() - eq.e2()), eq.e2() + s2 * (eq.e3() - eq.e2())),
            Variant::Growth => (eq.e1() + s2 * (eq.e2() - eq.e1()), eq.e1() + s1 * (eq.e2() - eq.e1())),
        };
        let t = am_travel_time(&eq, u1, u2).unwrap();
        prop_assert!(t > 0.0);
        let end = *rk4(|u| ap.drift(v, u), u1, t, 20_000).last().unwrap();
        prop_assert!((end - u2).abs() <= 1e-6, "landed at {end}, wanted {u2}");
        if let Variant::Decay = v {
            let further = am_travel_time(&eq, u1, 0.5 * (u2 + eq.e3())).unwrap();
            prop_assert!(further > t);
        }
    }

    #[test]
    fn constraints_weaken_as_margins_shrink(fe in 0.0f64..1.0, fd in 0.0f64..1.0) {
        let p = *planned();
        let smaller = ParameterSet { epsilon: p.epsilon * (0.05 + 0.95 * fe), delta: p.delta * fd, ..p };
        let opts = CheckOptions::default();
        prop_assert!(check_constraints(&p, &opts).pass);
        prop_assert!(check_constraints(&smaller, &opts).pass);
    }
}

#[test]
fn monotonicity_needs_the_outer_equilibrium() {
    // Starting at p > E3 the decay variant falls, so u(t) ≥ u(t0) fails there.
    let ap = AmParams::new(1.0, 1.0, 0.1, 1.0).unwrap();
    let eq = am_equilibria(&ap, Variant::Decay).unwrap();
    assert!((eq.e3() - 0.861_803_398_874_989_5).abs() < 1e-12);
    let path = rk4(|u| ap.drift(Variant::Decay, u), 0.95, 1.0, 1000);
    assert!(*path.last().unwrap() < 0.95);
    // Starting at 0 < E1* the growth variant rises.
    let eq = am_equilibria(&ap, Variant::Growth).unwrap();
    let path = rk4(|u| ap.drift(Variant::Growth, u), 0.0, 1.0, 1000);
    assert!(eq.e1() > 0.0 && *path.last().unwrap() > 0.0);
}

#[test]
fn planner_is_deterministic() {
    let req = PlanRequest { tau_budget: Some(10.0), ..PlanRequest::new(3, 1e-3, 0.05, 1e-4) };
    assert_eq!(plan_parameters(&req).unwrap(), plan_parameters(&req).unwrap());
}

#[test]
fn slack_grows_along_decreasing_margins() {
    let p = *planned();
    let opts = CheckOptions::default();
    let mut last = f64::NEG_INFINITY;
    for f in [1.0, 0.5, 0.25, 0.1, 0.01] {
        let q = ParameterSet { epsilon: p.epsilon * f, delta: p.delta * f, ..p };
        let r = check_constraints(&q, &opts);
        let least = r
            .entries
            .iter()
            .filter(|e| !["base-case", "gamma-order", "theorem-upper"].contains(&e.name.as_str()))
            .map(|e| e.normalized)
            .fold(f64::INFINITY, f64::min);
        assert!(r.pass);
        assert!(least >= last - 1e-12, "least slack fell to {least} from {last} at factor {f}");
        last = least;
    }
}
