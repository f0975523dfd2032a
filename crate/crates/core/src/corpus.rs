//! Seeded random automata and word enumeration for batch verification.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::nfa::{Nfa, Word};

/// A random automaton with `1..=q_max` states and `1..=s_max` symbols. Every
/// automaton has at least one transition and one initial state.
pub fn random_nfa(seed: u64, q_max: usize, s_max: usize) -> Nfa {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = rng.gen_range(1..=q_max.max(1));
    let s = rng.gen_range(1..=s_max.max(1));
    let states: Vec<String> = (0..q).map(|i| format!("q{i}")).collect();
    let alphabet: Vec<String> = (0..s).map(|i| i.to_string()).collect();
    let density = rng.gen_range(0.2..0.6);
    let mut trans = Vec::new();
    for a in 0..q {
        for sym in 0..s {
            for b in 0..q {
                if rng.gen_bool(density) {
                    trans.push((states[a].clone(), alphabet[sym].clone(), states[b].clone()));
                }
            }
        }
    }
    if trans.is_empty() {
        let (a, sym, b) = (rng.gen_range(0..q), rng.gen_range(0..s), rng.gen_range(0..q));
        trans.push((states[a].clone(), alphabet[sym].clone(), states[b].clone()));
    }
    let mut initial: Vec<String> = states.iter().filter(|_| rng.gen_bool(0.4)).cloned().collect();
    if initial.is_empty() {
        initial.push(states[rng.gen_range(0..q)].clone());
    }
    let accepting: Vec<String> = states.iter().filter(|_| rng.gen_bool(0.4)).cloned().collect();
    Nfa::new(&states, &alphabet, &trans, &initial, &accepting).expect("generated automaton is well formed")
}

/// Every word over `symbols` symbols of length at most `max_len`, shortest first.
pub fn all_words(symbols: usize, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut layer = vec![Word::empty()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w| {
                (0..symbols).map(move |a| {
                    let mut v = w.0.clone();
                    v.push(a);
                    Word(v)
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}
