//! Compiles an NFA into the mass-action network that simulates it.
//!
//! For states `Q`, alphabet `Σ` and transitions `Δ` the network has
//! `4|Q| + |Σ| + 2` species and `5|Q| + |Δ|` reactions:
//!
//! ```text
//! reset    X_r + Z_q          ->{k3} X_r + Zb_q              for q ∈ Q
//! compute  X_a + Y_s + Zb_q   ->{k1} X_a + Y_s + Z_q         for (s, a, q) ∈ Δ
//! copy     X_c + Z_q + Yb_q   ->{k2} X_c + Z_q + Y_q         for q ∈ Q
//!          X_c + Zb_q + Y_q   ->{k2} X_c + Zb_q + Yb_q
//! majority 2Y_q + Yb_q        ->{k4} 3Y_q                    for q ∈ Q
//!          2Yb_q + Y_q        ->{k4} 3Yb_q
//! ```
//!
//! Input species only ever appear as catalysts.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::brn::{Brn, BrnError, BrnJson, ConcState, RateFn, Reaction, ReactionFamily, Species, SpeciesKind};
use crate::nfa::{Nfa, StateId, StateSet, SymbolId};

#[derive(Debug, Error, PartialEq)]
pub enum TranslateError {
    #[error("rate constant {name} must be positive, got {value}")]
    NonPositiveRate { name: &'static str, value: f64 },
    #[error("species name `{0}` is produced twice")]
    NameCollision(String),
    #[error(transparent)]
    Brn(#[from] BrnError),
    #[error("network does not match the automaton: {0}")]
    Mismatch(String),
    #[error("invalid translation JSON: {0}")]
    Json(String),
}

/// The four rate constants of the construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    /// compute
    pub k1: f64,
    /// copy
    pub k2: f64,
    /// reset
    pub k3: f64,
    /// approximate majority
    pub k4: f64,
}

impl Rates {
    pub fn new(k1: f64, k2: f64, k3: f64, k4: f64) -> Self {
        Rates { k1, k2, k3, k4 }
    }

    pub fn uniform(k: f64) -> Self {
        Rates { k1: k, k2: k, k3: k, k4: k }
    }

    fn validate(&self) -> Result<(), TranslateError> {
        for (name, value) in [("k1", self.k1), ("k2", self.k2), ("k3", self.k3), ("k4", self.k4)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(TranslateError::NonPositiveRate { name, value });
            }
        }
        Ok(())
    }

    pub fn min(&self) -> f64 {
        self.k1.min(self.k2).min(self.k3).min(self.k4)
    }
}

/// Where each role lives in the species vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeciesIndex {
    pub y: Vec<usize>,
    pub y_bar: Vec<usize>,
    pub z: Vec<usize>,
    pub z_bar: Vec<usize>,
    /// `X_a` for each symbol, in alphabet order.
    pub x_symbol: Vec<usize>,
    pub x_reset: usize,
    pub x_copy: usize,
}

impl SpeciesIndex {
    /// Input species in the order symbols, reset, copy.
    pub fn inputs(&self) -> Vec<usize> {
        let mut v = self.x_symbol.clone();
        v.push(self.x_reset);
        v.push(self.x_copy);
        v
    }

    /// Recovers the role map of a compiled network from species kinds and tags.
    pub fn recover(brn: &Brn, nfa: &Nfa) -> Result<Self, TranslateError> {
        let find = |kind: SpeciesKind, of: Option<&str>| {
            brn.species()
                .iter()
                .position(|s| s.kind == kind && s.of.as_deref() == of)
                .ok_or_else(|| TranslateError::Mismatch(format!("no {kind:?} species for {of:?}")))
        };
        let per_state = |kind| {
            nfa.states().iter().map(|q| find(kind, Some(q))).collect::<Result<Vec<_>, _>>()
        };
        Ok(SpeciesIndex {
            y: per_state(SpeciesKind::State)?,
            y_bar: per_state(SpeciesKind::DualState)?,
            z: per_state(SpeciesKind::Portal)?,
            z_bar: per_state(SpeciesKind::DualPortal)?,
            x_symbol: nfa
                .alphabet()
                .iter()
                .map(|a| find(SpeciesKind::InputSymbol, Some(a)))
                .collect::<Result<_, _>>()?,
            x_reset: find(SpeciesKind::InputReset, None)?,
            x_copy: find(SpeciesKind::InputCopy, None)?,
        })
    }
}

/// Construction size, including the DNA strand-displacement strand count
/// `28q + 4d + 2s + 6`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeReport {
    pub states: usize,
    pub symbols: usize,
    pub transitions: usize,
    pub species: usize,
    pub reactions: usize,
    pub dna_strands: usize,
}

impl SizeReport {
    pub fn predicted(q: usize, s: usize, d: usize) -> Self {
        SizeReport {
            states: q,
            symbols: s,
            transitions: d,
            species: 4 * q + s + 2,
            reactions: 5 * q + d,
            dna_strands: 28 * q + 4 * d + 2 * s + 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranslationOutput {
    pub brn: Brn,
    /// Nominal initial state: `y_q = 1` on `I`, `0` elsewhere, `z_q = 0`,
    /// duals complementary, inputs 0.
    pub initial: ConcState,
    pub index: SpeciesIndex,
    pub rates: Rates,
    pub size: SizeReport,
}

#[derive(Serialize, Deserialize)]
struct TranslationJson {
    brn: BrnJson,
    initial: BTreeMap<String, f64>,
    rates: Rates,
    size_report: SizeReport,
}

pub(crate) fn symbol_species_name(symbol: &str) -> String {
    match symbol {
        "r" | "c" => format!("X_sym_{symbol}"),
        _ => format!("X_{symbol}"),
    }
}

pub fn translate(nfa: &Nfa, rates: Rates) -> Result<TranslationOutput, TranslateError> {
    rates.validate()?;
    let q = nfa.num_states();
    let states = nfa.states();

    let mut species = Vec::with_capacity(4 * q + nfa.num_symbols() + 2);
    let push_states = |species: &mut Vec<Species>, prefix: &str, kind| {
        let start = species.len();
        species.extend(states.iter().map(|s| Species::representing(format!("{prefix}_{s}"), kind, s.clone())));
        (start..start + q).collect::<Vec<_>>()
    };
    let y = push_states(&mut species, "Y", SpeciesKind::State);
    let y_bar = push_states(&mut species, "Yb", SpeciesKind::DualState);
    let z = push_states(&mut species, "Z", SpeciesKind::Portal);
    let z_bar = push_states(&mut species, "Zb", SpeciesKind::DualPortal);
    let x_start = species.len();
    species.extend(
        nfa.alphabet()
            .iter()
            .map(|a| Species::representing(symbol_species_name(a), SpeciesKind::InputSymbol, a.clone())),
    );
    let x_symbol: Vec<usize> = (x_start..species.len()).collect();
    let x_reset = species.len();
    species.push(Species::new("X_r", SpeciesKind::InputReset));
    let x_copy = species.len();
    species.push(Species::new("X_c", SpeciesKind::InputCopy));

    let mut seen = HashSet::new();
    for s in &species {
        if !seen.insert(s.name.as_str()) {
            return Err(TranslateError::NameCollision(s.name.clone()));
        }
    }

    let rx = |r: &[(usize, u32)], p: &[(usize, u32)], k: f64, label: &str, fam| {
        Reaction::new(r, p, RateFn::constant(k)).map(|x| x.with_label(label).with_family(fam))
    };
    let mut reactions = Vec::with_capacity(5 * q + nfa.num_transitions());
    for i in 0..q {
        reactions.push(rx(&[(x_reset, 1), (z[i], 1)], &[(x_reset, 1), (z_bar[i], 1)], rates.k3, "k3", ReactionFamily::Reset)?);
    }
    for (s, a, t) in nfa.transitions() {
        let xa = x_symbol[a];
        reactions.push(rx(
            &[(xa, 1), (y[s], 1), (z_bar[t], 1)],
            &[(xa, 1), (y[s], 1), (z[t], 1)],
            rates.k1,
            "k1",
            ReactionFamily::Compute,
        )?);
    }
    for i in 0..q {
        reactions.push(rx(
            &[(x_copy, 1), (z[i], 1), (y_bar[i], 1)],
            &[(x_copy, 1), (z[i], 1), (y[i], 1)],
            rates.k2,
            "k2",
            ReactionFamily::CopyUp,
        )?);
    }
    for i in 0..q {
        reactions.push(rx(
            &[(x_copy, 1), (z_bar[i], 1), (y[i], 1)],
            &[(x_copy, 1), (z_bar[i], 1), (y_bar[i], 1)],
            rates.k2,
            "k2",
            ReactionFamily::CopyDown,
        )?);
    }
    for i in 0..q {
        reactions.push(rx(&[(y[i], 2), (y_bar[i], 1)], &[(y[i], 3)], rates.k4, "k4", ReactionFamily::MajorityUp)?);
    }
    for i in 0..q {
        reactions.push(rx(&[(y_bar[i], 2), (y[i], 1)], &[(y_bar[i], 3)], rates.k4, "k4", ReactionFamily::MajorityDown)?);
    }

    let mut x0 = vec![0.0; species.len()];
    for i in 0..q {
        let on = nfa.initial().contains(i);
        x0[y[i]] = if on { 1.0 } else { 0.0 };
        x0[y_bar[i]] = if on { 0.0 } else { 1.0 };
        x0[z_bar[i]] = 1.0;
    }

    let brn = Brn::new(species, reactions)?;
    let size = SizeReport {
        species: brn.num_species(),
        reactions: brn.reactions().len(),
        ..SizeReport::predicted(q, nfa.num_symbols(), nfa.num_transitions())
    };
    Ok(TranslationOutput {
        brn,
        initial: ConcState::new(x0)?,
        index: SpeciesIndex { y, y_bar, z, z_bar, x_symbol, x_reset, x_copy },
        rates,
        size,
    })
}

/// Every input species is absent from, or a catalyst of, every reaction.
pub fn verify_catalyst_property(out: &TranslationOutput) -> bool {
    out.brn.inputs_only_catalytic()
}

impl TranslationOutput {
    /// Transitions `(s, a, q)` read back off the compute reactions.
    pub fn compute_transitions(&self) -> BTreeSet<(StateId, SymbolId, StateId)> {
        let idx = &self.index;
        self.brn
            .reactions()
            .iter()
            .filter(|r| r.family == Some(ReactionFamily::Compute))
            .filter_map(|r| {
                let cats = r.catalysts();
                let a = idx.x_symbol.iter().position(|x| cats.contains(x))?;
                let s = idx.y.iter().position(|y| cats.contains(y))?;
                let (target, _) = r.net_effect_sparse().iter().find(|&&(_, d)| d > 0)?;
                let t = idx.z.iter().position(|z| z == target)?;
                Some((s, a, t))
            })
            .collect()
    }

    /// Species appearing as reactants of each reaction family, in emission order.
    pub fn families(&self) -> Vec<(ReactionFamily, Vec<String>)> {
        let mut out: Vec<(ReactionFamily, Vec<String>)> = Vec::new();
        for r in self.brn.reactions() {
            let fam = r.family.expect("compiled reactions are tagged");
            let line = self.brn.reaction_to_string(r);
            match out.last_mut() {
                Some((f, lines)) if *f == fam => lines.push(line),
                _ => out.push((fam, vec![line])),
            }
        }
        out
    }

    pub fn state_totals(&self, x: &[f64], q: StateId) -> (f64, f64) {
        let i = &self.index;
        (x[i.y[q]] + x[i.y_bar[q]], x[i.z[q]] + x[i.z_bar[q]])
    }

    pub fn to_json(&self) -> String {
        let j = TranslationJson {
            brn: self.brn.to_json_value(),
            initial: self
                .brn
                .species()
                .iter()
                .zip(self.initial.as_slice())
                .map(|(s, &v)| (s.name.clone(), v))
                .collect(),
            rates: self.rates,
            size_report: self.size,
        };
        serde_json::to_string_pretty(&j).expect("translation serializes")
    }

    /// Reloads a compiled network; the automaton supplies the role map.
    pub fn from_json(text: &str, nfa: &Nfa) -> Result<Self, TranslateError> {
        let j: TranslationJson = serde_json::from_str(text).map_err(|e| TranslateError::Json(e.to_string()))?;
        let brn = Brn::from_json_value(j.brn)?;
        let initial = brn
            .species()
            .iter()
            .map(|s| {
                j.initial
                    .get(&s.name)
                    .copied()
                    .ok_or_else(|| TranslateError::Mismatch(format!("no initial value for {}", s.name)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let index = SpeciesIndex::recover(&brn, nfa)?;
        Ok(TranslationOutput { brn, initial: ConcState::new(initial)?, index, rates: j.rates, size: j.size_report })
    }

    /// States whose `Y_q` is initially 1.
    pub fn initial_states(&self) -> StateSet {
        self.index.y.iter().enumerate().filter(|(_, &i)| self.initial.get(i) > 0.5).map(|(q, _)| q).collect()
    }
}
