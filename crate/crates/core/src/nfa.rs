//! Nondeterministic finite automata: data model, text/JSON formats and the
//! extended transition function that every other module treats as ground truth.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a state in declaration order.
pub type StateId = usize;
/// Index of a symbol in declaration order.
pub type SymbolId = usize;

#[derive(Debug, Error, PartialEq)]
pub enum NfaError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: undeclared {kind} `{name}`")]
    Undeclared { line: usize, kind: &'static str, name: String },
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("automaton has no {0}")]
    Empty(&'static str),
    #[error("symbol `{0}` is not in the alphabet")]
    UnknownSymbol(String),
    #[error("state index {0} out of range")]
    StateOutOfRange(usize),
    #[error("invalid JSON automaton: {0}")]
    Json(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

/// A set of states, ordered by declaration index.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateSet(BTreeSet<StateId>);

impl StateSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, q: StateId) -> bool {
        self.0.contains(&q)
    }

    pub fn insert(&mut self, q: StateId) -> bool {
        self.0.insert(q)
    }

    pub fn iter(&self) -> impl Iterator<Item = StateId> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn intersects(&self, other: &StateSet) -> bool {
        self.0.intersection(&other.0).next().is_some()
    }
}

impl FromIterator<StateId> for StateSet {
    fn from_iter<I: IntoIterator<Item = StateId>>(iter: I) -> Self {
        StateSet(iter.into_iter().collect())
    }
}

/// A word over the alphabet, as symbol indices. The empty word is λ.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word(pub Vec<SymbolId>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[SymbolId] {
        &self.0
    }

    /// The prefix of length `k`.
    pub fn prefix(&self, k: usize) -> Word {
        Word(self.0[..k].to_vec())
    }
}

/// The automaton `(Q, Σ, Δ, I, F)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nfa {
    states: Vec<String>,
    alphabet: Vec<String>,
    transitions: BTreeSet<(StateId, SymbolId, StateId)>,
    initial: StateSet,
    accepting: StateSet,
}

/// JSON mirror of the line format.
#[derive(Debug, Serialize, Deserialize)]
struct NfaJson {
    states: Vec<String>,
    alphabet: Vec<String>,
    #[serde(default)]
    transitions: Vec<(String, String, String)>,
    initial: Vec<String>,
    accepting: Vec<String>,
}

fn index_of(names: &[String], kind: &'static str, line: usize) -> Result<BTreeMap<String, usize>, NfaError> {
    let mut map = BTreeMap::new();
    for (i, n) in names.iter().enumerate() {
        if map.insert(n.clone(), i).is_some() {
            return Err(if line == 0 {
                NfaError::Duplicate { kind, name: n.clone() }
            } else {
                NfaError::Syntax { line, msg: format!("duplicate {kind} `{n}`") }
            });
        }
    }
    Ok(map)
}

impl Nfa {
    /// Builds an automaton from names. Transitions are `(source, symbol, target)`.
    pub fn new<S: AsRef<str>>(
        states: &[S],
        alphabet: &[S],
        transitions: &[(S, S, S)],
        initial: &[S],
        accepting: &[S],
    ) -> Result<Self, NfaError> {
        let states: Vec<String> = states.iter().map(|s| s.as_ref().to_string()).collect();
        let alphabet: Vec<String> = alphabet.iter().map(|s| s.as_ref().to_string()).collect();
        if states.is_empty() {
            return Err(NfaError::Empty("states"));
        }
        if alphabet.is_empty() {
            return Err(NfaError::Empty("alphabet symbols"));
        }
        let qi = index_of(&states, "state", 0)?;
        let si = index_of(&alphabet, "symbol", 0)?;
        let state = |n: &str| {
            qi.get(n)
                .copied()
                .ok_or_else(|| NfaError::Undeclared { line: 0, kind: "state", name: n.to_string() })
        };
        let mut delta = BTreeSet::new();
        for (s, a, q) in transitions {
            let a = si.get(a.as_ref()).copied().ok_or_else(|| NfaError::Undeclared {
                line: 0,
                kind: "symbol",
                name: a.as_ref().to_string(),
            })?;
            delta.insert((state(s.as_ref())?, a, state(q.as_ref())?));
        }
        let initial = initial.iter().map(|s| state(s.as_ref())).collect::<Result<_, _>>()?;
        let accepting = accepting.iter().map(|s| state(s.as_ref())).collect::<Result<_, _>>()?;
        Ok(Nfa { states, alphabet, transitions: delta, initial, accepting })
    }

    /// Builds an automaton directly from indices; used by generators.
    pub fn from_indices(
        states: Vec<String>,
        alphabet: Vec<String>,
        transitions: impl IntoIterator<Item = (StateId, SymbolId, StateId)>,
        initial: StateSet,
        accepting: StateSet,
    ) -> Result<Self, NfaError> {
        if states.is_empty() {
            return Err(NfaError::Empty("states"));
        }
        if alphabet.is_empty() {
            return Err(NfaError::Empty("alphabet symbols"));
        }
        index_of(&states, "state", 0)?;
        index_of(&alphabet, "symbol", 0)?;
        let q = states.len();
        let transitions: BTreeSet<_> = transitions.into_iter().collect();
        for &(s, a, t) in &transitions {
            if s >= q || t >= q {
                return Err(NfaError::StateOutOfRange(s.max(t)));
            }
            if a >= alphabet.len() {
                return Err(NfaError::UnknownSymbol(format!("#{a}")));
            }
        }
        if let Some(bad) = initial.iter().chain(accepting.iter()).find(|&s| s >= q) {
            return Err(NfaError::StateOutOfRange(bad));
        }
        Ok(Nfa { states, alphabet, transitions, initial, accepting })
    }

    /// Parses the line-oriented format:
    ///
    /// ```text
    /// states: A B C
    /// alphabet: 0 1
    /// initial: A
    /// accepting: C
    /// trans: A 1 B
    /// ```
    pub fn parse(text: &str) -> Result<Self, NfaError> {
        let mut states: Option<(usize, Vec<String>)> = None;
        let mut alphabet: Option<(usize, Vec<String>)> = None;
        let mut initial: Option<(usize, Vec<String>)> = None;
        let mut accepting: Option<(usize, Vec<String>)> = None;
        let mut trans: Vec<(usize, Vec<String>)> = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, rest) = content.split_once(':').ok_or_else(|| NfaError::Syntax {
                line,
                msg: format!("expected `key: values`, got `{content}`"),
            })?;
            let toks: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
            let slot = match key.trim() {
                "states" => &mut states,
                "alphabet" => &mut alphabet,
                "initial" => &mut initial,
                "accepting" => &mut accepting,
                "trans" => {
                    if toks.len() != 3 {
                        return Err(NfaError::Syntax {
                            line,
                            msg: format!("`trans` takes 3 tokens, got {}", toks.len()),
                        });
                    }
                    trans.push((line, toks));
                    continue;
                }
                other => {
                    return Err(NfaError::Syntax { line, msg: format!("unknown key `{other}`") });
                }
            };
            if slot.is_some() {
                return Err(NfaError::Syntax { line, msg: format!("`{}` given twice", key.trim()) });
            }
            *slot = Some((line, toks));
        }

        let (sl, states) = states.ok_or(NfaError::Empty("`states` line"))?;
        let (al, alphabet) = alphabet.ok_or(NfaError::Empty("`alphabet` line"))?;
        if states.is_empty() {
            return Err(NfaError::Empty("states"));
        }
        if alphabet.is_empty() {
            return Err(NfaError::Empty("alphabet symbols"));
        }
        let qi = index_of(&states, "state", sl)?;
        let si = index_of(&alphabet, "symbol", al)?;
        let state = |line: usize, n: &str| {
            qi.get(n)
                .copied()
                .ok_or_else(|| NfaError::Undeclared { line, kind: "state", name: n.to_string() })
        };
        let set = |entry: Option<(usize, Vec<String>)>| -> Result<StateSet, NfaError> {
            match entry {
                None => Ok(StateSet::new()),
                Some((line, toks)) => toks.iter().map(|t| state(line, t)).collect(),
            }
        };
        let initial = set(initial)?;
        let accepting = set(accepting)?;
        let mut transitions = BTreeSet::new();
        for (line, t) in trans {
            let a = si.get(&t[1]).copied().ok_or_else(|| NfaError::Undeclared {
                line,
                kind: "symbol",
                name: t[1].clone(),
            })?;
            transitions.insert((state(line, &t[0])?, a, state(line, &t[2])?));
        }
        Ok(Nfa { states, alphabet, transitions, initial, accepting })
    }

    pub fn from_json(text: &str) -> Result<Self, NfaError> {
        let j: NfaJson = serde_json::from_str(text).map_err(|e| NfaError::Json(e.to_string()))?;
        Nfa::new(&j.states, &j.alphabet, &j.transitions.iter().map(|(a, b, c)| (a.clone(), b.clone(), c.clone())).collect::<Vec<_>>(), &j.initial, &j.accepting)
    }

    pub fn to_json(&self) -> String {
        let j = NfaJson {
            states: self.states.clone(),
            alphabet: self.alphabet.clone(),
            transitions: self
                .transitions
                .iter()
                .map(|&(s, a, q)| (self.states[s].clone(), self.alphabet[a].clone(), self.states[q].clone()))
                .collect(),
            initial: self.initial.iter().map(|q| self.states[q].clone()).collect(),
            accepting: self.accepting.iter().map(|q| self.states[q].clone()).collect(),
        };
        serde_json::to_string_pretty(&j).expect("automaton serializes")
    }

    /// Reads a file; `.json` selects the JSON mirror, anything else the line format.
    pub fn load(path: &Path) -> Result<Self, NfaError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| NfaError::Io { path: path.display().to_string(), msg: e.to_string() })?;
        if path.extension().is_some_and(|e| e == "json") {
            Nfa::from_json(&text)
        } else {
            Nfa::parse(&text)
        }
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn transitions(&self) -> impl Iterator<Item = (StateId, SymbolId, StateId)> + '_ {
        self.transitions.iter().copied()
    }

    pub fn initial(&self) -> &StateSet {
        &self.initial
    }

    pub fn accepting(&self) -> &StateSet {
        &self.accepting
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_symbols(&self) -> usize {
        self.alphabet.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn state_index(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name)
    }

    pub fn symbol_index(&self, name: &str) -> Option<SymbolId> {
        self.alphabet.iter().position(|s| s == name)
    }

    /// `Δ(q, a)`.
    pub fn step(&self, q: StateId, a: SymbolId) -> StateSet {
        self.transitions
            .range((q, a, 0)..=(q, a, usize::MAX))
            .map(|&(_, _, r)| r)
            .collect()
    }

    /// Parses a word. Tokens may be separated by whitespace or commas; a
    /// separator-free string is split into characters when every symbol is
    /// a single character. The empty string is λ.
    pub fn parse_word(&self, text: &str) -> Result<Word, NfaError> {
        let text = text.trim();
        if text.is_empty() || text == "λ" {
            return Ok(Word::empty());
        }
        let lookup = |t: &str| self.symbol_index(t).ok_or_else(|| NfaError::UnknownSymbol(t.to_string()));
        if text.contains(|c: char| c.is_whitespace() || c == ',') {
            return text
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(lookup)
                .collect::<Result<Vec<_>, _>>()
                .map(Word);
        }
        if let Some(a) = self.symbol_index(text) {
            return Ok(Word(vec![a]));
        }
        if self.alphabet.iter().all(|s| s.chars().count() == 1) {
            return text
                .chars()
                .map(|c| lookup(&c.to_string()))
                .collect::<Result<Vec<_>, _>>()
                .map(Word);
        }
        Err(NfaError::UnknownSymbol(text.to_string()))
    }

    pub fn format_word(&self, w: &Word) -> String {
        let single = self.alphabet.iter().all(|s| s.chars().count() == 1);
        let toks: Vec<&str> = w.0.iter().map(|&a| self.alphabet[a].as_str()).collect();
        if single {
            toks.concat()
        } else {
            toks.join(" ")
        }
    }

    fn check_word(&self, w: &Word) -> Result<(), NfaError> {
        match w.0.iter().find(|&&a| a >= self.alphabet.len()) {
            Some(a) => Err(NfaError::UnknownSymbol(format!("#{a}"))),
            None => Ok(()),
        }
    }

    /// `Δ̂(A, w)`: `Δ̂(A, λ) = A` and `Δ̂(A, wa) = ⋃_{q ∈ Δ̂(A, w)} Δ(q, a)`.
    pub fn extended_transition(&self, start: &StateSet, w: &Word) -> Result<StateSet, NfaError> {
        self.check_word(w)?;
        if let Some(bad) = start.iter().find(|&q| q >= self.states.len()) {
            return Err(NfaError::StateOutOfRange(bad));
        }
        Ok(w.0.iter().fold(start.clone(), |current, &a| {
            current.iter().flat_map(|q| self.step(q, a).0).collect()
        }))
    }

    /// `Δ̂(I, w)`.
    pub fn reachable(&self, w: &Word) -> Result<StateSet, NfaError> {
        self.extended_transition(&self.initial, w)
    }

    pub fn accepts(&self, w: &Word) -> Result<bool, NfaError> {
        Ok(self.reachable(w)?.intersects(&self.accepting))
    }

    pub fn state_names(&self, set: &StateSet) -> Vec<String> {
        set.iter().map(|q| self.states[q].clone()).collect()
    }
}

impl fmt::Display for Nfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states: {}", self.states.join(" "))?;
        writeln!(f, "alphabet: {}", self.alphabet.join(" "))?;
        writeln!(f, "initial: {}", self.state_names(&self.initial).join(" "))?;
        writeln!(f, "accepting: {}", self.state_names(&self.accepting).join(" "))?;
        for &(s, a, q) in &self.transitions {
            writeln!(f, "trans: {} {} {}", self.states[s], self.alphabet[a], self.states[q])?;
        }
        Ok(())
    }
}

/// The three-state automaton that accepts binary strings whose second to
/// last bit is 1.
pub fn second_to_last_one() -> Nfa {
    Nfa::parse(SECOND_TO_LAST_ONE).expect("builtin automaton parses")
}

pub const SECOND_TO_LAST_ONE: &str = "\
# accepts binary strings whose second-to-last bit is 1
states: A B C
alphabet: 0 1
initial: A
accepting: C
trans: A 0 A
trans: A 1 A
trans: A 1 B
trans: B 0 C
trans: B 1 C
";
