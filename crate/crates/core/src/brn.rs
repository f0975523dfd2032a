//! Reaction networks under deterministic mass-action semantics, with
//! constant or time-varying rate constants.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BrnError {
    #[error("reaction {0}: reactant and product vectors are equal")]
    NoNetEffect(String),
    #[error("reaction {reaction}: rate is not strictly positive (minimum {min})")]
    NonPositiveRate { reaction: String, min: f64 },
    #[error("species index {0} out of range")]
    UnknownSpecies(usize),
    #[error("unknown species `{0}`")]
    UnknownSpeciesName(String),
    #[error("duplicate species `{0}`")]
    DuplicateSpecies(String),
    #[error("negative concentration {value} for species {index}")]
    NegativeConcentration { index: usize, value: f64 },
    #[error("state has {got} entries, network has {want} species")]
    Dimension { got: usize, want: usize },
    #[error("invalid network JSON: {0}")]
    Json(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpeciesKind {
    State,
    Portal,
    DualState,
    DualPortal,
    InputSymbol,
    InputReset,
    InputCopy,
    Plain,
}

impl SpeciesKind {
    pub fn is_input(self) -> bool {
        matches!(self, SpeciesKind::InputSymbol | SpeciesKind::InputReset | SpeciesKind::InputCopy)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Species {
    pub name: String,
    pub kind: SpeciesKind,
    /// The automaton state or symbol this species stands for.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub of: Option<String>,
}

impl Species {
    pub fn new(name: impl Into<String>, kind: SpeciesKind) -> Self {
        Species { name: name.into(), kind, of: None }
    }

    pub fn representing(name: impl Into<String>, kind: SpeciesKind, of: impl Into<String>) -> Self {
        Species { name: name.into(), kind, of: Some(of.into()) }
    }
}

/// A rate constant `k*(t)`, given in closed form so it can be evaluated at any `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RateFn {
    Constant { k: f64 },
    /// `k + offset`.
    Offset { k: f64, offset: f64 },
    /// `k + amplitude · sin(omega t + phase)`.
    Sinusoid { k: f64, amplitude: f64, omega: f64, phase: f64 },
    /// Linear interpolation through `(t, value)` knots, held constant outside them.
    PiecewiseLinear { k: f64, knots: Vec<(f64, f64)> },
}

impl RateFn {
    pub fn constant(k: f64) -> Self {
        RateFn::Constant { k }
    }

    /// The unperturbed constant `k`.
    pub fn nominal(&self) -> f64 {
        match *self {
            RateFn::Constant { k }
            | RateFn::Offset { k, .. }
            | RateFn::Sinusoid { k, .. }
            | RateFn::PiecewiseLinear { k, .. } => k,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, RateFn::Constant { .. } | RateFn::Offset { .. })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            RateFn::Constant { k } => *k,
            RateFn::Offset { k, offset } => k + offset,
            RateFn::Sinusoid { k, amplitude, omega, phase } => k + amplitude * (omega * t + phase).sin(),
            RateFn::PiecewiseLinear { knots, k } => piecewise_linear(knots, t).unwrap_or(*k),
        }
    }

    /// Infimum of `k*(t)` over `t ≥ 0`.
    pub fn min_value(&self) -> f64 {
        match self {
            RateFn::Constant { k } => *k,
            RateFn::Offset { k, offset } => k + offset,
            RateFn::Sinusoid { k, amplitude, .. } => k - amplitude.abs(),
            RateFn::PiecewiseLinear { k, knots } => {
                knots.iter().map(|&(_, v)| v).fold(if knots.is_empty() { *k } else { f64::INFINITY }, f64::min)
            }
        }
    }

    /// Supremum of `|k*(t) − k|` over `t ≥ 0`.
    pub fn max_deviation(&self) -> f64 {
        match self {
            RateFn::Constant { .. } => 0.0,
            RateFn::Offset { offset, .. } => offset.abs(),
            RateFn::Sinusoid { amplitude, .. } => amplitude.abs(),
            RateFn::PiecewiseLinear { k, knots } => knots.iter().map(|&(_, v)| (v - k).abs()).fold(0.0, f64::max),
        }
    }

    /// Times in `[t0, t1]` where `k*(t)` is not smooth.
    pub fn breakpoints(&self, t0: f64, t1: f64) -> Vec<f64> {
        match self {
            RateFn::PiecewiseLinear { knots, .. } => {
                knots.iter().map(|&(t, _)| t).filter(|&t| t > t0 && t < t1).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Period of an oscillating rate, if any.
    pub fn period(&self) -> Option<f64> {
        match *self {
            RateFn::Sinusoid { omega, .. } if omega != 0.0 => Some(TAU / omega.abs()),
            _ => None,
        }
    }
}

pub(crate) fn piecewise_linear(knots: &[(f64, f64)], t: f64) -> Option<f64> {
    let first = knots.first()?;
    if t <= first.0 {
        return Some(first.1);
    }
    let i = knots.partition_point(|&(kt, _)| kt <= t);
    if i >= knots.len() {
        return knots.last().map(|k| k.1);
    }
    let (t0, v0) = knots[i - 1];
    let (t1, v1) = knots[i];
    if t1 == t0 {
        return Some(v1);
    }
    Some(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
}

/// Role of a reaction in a compiled automaton network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReactionFamily {
    Reset,
    Compute,
    CopyUp,
    CopyDown,
    MajorityUp,
    MajorityDown,
}

/// `ρ = (r, p, k)`: stoichiometry as `(species, count)` pairs in display order.
#[derive(Clone, Debug, PartialEq)]
pub struct Reaction {
    reactants: Vec<(usize, u32)>,
    products: Vec<(usize, u32)>,
    delta: Vec<(usize, i64)>,
    pub rate: RateFn,
    /// Symbolic rate name, e.g. `k3`.
    pub label: Option<String>,
    pub family: Option<ReactionFamily>,
}

fn merge(side: &[(usize, u32)]) -> Vec<(usize, u32)> {
    let mut out: Vec<(usize, u32)> = Vec::new();
    for &(s, n) in side {
        if n == 0 {
            continue;
        }
        match out.iter_mut().find(|(t, _)| *t == s) {
            Some(e) => e.1 += n,
            None => out.push((s, n)),
        }
    }
    out
}

impl Reaction {
    pub fn new(reactants: &[(usize, u32)], products: &[(usize, u32)], rate: RateFn) -> Result<Self, BrnError> {
        let reactants = merge(reactants);
        let products = merge(products);
        let mut net: BTreeMap<usize, i64> = BTreeMap::new();
        for &(s, n) in &products {
            *net.entry(s).or_default() += n as i64;
        }
        for &(s, n) in &reactants {
            *net.entry(s).or_default() -= n as i64;
        }
        let delta: Vec<(usize, i64)> = net.into_iter().filter(|&(_, d)| d != 0).collect();
        let describe = || format!("{reactants:?} -> {products:?}");
        if delta.is_empty() {
            return Err(BrnError::NoNetEffect(describe()));
        }
        let min = rate.min_value();
        if !(min > 0.0) || !rate.nominal().is_finite() {
            return Err(BrnError::NonPositiveRate { reaction: describe(), min });
        }
        Ok(Reaction { reactants, products, delta, rate, label: None, family: None })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_family(mut self, family: ReactionFamily) -> Self {
        self.family = Some(family);
        self
    }

    /// Same stoichiometry, different rate function.
    pub fn with_rate(&self, rate: RateFn) -> Result<Self, BrnError> {
        let mut r = Reaction::new(&self.reactants, &self.products, rate)?;
        r.label = self.label.clone();
        r.family = self.family;
        Ok(r)
    }

    pub fn reactants(&self) -> &[(usize, u32)] {
        &self.reactants
    }

    pub fn products(&self) -> &[(usize, u32)] {
        &self.products
    }

    pub fn reactant_count(&self, s: usize) -> u32 {
        self.reactants.iter().find(|e| e.0 == s).map_or(0, |e| e.1)
    }

    pub fn product_count(&self, s: usize) -> u32 {
        self.products.iter().find(|e| e.0 == s).map_or(0, |e| e.1)
    }

    /// Nonzero entries of `Δρ = p − r`.
    pub fn net_effect_sparse(&self) -> &[(usize, i64)] {
        &self.delta
    }

    /// `Δρ = p − r` as a dense vector over `n` species.
    pub fn net_effect(&self, n: usize) -> Vec<i64> {
        let mut v = vec![0; n];
        for &(s, d) in &self.delta {
            v[s] = d;
        }
        v
    }

    /// Species with `r(Z) = p(Z) > 0`.
    pub fn catalysts(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .reactants
            .iter()
            .filter(|&&(s, n)| self.product_count(s) == n)
            .map(|&(s, _)| s)
            .collect();
        out.sort_unstable();
        out
    }

    fn max_species(&self) -> Option<usize> {
        self.reactants.iter().chain(&self.products).map(|e| e.0).max()
    }

    /// `k(t) · ∏ x(Y)^r(Y)`.
    pub fn rate_at(&self, x: &[f64], t: f64) -> f64 {
        self.rate.eval(t) * self.propensity(x)
    }

    /// `∏ x(Y)^r(Y)`, the rate without its constant.
    pub fn propensity(&self, x: &[f64]) -> f64 {
        self.reactants.iter().fold(1.0, |acc, &(s, n)| acc * x[s].powi(n as i32))
    }
}

pub fn net_effect(rxn: &Reaction, n_species: usize) -> Vec<i64> {
    rxn.net_effect(n_species)
}

pub fn catalysts(rxn: &Reaction) -> Vec<usize> {
    rxn.catalysts()
}

pub fn reaction_rate(rxn: &Reaction, state: &ConcState, t: f64) -> f64 {
    rxn.rate_at(state.as_slice(), t)
}

/// A concentration vector indexed like the network's species; all entries ≥ 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcState(Vec<f64>);

impl ConcState {
    pub fn new(values: Vec<f64>) -> Result<Self, BrnError> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(BrnError::NegativeConcentration { index, value });
        }
        Ok(ConcState(values))
    }

    pub fn zeros(n: usize) -> Self {
        ConcState(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// Sets an entry, clamping to zero from below.
    pub fn set(&mut self, i: usize, v: f64) {
        self.0[i] = v.max(0.0);
    }

    /// Max-norm distance `max_Y |x(Y) − y(Y)|`.
    pub fn distance(&self, other: &ConcState) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// `N = (S, R)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Brn {
    species: Vec<Species>,
    reactions: Vec<Reaction>,
}

#[derive(Serialize, Deserialize)]
struct ReactionJson {
    reactants: BTreeMap<String, u32>,
    products: BTreeMap<String, u32>,
    k: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family: Option<ReactionFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rate: Option<RateFn>,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct BrnJson {
    species: Vec<Species>,
    reactions: Vec<ReactionJson>,
    #[serde(default)]
    time_dependent: bool,
}

impl Brn {
    pub fn new(species: Vec<Species>, reactions: Vec<Reaction>) -> Result<Self, BrnError> {
        let mut seen = HashSet::new();
        for s in &species {
            if !seen.insert(s.name.as_str()) {
                return Err(BrnError::DuplicateSpecies(s.name.clone()));
            }
        }
        for r in &reactions {
            if let Some(m) = r.max_species().filter(|&m| m >= species.len()) {
                return Err(BrnError::UnknownSpecies(m));
            }
        }
        Ok(Brn { species, reactions })
    }

    pub fn species(&self) -> &[Species] {
        &self.species
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn num_species(&self) -> usize {
        self.species.len()
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s.name == name)
    }

    pub fn input_species(&self) -> impl Iterator<Item = usize> + '_ {
        self.species.iter().enumerate().filter(|(_, s)| s.kind.is_input()).map(|(i, _)| i)
    }

    pub fn is_time_dependent(&self) -> bool {
        self.reactions.iter().any(|r| !matches!(r.rate, RateFn::Constant { .. }))
    }

    /// Replaces every reaction's rate by `f(index, reaction)`.
    pub fn map_rates(&self, mut f: impl FnMut(usize, &Reaction) -> RateFn) -> Result<Brn, BrnError> {
        let reactions = self
            .reactions
            .iter()
            .enumerate()
            .map(|(i, r)| r.with_rate(f(i, r)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Brn { species: self.species.clone(), reactions })
    }

    /// Mass-action field `F(x, t)`, written into `out`.
    pub fn vector_field_into(&self, x: &[f64], t: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for r in &self.reactions {
            let rate = r.rate_at(x, t);
            if rate == 0.0 {
                continue;
            }
            for &(s, d) in &r.delta {
                out[s] += rate * d as f64;
            }
        }
    }

    pub fn vector_field(&self, state: &ConcState, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.species.len()];
        self.vector_field_into(state.as_slice(), t, &mut out);
        out
    }

    /// Every input species appears in each reaction either not at all or as a catalyst.
    pub fn inputs_only_catalytic(&self) -> bool {
        let inputs: Vec<usize> = self.input_species().collect();
        self.reactions.iter().all(|r| {
            inputs.iter().all(|&x| {
                let (rc, pc) = (r.reactant_count(x), r.product_count(x));
                rc == pc
            })
        })
    }

    fn side_to_string(&self, side: &[(usize, u32)]) -> String {
        if side.is_empty() {
            return "∅".to_string();
        }
        side.iter()
            .map(|&(s, n)| {
                if n == 1 {
                    self.species[s].name.clone()
                } else {
                    format!("{n}{}", self.species[s].name)
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Chemistry notation, e.g. `X_r + Z_A ->{k3} X_r + Zb_A`.
    pub fn reaction_to_string(&self, r: &Reaction) -> String {
        let label = match &r.label {
            Some(l) => l.clone(),
            None => format!("{}", r.rate.nominal()),
        };
        format!("{} ->{{{label}}} {}", self.side_to_string(&r.reactants), self.side_to_string(&r.products))
    }

    pub(crate) fn to_json_value(&self) -> BrnJson {
        let names = |side: &[(usize, u32)]| {
            side.iter().map(|&(s, n)| (self.species[s].name.clone(), n)).collect::<BTreeMap<_, _>>()
        };
        BrnJson {
            species: self.species.clone(),
            reactions: self
                .reactions
                .iter()
                .map(|r| ReactionJson {
                    reactants: names(&r.reactants),
                    products: names(&r.products),
                    k: r.rate.nominal(),
                    label: r.label.clone(),
                    family: r.family,
                    rate: (!matches!(r.rate, RateFn::Constant { .. })).then(|| r.rate.clone()),
                })
                .collect(),
            time_dependent: self.is_time_dependent(),
        }
    }

    pub(crate) fn from_json_value(j: BrnJson) -> Result<Self, BrnError> {
        let index: BTreeMap<&str, usize> = j.species.iter().enumerate().map(|(i, s)| (s.name.as_str(), i)).collect();
        let side = |m: &BTreeMap<String, u32>| {
            m.iter()
                .map(|(n, &c)| {
                    index.get(n.as_str()).map(|&i| (i, c)).ok_or_else(|| BrnError::UnknownSpeciesName(n.clone()))
                })
                .collect::<Result<Vec<_>, _>>()
        };
        // Catalysts are listed first so the display order matches the compiled form.
        let display_order = |mut v: Vec<(usize, u32)>, other: &[(usize, u32)]| {
            v.sort_by_key(|&(s, n)| {
                let cat = other.iter().any(|&(t, m)| t == s && m == n);
                (!cat, !j.species[s].kind.is_input(), std::cmp::Reverse(n), s)
            });
            v
        };
        let mut reactions = Vec::with_capacity(j.reactions.len());
        for r in &j.reactions {
            let (re, pr) = (side(&r.reactants)?, side(&r.products)?);
            let re_sorted = display_order(re.clone(), &pr);
            let pr_sorted = display_order(pr, &re);
            let rate = r.rate.clone().unwrap_or(RateFn::Constant { k: r.k });
            let mut rx = Reaction::new(&re_sorted, &pr_sorted, rate)?;
            rx.label = r.label.clone();
            rx.family = r.family;
            reactions.push(rx);
        }
        Brn::new(j.species, reactions)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("network serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, BrnError> {
        let j: BrnJson = serde_json::from_str(text).map_err(|e| BrnError::Json(e.to_string()))?;
        Brn::from_json_value(j)
    }

    /// Chemistry notation, one reaction per line.
    pub fn pretty(&self) -> String {
        self.reactions.iter().map(|r| self.reaction_to_string(r) + "\n").collect()
    }
}

impl fmt::Display for Brn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

pub fn vector_field(brn: &Brn, state: &ConcState, t: f64) -> Vec<f64> {
    brn.vector_field(state, t)
}
