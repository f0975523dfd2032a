//! The inequalities under which one more input symbol preserves the invariant
//! `y_q ≥ 1 − γ` on reachable states and `y_q ≤ γ` elsewhere, plus the base
//! case and the observation margins.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::am::{am_travel_time, growth_travel_time_as_printed, EquilibriumSet};
use super::params::{CopyRate, ParameterSet};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthTime {
    /// Exact solution of the growth-variant ODE.
    #[default]
    Corrected,
    /// The closed form with its third pole at `0`.
    AsPrinted,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PBand {
    /// Evaluate `p`-dependent constraints at `1 − ε` and at `1 + 2ε`.
    #[default]
    BothEnds,
    /// Only at `p = 1 + 2ε`.
    UpperEnd,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub copy_rate: CopyRate,
    pub growth_time: GrowthTime,
    pub p_band: PBand,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintEntry {
    pub name: String,
    pub satisfied: bool,
    /// `lhs − rhs` oriented so that nonnegative (positive, for strict inequalities) means satisfied.
    pub slack: f64,
    /// Slack on a comparable scale: relative for the `τ` and leak bounds, absolute otherwise.
    pub normalized: f64,
    pub detail: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub pass: bool,
    pub entries: Vec<ConstraintEntry>,
}

impl ConstraintReport {
    pub fn get(&self, name: &str) -> Option<&ConstraintEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// The entry with the least normalized slack.
    pub fn binding(&self) -> Option<&ConstraintEntry> {
        self.entries.iter().min_by(|a, b| a.normalized.total_cmp(&b.normalized))
    }

    pub fn violated(&self) -> impl Iterator<Item = &ConstraintEntry> {
        self.entries.iter().filter(|e| !e.satisfied)
    }

    /// Fixed-width slack table.
    pub fn table(&self) -> String {
        let mut s = format!("{:<22} {:>6} {:>14} {:>12}\n", "constraint", "ok", "slack", "normalized");
        for e in &self.entries {
            s.push_str(&format!(
                "{:<22} {:>6} {:>14.6e} {:>12.6}\n",
                e.name,
                if e.satisfied { "yes" } else { "NO" },
                e.slack,
                e.normalized
            ));
        }
        s.push_str(&format!("overall: {}\n", if self.pass { "pass" } else { "FAIL" }));
        s
    }
}

struct Builder {
    entries: Vec<ConstraintEntry>,
}

impl Builder {
    fn push(&mut self, name: impl Into<String>, strict: bool, slack: f64, normalized: f64, detail: &[(&str, f64)]) {
        let satisfied = if strict { slack > 0.0 } else { slack >= 0.0 };
        self.entries.push(ConstraintEntry {
            name: name.into(),
            satisfied: satisfied && slack.is_finite(),
            slack,
            normalized: if normalized.is_nan() { -1.0 } else { normalized },
            detail: detail.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        });
    }
}

/// `z0` lower bound on a predecessor's portal after the symbol phase, given
/// `y_s ≥ 1 − γ*` going in.
pub fn ih1_z0(p: &ParameterSet) -> f64 {
    let ParameterSet { epsilon: e, delta: dl, tau, k1, k3, gamma_star: gs, .. } = *p;
    let r = (k1 - dl) * (1.0 - e) * (1.0 - gs);
    1.0 - e - (k3 + dl) * e / r - (-r * tau / 3.0).exp() - 2.0 * (k3 + dl) * e * tau
}

/// `z0` upper bound on an unreachable state's portal after the reset phase.
pub fn ih2_z0(p: &ParameterSet) -> f64 {
    let ParameterSet { epsilon: e, delta: dl, tau, k1, k3, d, .. } = *p;
    let d = d as f64;
    let b = (k3 - dl) * (1.0 - e);
    2.0 * (2.0 * d * (k1 + dl) * e / b + (-b * tau / 3.0).exp()) + 2.0 * d * (k1 + dl) * e * tau
}

/// `needed` is the travel time, or the most negative ordering gap when the
/// endpoints are not between the equilibria.
fn tau_entry(b: &mut Builder, name: String, tau: f64, needed: Result<f64, f64>, eq: &EquilibriumSet) {
    match needed {
        Ok(t) => b.push(name, false, tau - t, (tau - t) / tau, &[("time", t), ("E_lo", eq.e1()), ("E_mid", eq.e2()), ("E_hi", eq.e3())]),
        Err(gap) => {
            b.push(name, false, f64::NEG_INFINITY, -1.0 + gap.min(0.0), &[("ordering_gap", gap)]);
        }
    }
}

pub fn check_constraints(p: &ParameterSet, opts: &CheckOptions) -> ConstraintReport {
    let ParameterSet { epsilon: e, eta, delta: dl, tau, gamma: g, gamma_star: gs, k1, k2, k3, k4, d } = *p;
    let mut b = Builder { entries: Vec::new() };

    b.push("base-case", false, g - e, g - e, &[]);
    b.push("theorem-upper", false, (1.0 - g) - (2.0 / 3.0 + eta), (1.0 - g) - (2.0 / 3.0 + eta), &[]);
    b.push("theorem-lower", false, (1.0 / 3.0 - eta) - g, (1.0 / 3.0 - eta) - g, &[]);
    let order = (gs - e).min(g - gs);
    b.push("gamma-order", true, order, order, &[]);
    let kmin = k1.min(k2).min(k3).min(k4);
    b.push("delta-below-rates", true, kmin - dl, (kmin - dl) / kmin, &[]);

    let ends: &[(&str, f64)] = match opts.p_band {
        PBand::BothEnds => &[("lo", 1.0 - e), ("hi", 1.0 + 2.0 * e)],
        PBand::UpperEnd => &[("hi", 1.0 + 2.0 * e)],
    };
    let c = 2.0 * e * (k2 + dl);
    for &(tag, pv) in ends {
        let (aa, bb) = (k4 - dl, k4 + dl);
        let bound = pv * pv * aa * aa / (4.0 * (aa + bb));
        let rel = (bound - c) / bound;
        b.push(format!("ih1.1@{tag}"), true, bound - c, rel, &[("c", c), ("bound", bound), ("p", pv)]);
        match p.am_high(pv) {
            Ok(eq) => {
                let (y1, y2) = (1.0 - g, 1.0 - gs);
                let gap = (eq.e3() - y2).min(y2 - y1).min(y1 - eq.e2());
                let need = am_travel_time(&eq, y1, y2).map_err(|_| gap);
                tau_entry(&mut b, format!("ih1.2@{tag}"), tau, need, &eq);
            }
            Err(_) => b.push(format!("ih1.2@{tag}"), false, f64::NEG_INFINITY, -1.0 + rel.min(0.0), &[]),
        }

        let (aa, bb) = (k4 + dl, k4 - dl);
        let bound2 = pv * pv * bb * bb / (4.0 * (aa + bb));
        let rel2 = (bound2 - c) / bound2;
        match p.am_low(pv) {
            Ok(eq) => {
                let pre = (eq.e2() - g).min(gs - eq.e1());
                b.push(format!("ih2.0@{tag}"), true, pre, pre, &[("E1*", eq.e1()), ("E2*", eq.e2()), ("leak_margin", rel2)]);
                let gap = (eq.e2() - g).min(g - gs).min(gs - eq.e1());
                let need = match opts.growth_time {
                    GrowthTime::Corrected => am_travel_time(&eq, g, gs),
                    GrowthTime::AsPrinted => growth_travel_time_as_printed(&eq, g, gs),
                }
                .map_err(|_| gap);
                tau_entry(&mut b, format!("ih2.1@{tag}"), tau, need, &eq);
            }
            Err(_) => {
                b.push(format!("ih2.0@{tag}"), true, rel2, -1.0 + rel2.min(0.0), &[("leak_margin", rel2)]);
                b.push(format!("ih2.1@{tag}"), false, f64::NEG_INFINITY, -1.0 + rel2.min(0.0), &[]);
            }
        }
    }

    let kc = p.copy_constant(opts.copy_rate);
    let z0 = ih1_z0(p);
    let alpha = (kc - dl) * (1.0 - e) * (z0 - 2.0 * e * (kc + dl));
    let beta = (kc + dl) * (1.0 + 2.0 * e) * (1.0 + 2.0 * e + 2.0 * e * (kc + dl) - z0) + 4.0 * (k4 + dl);
    let s = alpha + beta;
    let rhs = beta / s + e + (-s * tau / 3.0).exp();
    let slack = if alpha > 0.0 { g - rhs } else { -1.0 + alpha.max(-1.0) };
    b.push("ih1.3", false, slack, slack, &[("z0", z0), ("alpha", alpha), ("beta", beta), ("rhs", rhs)]);

    let z0 = ih2_z0(p);
    let df = d as f64;
    let alpha = (kc + dl) * (1.0 + 2.0 * e) * (z0 + 4.0 * df * (k1 + dl)) * e + 4.0 * (k4 + dl);
    let beta = (kc - dl) * (1.0 - e) * (1.0 - e - z0 - 4.0 * df * (k1 + dl) * e);
    let s = alpha + beta;
    let rhs = 2.0 / s * (beta * (-s * tau / 3.0).exp() + alpha);
    let slack = if beta > 0.0 { g - rhs } else { -1.0 + beta.max(-1.0) };
    b.push("ih2.2", false, slack, slack, &[("z0", z0), ("alpha", alpha), ("beta", beta), ("rhs", rhs)]);

    let pass = b.entries.iter().all(|e| e.satisfied);
    ConstraintReport { pass, entries: b.entries }
}
