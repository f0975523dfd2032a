//! Search for rate constants and a phase length that satisfy every constraint
//! with margin.
//!
//! `γ` is pinned just under `⅓ − η`. The search runs over `k1`, a shared
//! `k2 = k3`, `k4`, `τ`, and the position of `γ*` inside `(ε, γ)`, and it
//! maximizes the least normalized slack. It starts with a coarse log grid and
//! then takes compass steps from the best grid points. The result is deterministic.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::constraints::{check_constraints, CheckOptions, ConstraintReport};
use super::params::ParameterSet;

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("{name} must lie in {range}, got {value}")]
    Range { name: &'static str, range: &'static str, value: f64 },
    #[error("transition count must be positive")]
    NoTransitions,
}

/// Margin kept between `γ` and `⅓ − η` so the theorem bounds survive rounding.
pub const GAMMA_MARGIN: f64 = 1e-9;

/// Entries fixed by `(ε, η, γ)` alone; they do not steer the search.
const FIXED: [&str; 3] = ["base-case", "theorem-upper", "theorem-lower"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Plan {
    pub feasible: bool,
    pub params: ParameterSet,
    /// Least normalized slack over the searched constraints.
    pub objective: f64,
    /// Entry with the least normalized slack.
    pub binding: String,
    pub report: ConstraintReport,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanRequest {
    pub d: usize,
    pub epsilon: f64,
    pub eta: f64,
    pub delta: f64,
    pub tau_budget: Option<f64>,
    pub options: CheckOptions,
}

impl PlanRequest {
    pub fn new(d: usize, epsilon: f64, eta: f64, delta: f64) -> Self {
        PlanRequest { d, epsilon, eta, delta, tau_budget: None, options: CheckOptions::default() }
    }
}

/// Searched decades for every rate constant and for `τ`.
const LOG_K_MIN: f64 = -4.0;
const LOG_K_MAX: f64 = 5.0;

/// `[log10 k1, log10 k23, log10 k4, log10 τ, γ* fraction]`.
type Point = [f64; 5];

struct Space<'a> {
    req: &'a PlanRequest,
    gamma: f64,
    log_tau_max: f64,
}

impl Space<'_> {
    fn params(&self, x: &Point) -> ParameterSet {
        let r = self.req;
        let k23 = 10f64.powf(x[1]);
        ParameterSet {
            epsilon: r.epsilon,
            eta: r.eta,
            delta: r.delta,
            tau: 10f64.powf(x[3].min(self.log_tau_max)),
            gamma: self.gamma,
            gamma_star: r.epsilon + x[4] * (self.gamma - r.epsilon),
            k1: 10f64.powf(x[0]),
            k2: k23,
            k3: k23,
            k4: 10f64.powf(x[2]),
            d: r.d,
        }
    }

    fn objective(&self, x: &Point) -> f64 {
        let rates_in_range = x[..3].iter().all(|v| (LOG_K_MIN..=LOG_K_MAX).contains(v));
        if !rates_in_range || x[4] <= 0.0 || x[4] >= 1.0 || x[3] < LOG_K_MIN || x[3] > self.log_tau_max + 1e-12 {
            return f64::NEG_INFINITY;
        }
        score(&check_constraints(&self.params(x), &self.req.options))
    }
}

fn score(report: &ConstraintReport) -> f64 {
    report
        .entries
        .iter()
        .filter(|e| !FIXED.contains(&e.name.as_str()))
        .map(|e| e.normalized)
        .fold(f64::INFINITY, f64::min)
}

fn compass(space: &Space, start: Point, start_f: f64) -> (Point, f64) {
    let mut x = start;
    let mut f = start_f;
    let mut step = [0.25, 0.25, 0.25, 0.125, 0.05];
    for _ in 0..4000 {
        if step.iter().all(|&s| s < 1e-5) {
            break;
        }
        let mut improved = false;
        for i in 0..5 {
            for sign in [1.0, -1.0] {
                let mut y = x;
                y[i] += sign * step[i];
                let fy = space.objective(&y);
                if fy > f {
                    x = y;
                    f = fy;
                    improved = true;
                }
            }
        }
        if !improved {
            for s in &mut step {
                *s *= 0.5;
            }
        }
    }
    (x, f)
}

fn range(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

pub fn plan_parameters(req: &PlanRequest) -> Result<Plan, PlanError> {
    let open = |name, v: f64| {
        if v > 0.0 && v < 0.5 {
            Ok(())
        } else {
            Err(PlanError::Range { name, range: "(0, 1/2)", value: v })
        }
    };
    open("epsilon", req.epsilon)?;
    open("eta", req.eta)?;
    if !(req.delta >= 0.0 && req.delta.is_finite()) {
        return Err(PlanError::Range { name: "delta", range: "[0, ∞)", value: req.delta });
    }
    if let Some(b) = req.tau_budget {
        if !(b > 0.0) {
            return Err(PlanError::Range { name: "tau_budget", range: "(0, ∞)", value: b });
        }
    }
    if req.d == 0 {
        return Err(PlanError::NoTransitions);
    }

    let gamma = 1.0 / 3.0 - req.eta - GAMMA_MARGIN;
    let log_tau_max = req.tau_budget.map_or(4.0, f64::log10);
    let space = Space { req, gamma, log_tau_max };
    if gamma <= req.epsilon {
        // γ ≥ ε and γ ≤ ⅓ − η cannot both hold; report at a nominal point.
        let params = space.params(&[0.0, 0.0, 0.0, 0.0, 0.5]);
        let params = ParameterSet { gamma: gamma.max(1e-12).min(0.49), gamma_star: gamma.max(1e-12).min(0.49) * 0.5, ..params };
        let report = check_constraints(&params, &req.options);
        return Ok(Plan { feasible: false, params, objective: f64::NEG_INFINITY, binding: "base-case".into(), report });
    }

    let fracs = [0.5, 0.7, 0.8, 0.85, 0.9, 0.95];
    let mut grid: Vec<Point> = Vec::new();
    for &a in &range(-2.0, 3.0, 0.5) {
        for &b in &range(-1.0, 4.0, 0.5) {
            for &c in &range(-3.0, 2.0, 0.5) {
                for &t in &range(-1.0, log_tau_max, 0.25) {
                    for &f in &fracs {
                        grid.push([a, b, c, t, f]);
                    }
                }
            }
        }
    }
    let scores: Vec<f64> = grid.par_iter().map(|x| space.objective(x)).collect();
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]).then(i.cmp(&j)));

    let refined: Vec<(Point, f64)> = order.iter().take(8).collect::<Vec<_>>().par_iter().map(|&&i| compass(&space, grid[i], scores[i])).collect();
    let (best, objective) = refined
        .into_iter()
        .fold(None::<(Point, f64)>, |acc, cand| match acc {
            Some(a) if a.1 >= cand.1 => Some(a),
            _ => Some(cand),
        })
        .expect("grid is nonempty");

    let params = space.params(&best);
    let report = check_constraints(&params, &req.options);
    let binding = report
        .entries
        .iter()
        .filter(|e| !FIXED.contains(&e.name.as_str()))
        .min_by(|a, b| a.normalized.total_cmp(&b.normalized))
        .map(|e| e.name.clone())
        .unwrap_or_default();
    Ok(Plan { feasible: report.pass, params, objective, binding, report })
}
