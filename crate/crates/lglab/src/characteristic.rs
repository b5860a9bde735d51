//! Player characteristics: parametric payoff functions u(a, τ) of the own
//! action and the societal summary.
//!
//! Four closed-form families cover the games this crate works with:
//!
//! * `affine` — u(a, τ) = c\[a\] + Σ_b M\[a\]\[b\]·τ(b); params = c ++ M row-major.
//! * `quadratic_summary` — affine plus Σ_b Q\[a\]\[b\]·τ(b)²; params = c ++ M ++ Q.
//! * `routing_congestion` — u(a, τ) = −k\[a\]·τ(a); params = k. Travel times
//!   enter negated so that payoffs are always maximized.
//! * `example1` — u(a, τ) = θ + (a − τ(1))² on a two-action space; params = (θ).
//!
//! Two characteristics are equal iff family and params are bitwise equal;
//! this equality is what "same characteristic" means for symmetry.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::MixedStrategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayoffFamily {
    Affine,
    QuadraticSummary,
    RoutingCongestion,
    Example1,
}

impl PayoffFamily {
    pub fn id(&self) -> &'static str {
        match self {
            PayoffFamily::Affine => "affine",
            PayoffFamily::QuadraticSummary => "quadratic_summary",
            PayoffFamily::RoutingCongestion => "routing_congestion",
            PayoffFamily::Example1 => "example1",
        }
    }
}

/// A payoff specification u(a, τ) drawn from one of the built-in families.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Characteristic {
    pub family: PayoffFamily,
    pub params: Vec<f64>,
}

impl PartialEq for Characteristic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Characteristic {}

impl PartialOrd for Characteristic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Characteristic {
    fn cmp(&self, other: &Self) -> Ordering {
        self.family
            .cmp(&other.family)
            .then_with(|| self.params.len().cmp(&other.params.len()))
            .then_with(|| {
                for (x, y) in self.params.iter().zip(&other.params) {
                    let ord = x.total_cmp(y);
                    if ord != Ordering::Equal {
                        return ord;
                    }
                }
                Ordering::Equal
            })
    }
}

impl std::hash::Hash for Characteristic {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.family.hash(state);
        for p in &self.params {
            p.to_bits().hash(state);
        }
    }
}

impl Characteristic {
    pub fn new(family: PayoffFamily, params: Vec<f64>) -> Self {
        Characteristic { family, params }
    }

    pub fn affine(constants: Vec<f64>, matrix: Vec<Vec<f64>>) -> Self {
        let mut params = constants;
        for row in matrix {
            params.extend(row);
        }
        Characteristic::new(PayoffFamily::Affine, params)
    }

    pub fn routing_congestion(coefficients: Vec<f64>) -> Self {
        Characteristic::new(PayoffFamily::RoutingCongestion, coefficients)
    }

    pub fn example1(theta: f64) -> Self {
        Characteristic::new(PayoffFamily::Example1, vec![theta])
    }

    /// Expected parameter count for a space with `n_actions` actions.
    fn expected_params(&self, n_actions: usize) -> usize {
        match self.family {
            PayoffFamily::Affine => n_actions + n_actions * n_actions,
            PayoffFamily::QuadraticSummary => n_actions + 2 * n_actions * n_actions,
            PayoffFamily::RoutingCongestion => n_actions,
            PayoffFamily::Example1 => 1,
        }
    }

    /// Checks the parameter layout against an action-space size.
    pub fn validate_for_space(&self, n_actions: usize) -> Result<()> {
        if self.family == PayoffFamily::Example1 && n_actions != 2 {
            return Err(Error::Config(format!(
                "family example1 requires a two-action space, got {n_actions} actions"
            )));
        }
        let want = self.expected_params(n_actions);
        if self.params.len() != want {
            return Err(Error::Config(format!(
                "family {} on {n_actions} actions expects {want} params, got {}",
                self.family.id(),
                self.params.len()
            )));
        }
        if let Some((i, p)) = self
            .params
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite())
        {
            return Err(Error::Config(format!(
                "characteristic params[{i}] is not finite: {p}"
            )));
        }
        Ok(())
    }

    /// Evaluates u(a, τ). Pure and deterministic; callers must have
    /// validated the characteristic against τ's space.
    pub fn eval(&self, a: usize, tau: &MixedStrategy) -> f64 {
        self.eval_on(a, tau.probs())
    }

    /// Slice form of [`Characteristic::eval`] for hot loops that keep
    /// summaries as raw count/probability buffers.
    pub(crate) fn eval_on(&self, a: usize, t: &[f64]) -> f64 {
        let n = t.len();
        match self.family {
            PayoffFamily::Affine => {
                let mut u = self.params[a];
                let row = &self.params[n + a * n..n + (a + 1) * n];
                for b in 0..n {
                    u += row[b] * t[b];
                }
                u
            }
            PayoffFamily::QuadraticSummary => {
                let mut u = self.params[a];
                let lin = &self.params[n + a * n..n + (a + 1) * n];
                let quad = &self.params[n + n * n + a * n..n + n * n + (a + 1) * n];
                for b in 0..n {
                    u += lin[b] * t[b] + quad[b] * t[b] * t[b];
                }
                u
            }
            PayoffFamily::RoutingCongestion => -self.params[a] * t[a],
            PayoffFamily::Example1 => {
                let theta = self.params[0];
                let diff = a as f64 - t[1];
                theta + diff * diff
            }
        }
    }

    /// Gradient of u(a, ·) with respect to the summary coordinates.
    pub(crate) fn grad_tau(&self, a: usize, tau: &MixedStrategy) -> Vec<f64> {
        let n = tau.len();
        let t = tau.probs();
        match self.family {
            PayoffFamily::Affine => self.params[n + a * n..n + (a + 1) * n].to_vec(),
            PayoffFamily::QuadraticSummary => {
                let lin = &self.params[n + a * n..n + (a + 1) * n];
                let quad = &self.params[n + n * n + a * n..n + n * n + (a + 1) * n];
                (0..n).map(|b| lin[b] + 2.0 * quad[b] * t[b]).collect()
            }
            PayoffFamily::RoutingCongestion => {
                let mut g = vec![0.0; n];
                g[a] = -self.params[a];
                g
            }
            PayoffFamily::Example1 => {
                let mut g = vec![0.0; n];
                g[1] = -2.0 * (a as f64 - t[1]);
                g
            }
        }
    }

    /// Evaluates u(a, τ) for every action, reusing one allocation.
    pub fn eval_all(&self, tau: &MixedStrategy, out: &mut Vec<f64>) {
        out.clear();
        for a in 0..tau.len() {
            out.push(self.eval(a, tau));
        }
    }
}

/// Evaluates a characteristic's payoff after checking index and dimension
/// preconditions. The method form [`Characteristic::eval`] skips the checks.
pub fn eval_payoff(c: &Characteristic, a: usize, tau: &MixedStrategy) -> Result<f64> {
    c.validate_for_space(tau.len())?;
    if a >= tau.len() {
        return Err(Error::Domain(format!(
            "action index {a} out of range for {} actions",
            tau.len()
        )));
    }
    Ok(c.eval(a, tau))
}
