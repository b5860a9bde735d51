//! Expected payoffs in finite games, per-player deviation gains, and the
//! minimal ε certifying the approximate-equilibrium definition.
//!
//! The exact path computes E\[u_i(a, (δ_a + Σ_{j≠i} δ_{X_j})/n)\] by
//! convolving opponents one at a time over action-count vectors (the
//! Poisson-multinomial distribution of the opponents' counts). When all
//! opponents share one mixed strategy on a two-action space the
//! convolution collapses to a binomial sum, evaluated term by term from
//! the mode so tails underflow harmlessly.

use rayon::prelude::*;
use serde::Serialize;

use crate::direct::{build_direct_profile, instantiate, AuxiliaryMapping, InstantiationScheme};
use crate::error::{Error, Result};
use crate::game::{FiniteGameInstance, LargeGameSpec};
use crate::model::{MixedStrategy, StrategyProfile};
use crate::rng::{draw_action, substream, StreamTag};

/// Dense count-vector layouts beyond this many states refuse the exact
/// path and point the caller at Monte Carlo.
const MAX_DP_STATES: u128 = 10_000_000;

/// Largest action count the exact convolution accepts.
const MAX_DP_ACTIONS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditMethod {
    ExactDp,
    MonteCarlo,
}

impl AuditMethod {
    pub fn id(&self) -> &'static str {
        match self {
            AuditMethod::ExactDp => "exact_dp",
            AuditMethod::MonteCarlo => "monte_carlo",
        }
    }
}

/// Per-player deviation gains and the minimal Definition-style ε.
#[derive(Debug, Clone, Serialize)]
pub struct GainReport {
    pub gains: Vec<f64>,
    pub eps_star: f64,
    pub method: AuditMethod,
    pub mc_stderr: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditConfig {
    pub method: AuditMethod,
    /// Monte-Carlo replicates per (player, action) expectation.
    pub reps: usize,
    pub seed: u64,
    /// Inflate the Monte-Carlo eps_star by 4·max stderr so the certificate
    /// stays valid with high confidence.
    pub inflate: bool,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            method: AuditMethod::ExactDp,
            reps: 10_000,
            seed: 0,
            inflate: true,
        }
    }
}

fn check_alignment(gn: &FiniteGameInstance, profile: &StrategyProfile) -> Result<()> {
    let na = gn.action_space.len();
    if profile.n() != gn.n() {
        return Err(Error::Domain(format!(
            "profile has {} rows for {} players",
            profile.n(),
            gn.n()
        )));
    }
    if profile.per_player.iter().any(|row| row.len() != na) {
        return Err(Error::Domain(format!(
            "profile rows must have {na} entries to match the action space"
        )));
    }
    Ok(())
}

/// Exact expected payoff for player `i` deviating to the pure action `a`,
/// with every opponent j playing `profile[j]`.
pub fn expected_payoff_exact(
    gn: &FiniteGameInstance,
    profile: &StrategyProfile,
    i: usize,
    a: usize,
) -> Result<f64> {
    check_alignment(gn, profile)?;
    let n = gn.n();
    let na = gn.action_space.len();
    if i >= n {
        return Err(Error::Domain(format!("player index {i} out of range for n = {n}")));
    }
    if a >= na {
        return Err(Error::Domain(format!(
            "action index {a} out of range for {na} actions"
        )));
    }
    let opponents: Vec<&MixedStrategy> = profile
        .per_player
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, row)| row)
        .collect();

    if na == 2 && !opponents.is_empty() && opponents.iter().all(|s| *s == opponents[0]) {
        return Ok(exact_binomial(gn, i, a, opponents[0], opponents.len()));
    }

    let states = dp_state_count(opponents.len(), na);
    if na > MAX_DP_ACTIONS || states > MAX_DP_STATES {
        return Err(Error::Capability(format!(
            "exact convolution supports |A| <= {MAX_DP_ACTIONS} and <= {MAX_DP_STATES} count states \
             (this instance needs {states}); use the Monte-Carlo path (expected_payoff_mc)"
        )));
    }
    Ok(exact_dp(gn, i, a, &opponents))
}

fn dp_state_count(n_opp: usize, na: usize) -> u128 {
    let mut states: u128 = 1;
    for _ in 0..na.saturating_sub(1) {
        states = states.saturating_mul(n_opp as u128 + 1);
    }
    states
}

/// Binomial fast path: all opponents share one strategy on two actions.
/// Reproduces the combinatorial deviation sums term by term.
fn exact_binomial(
    gn: &FiniteGameInstance,
    i: usize,
    a: usize,
    shared: &MixedStrategy,
    n_opp: usize,
) -> f64 {
    let n = gn.n() as f64;
    let ch = &gn.players[i];
    let p = shared.get(1);
    let q = shared.get(0);
    let payoff_at = |k: usize| -> f64 {
        // k opponents on action 1, the rest on action 0, plus the deviator
        let c0 = (n_opp - k) as f64 + if a == 0 { 1.0 } else { 0.0 };
        let c1 = k as f64 + if a == 1 { 1.0 } else { 0.0 };
        ch.eval_on(a, &[c0 / n, c1 / n])
    };
    if p <= 0.0 {
        return payoff_at(0);
    }
    if q <= 0.0 {
        return payoff_at(n_opp);
    }
    // unnormalized pmf outward from the mode; far tails underflow to zero
    // without contaminating the rest
    let mode = (((n_opp + 1) as f64) * p).floor() as usize;
    let mode = mode.min(n_opp);
    let mut weights = vec![0.0f64; n_opp + 1];
    weights[mode] = 1.0;
    for k in (0..mode).rev() {
        weights[k] = weights[k + 1] * ((k + 1) as f64 * q) / ((n_opp - k) as f64 * p);
    }
    for k in mode..n_opp {
        weights[k + 1] = weights[k] * ((n_opp - k) as f64 * p) / ((k + 1) as f64 * q);
    }
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    for (k, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w * payoff_at(k);
        }
    }
    acc / total
}

/// Generic convolution over opponent count vectors. Counts of actions
/// 1..na−1 index a dense array (the count of action 0 is implicit), so a
/// state is a mixed-radix index with stride n_opp+1 per dimension.
fn exact_dp(gn: &FiniteGameInstance, i: usize, a: usize, opponents: &[&MixedStrategy]) -> f64 {
    let n = gn.n() as f64;
    let na = gn.action_space.len();
    let ch = &gn.players[i];
    let n_opp = opponents.len();
    if n_opp == 0 {
        let mut tau = vec![0.0; na];
        tau[a] = 1.0;
        return ch.eval_on(a, &tau);
    }

    let dims = na - 1;
    let width = n_opp + 1;
    let size = width.pow(dims as u32);
    let mut strides = vec![0usize; na];
    for d in 0..dims {
        strides[d + 1] = width.pow(d as u32);
    }

    let mut dist = vec![0.0f64; size];
    let mut next = vec![0.0f64; size];
    dist[0] = 1.0;
    for opp in opponents {
        next[..].fill(0.0);
        let probs = opp.probs();
        for (idx, &mass) in dist.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            if probs[0] > 0.0 {
                next[idx] += mass * probs[0];
            }
            for b in 1..na {
                if probs[b] > 0.0 {
                    next[idx + strides[b]] += mass * probs[b];
                }
            }
        }
        std::mem::swap(&mut dist, &mut next);
    }

    let mut tau = vec![0.0f64; na];
    let mut acc = 0.0;
    for (idx, &mass) in dist.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        let mut rest = idx;
        let mut total = 0usize;
        for d in (1..na).rev() {
            let c = rest / strides[d];
            rest %= strides[d];
            tau[d] = c as f64;
            total += c;
        }
        tau[0] = (n_opp - total) as f64;
        tau[a] += 1.0;
        for v in tau.iter_mut() {
            *v /= n;
        }
        acc += mass * ch.eval_on(a, &tau);
    }
    acc
}

/// Unbiased Monte-Carlo estimate of the same deviation payoff, with its
/// standard error. Replicate r draws from the substream (seed, i, a, r).
pub fn expected_payoff_mc(
    gn: &FiniteGameInstance,
    profile: &StrategyProfile,
    i: usize,
    a: usize,
    reps: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_alignment(gn, profile)?;
    if reps < 100 {
        return Err(Error::Config(format!(
            "Monte-Carlo payoff estimation needs reps >= 100, got {reps}"
        )));
    }
    let n = gn.n();
    let na = gn.action_space.len();
    if i >= n || a >= na {
        return Err(Error::Domain(format!(
            "player {i} / action {a} out of range for n = {n}, |A| = {na}"
        )));
    }
    let ch = &gn.players[i];
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    let mut tau = vec![0.0f64; na];
    for r in 0..reps {
        let mut rng = substream(seed, StreamTag::PayoffMc, i as u64, a as u64, r as u64);
        tau.fill(0.0);
        for (j, row) in profile.per_player.iter().enumerate() {
            if j != i {
                tau[draw_action(&mut rng, row.probs())] += 1.0;
            }
        }
        tau[a] += 1.0;
        for v in tau.iter_mut() {
            *v /= n as f64;
        }
        let x = ch.eval_on(a, &tau);
        let delta = x - mean;
        mean += delta / (r + 1) as f64;
        m2 += delta * (x - mean);
    }
    let stderr = if reps > 1 {
        (m2 / (reps - 1) as f64 / reps as f64).sqrt()
    } else {
        0.0
    };
    Ok((mean, stderr))
}

/// Minimal ε certifying the approximate-equilibrium definition for the
/// given deviation gains: with gains sorted descending and g_(n+1) := 0,
/// the exempt set of the k largest gains certifies ε = max(g_(k+1), k/n);
/// the minimum over k is the tightest certificate.
pub fn eps_star_from_gains(gains: &[f64], n: usize) -> f64 {
    let mut sorted: Vec<f64> = gains.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut best = f64::INFINITY;
    for k in 0..=n {
        let g_next = if k < sorted.len() { sorted[k].max(0.0) } else { 0.0 };
        let candidate = g_next.max(k as f64 / n as f64);
        if candidate < best {
            best = candidate;
        }
    }
    best
}

fn player_gain_exact(
    gn: &FiniteGameInstance,
    profile: &StrategyProfile,
    i: usize,
) -> Result<(f64, f64)> {
    let na = gn.action_space.len();
    let mut best = f64::NEG_INFINITY;
    let mut played = 0.0;
    for a in 0..na {
        let u = expected_payoff_exact(gn, profile, i, a)?;
        best = best.max(u);
        played += profile.per_player[i].get(a) * u;
    }
    Ok((best - played, 0.0))
}

fn player_gain_mc(
    gn: &FiniteGameInstance,
    profile: &StrategyProfile,
    i: usize,
    reps: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let na = gn.action_space.len();
    let mut best = f64::NEG_INFINITY;
    let mut played = 0.0;
    let mut max_stderr = 0.0f64;
    for a in 0..na {
        let (u, se) = expected_payoff_mc(gn, profile, i, a, reps, seed)?;
        best = best.max(u);
        played += profile.per_player[i].get(a) * u;
        max_stderr = max_stderr.max(se);
    }
    Ok((best - played, max_stderr))
}

/// Per-player deviation gains against the profile and the minimal ε.
///
/// The own-strategy payoff U_i(gⁿ) is assembled from the same pure
/// deviation values via U_i(gⁿ) = Σ_a gⁿ(i)(a)·U_i(δ_a, gⁿ_{-i}), which
/// also makes the sup over mixed deviations equal the max over pure ones.
pub fn audit(
    gn: &FiniteGameInstance,
    profile: &StrategyProfile,
    cfg: &AuditConfig,
) -> Result<GainReport> {
    check_alignment(gn, profile)?;
    let n = gn.n();
    let results: Result<Vec<(f64, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| match cfg.method {
            AuditMethod::ExactDp => player_gain_exact(gn, profile, i),
            AuditMethod::MonteCarlo => player_gain_mc(gn, profile, i, cfg.reps, cfg.seed),
        })
        .collect();
    let results = results?;
    let gains: Vec<f64> = results.iter().map(|(g, _)| *g).collect();
    let max_stderr = results.iter().map(|(_, s)| *s).fold(0.0f64, f64::max);
    let mut eps_star = eps_star_from_gains(&gains, n);
    let mc_stderr = match cfg.method {
        AuditMethod::ExactDp => None,
        AuditMethod::MonteCarlo => {
            if cfg.inflate {
                eps_star += 4.0 * max_stderr;
            }
            Some(max_stderr)
        }
    };
    Ok(GainReport {
        gains,
        eps_star,
        method: cfg.method,
        mc_stderr,
        n,
    })
}

/// One row of a Theorem-1 curve.
#[derive(Debug, Clone, Serialize)]
pub struct CurveRow {
    pub n: usize,
    pub eps_star: f64,
    pub method: AuditMethod,
    pub stderr: f64,
    pub runtime_ms: u64,
}

/// Runs the full pipeline (instantiate → direct profile → audit) for each
/// requested n.
pub fn theorem1_curve(
    game: &LargeGameSpec,
    gbar: &AuxiliaryMapping,
    scheme: &InstantiationScheme,
    ns: &[usize],
    cfg: &AuditConfig,
) -> Result<Vec<CurveRow>> {
    if ns.is_empty() {
        return Err(Error::Config("curve needs a nonempty list of n values".into()));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("curve n values must be strictly increasing".into()));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let started = std::time::Instant::now();
        let gn = instantiate(game, n, scheme)?;
        let profile = build_direct_profile(&gn, gbar)?;
        let report = audit(&gn, &profile, cfg)?;
        rows.push(CurveRow {
            n,
            eps_star: report.eps_star,
            method: report.method,
            stderr: report.mc_stderr.unwrap_or(0.0),
            runtime_ms: started.elapsed().as_millis() as u64,
        });
    }
    Ok(rows)
}
