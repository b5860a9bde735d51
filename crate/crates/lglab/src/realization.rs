//! Ex-post analysis: sample pure realizations of a randomized profile,
//! test them for approximate pure equilibrium, and check the concentration
//! of empirical societal summaries around the profile mean.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::FiniteGameInstance;
use crate::metrics;
use crate::model::{societal_summary, MixedStrategy, StrategyProfile};
use crate::rng::{draw_action, substream, StreamTag};

const WILSON_Z: f64 = 1.96;

/// Draws one pure action profile: player i's action comes from the
/// substream (seed, rep, i), so realizations are independent across
/// players and reproducible regardless of scheduling.
pub fn sample_realization(
    gn: &FiniteGameInstance,
    profile: &StrategyProfile,
    seed: u64,
    rep: usize,
) -> Result<Vec<usize>> {
    if profile.n() != gn.n() {
        return Err(Error::Domain(format!(
            "profile has {} rows for {} players",
            profile.n(),
            gn.n()
        )));
    }
    Ok((0..gn.n())
        .map(|i| {
            let mut rng = substream(seed, StreamTag::Realization, rep as u64, 0, i as u64);
            draw_action(&mut rng, profile.per_player[i].probs())
        })
        .collect())
}

/// Best deviation gain of player i in the realized pure profile. The
/// deviation summary replaces the player's own atom: moving to action a
/// is evaluated against s(δ_a, x_{-i}).
pub fn expost_gain(gn: &FiniteGameInstance, x: &[usize], i: usize) -> Result<f64> {
    if x.len() != gn.n() {
        return Err(Error::Domain(format!(
            "realization has {} actions for {} players",
            x.len(),
            gn.n()
        )));
    }
    if i >= gn.n() {
        return Err(Error::Domain(format!("player index {i} out of range")));
    }
    let na = gn.action_space.len();
    let n = gn.n() as f64;
    let mut counts = vec![0.0f64; na];
    for &a in x {
        counts[a] += 1.0;
    }
    let ch = &gn.players[i];
    let mut tau = vec![0.0f64; na];
    for a in 0..na {
        tau[a] = counts[a] / n;
    }
    let current = ch.eval_on(x[i], &tau);
    let mut best = f64::NEG_INFINITY;
    for a in 0..na {
        tau[x[i]] -= 1.0 / n;
        tau[a] += 1.0 / n;
        best = best.max(ch.eval_on(a, &tau));
        tau[a] -= 1.0 / n;
        tau[x[i]] += 1.0 / n;
    }
    // a = x_i leaves the summary unchanged, so the gain is nonnegative
    Ok(best - current)
}

fn all_expost_gains(gn: &FiniteGameInstance, x: &[usize]) -> Vec<f64> {
    let na = gn.action_space.len();
    let n = gn.n() as f64;
    let mut base = vec![0.0f64; na];
    for &a in x {
        base[a] += 1.0;
    }
    let mut gains = Vec::with_capacity(gn.n());
    let mut tau = vec![0.0f64; na];
    for (i, ch) in gn.players.iter().enumerate() {
        for a in 0..na {
            tau[a] = base[a] / n;
        }
        let current = ch.eval_on(x[i], &tau);
        let mut best = f64::NEG_INFINITY;
        for a in 0..na {
            tau[x[i]] -= 1.0 / n;
            tau[a] += 1.0 / n;
            best = best.max(ch.eval_on(a, &tau));
            tau[a] -= 1.0 / n;
            tau[x[i]] += 1.0 / n;
        }
        gains.push(best - current);
    }
    gains
}

/// Wilson 95% interval for a Bernoulli proportion.
fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Whether a vector of ex-post gains passes the pure ε-equilibrium test:
/// a player set of mass at least 1−ε, each member gaining at most ε.
fn passes_pure_test(gains: &[f64], eps: f64) -> bool {
    let n = gains.len();
    let ok = gains.iter().filter(|&&g| g <= eps).count();
    ok as f64 >= (1.0 - eps) * n as f64 - 1e-9
}

/// Monte-Carlo batch over realizations of a profile.
#[derive(Debug, Clone, Serialize)]
pub struct RealizationBatch {
    pub n: usize,
    pub reps: usize,
    pub eps: f64,
    pub pass_count: usize,
    pub p_hat: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub seed: u64,
}

/// Estimates P(a realization is an ε-pure-strategy equilibrium).
pub fn estimate_omega(
    gn: &FiniteGameInstance,
    profile: &StrategyProfile,
    eps: f64,
    reps: usize,
    seed: u64,
) -> Result<RealizationBatch> {
    if !(eps > 0.0) {
        return Err(Error::Config(format!("eps must be positive, got {eps}")));
    }
    if reps < 30 {
        return Err(Error::Config(format!("estimate_omega needs reps >= 30, got {reps}")));
    }
    let passes: Result<Vec<bool>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let x = sample_realization(gn, profile, seed, rep)?;
            let gains = all_expost_gains(gn, &x);
            Ok(passes_pure_test(&gains, eps))
        })
        .collect();
    let pass_count = passes?.into_iter().filter(|&b| b).count();
    let p_hat = pass_count as f64 / reps as f64;
    let (wilson_lo, wilson_hi) = wilson_interval(pass_count, reps);
    Ok(RealizationBatch {
        n: gn.n(),
        reps,
        eps,
        pass_count,
        p_hat,
        wilson_lo,
        wilson_hi,
        seed,
    })
}

/// Distances between one realization's empirical summary and the profile
/// mean.
#[derive(Debug, Clone, Serialize)]
pub struct MetricSample {
    pub rep: usize,
    pub rho: f64,
    pub bl: f64,
}

/// Concentration of empirical summaries: per-replicate Prohorov and
/// bounded-Lipschitz distances to the mean summary, plus the frequency
/// with which a fixed bounded-Lipschitz witness functional stays within
/// eps of its mean, against the Chebyshev lower bound
/// 1 − sup_j λ_n(j)/ε² = 1 − 1/(n·ε²).
#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationReport {
    pub n: usize,
    pub reps: usize,
    pub eps: f64,
    pub empirical_freq: f64,
    pub freq_stderr: f64,
    pub chebyshev_bound: f64,
    pub seed: u64,
    pub metric_samples: Vec<MetricSample>,
}

/// The witness h is the indicator of action 0 rescaled by 1/(1 + 1/d_min)
/// so that ‖h‖∞ + ‖h‖Lip ≤ 1.
fn witness_scale(gn: &FiniteGameInstance) -> f64 {
    match gn.action_space.min_distance() {
        Some(d_min) => 1.0 / (1.0 + 1.0 / d_min),
        None => 1.0, // single action: the witness is constant anyway
    }
}

pub fn concentration_check(
    gn: &FiniteGameInstance,
    profile: &StrategyProfile,
    eps: f64,
    reps: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    if !(eps > 0.0) {
        return Err(Error::Config(format!("eps must be positive, got {eps}")));
    }
    if reps == 0 {
        return Err(Error::Config("concentration_check needs reps >= 1".into()));
    }
    if profile.n() != gn.n() {
        return Err(Error::Domain(format!(
            "profile has {} rows for {} players",
            profile.n(),
            gn.n()
        )));
    }
    let n = gn.n();
    let na = gn.action_space.len();
    let mean_summary = societal_summary(profile)?;
    let scale = witness_scale(gn);

    let samples: Result<Vec<(MetricSample, bool)>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let x = sample_realization(gn, profile, seed, rep)?;
            let mut counts = vec![0.0f64; na];
            for &a in &x {
                counts[a] += 1.0;
            }
            let empirical = MixedStrategy::renormalized(counts);
            let rho = metrics::prohorov(&empirical, &mean_summary, &gn.action_space)?;
            let bl = metrics::bl_distance(&empirical, &mean_summary, &gn.action_space)?;
            let statistic = scale * (empirical.get(0) - mean_summary.get(0)).abs();
            Ok((MetricSample { rep, rho, bl }, statistic <= eps))
        })
        .collect();
    let samples = samples?;
    let within = samples.iter().filter(|(_, ok)| *ok).count();
    let empirical_freq = within as f64 / reps as f64;
    let freq_stderr = (empirical_freq * (1.0 - empirical_freq) / reps as f64).sqrt();
    let chebyshev_bound = (1.0 - 1.0 / (n as f64 * eps * eps)).clamp(0.0, 1.0);
    Ok(ConcentrationReport {
        n,
        reps,
        eps,
        empirical_freq,
        freq_stderr,
        chebyshev_bound,
        seed,
        metric_samples: samples.into_iter().map(|(s, _)| s).collect(),
    })
}

/// Median of the per-replicate bounded-Lipschitz distances in a report.
pub fn median_bl(report: &ConcentrationReport) -> f64 {
    let mut bls: Vec<f64> = report.metric_samples.iter().map(|s| s.bl).collect();
    bls.sort_by(f64::total_cmp);
    let m = bls.len();
    if m % 2 == 1 {
        bls[m / 2]
    } else {
        0.5 * (bls[m / 2 - 1] + bls[m / 2])
    }
}
