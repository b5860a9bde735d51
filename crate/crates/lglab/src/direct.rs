//! Finite-game instantiation and direct strategy profiles: each player of
//! the n-player game copies the strategy her characteristic is assigned by
//! an auxiliary mapping of the continuum game.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::characteristic::Characteristic;
use crate::error::{Error, Result};
use crate::game::{FiniteGameInstance, LargeGameSpec, Population};
use crate::metrics;
use crate::model::{MixedStrategy, StrategyProfile};
use crate::rng::{draw_action, substream, StreamTag};

/// How a finite game is drawn from the population of a large game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstantiationScheme {
    /// Deterministic type counts n·w_t, rounded by largest remainder with
    /// lower-index preference. Finite-type populations only.
    ReplicateTypes,
    /// n characteristics drawn independently from the population law.
    IidSample { seed: u64 },
    /// Player i of n gets θ = (2i−1)/(2n). Parametric populations only.
    QuantileGrid,
}

/// Largest-remainder apportionment of n among weights; ties go to the
/// lower index, so the result is total and deterministic.
fn largest_remainder_counts(weights: &[f64], n: usize) -> Vec<usize> {
    let mut counts: Vec<usize> = Vec::with_capacity(weights.len());
    let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(weights.len());
    let mut assigned = 0usize;
    for (i, &w) in weights.iter().enumerate() {
        let exact = w * n as f64;
        let floor = exact.floor() as usize;
        counts.push(floor);
        assigned += floor;
        remainders.push((i, exact - floor as f64));
    }
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    for &(i, _) in remainders.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Draws an n-player game whose characteristic distribution converges to
/// the population law as n grows.
pub fn instantiate(
    game: &LargeGameSpec,
    n: usize,
    scheme: &InstantiationScheme,
) -> Result<FiniteGameInstance> {
    if n == 0 {
        return Err(Error::Config("instance size n must be at least 1".into()));
    }
    let players: Vec<Characteristic> = match (scheme, &game.population) {
        (InstantiationScheme::ReplicateTypes, Population::FiniteTypes { types }) => {
            let weights: Vec<f64> = types.iter().map(|t| t.weight).collect();
            let counts = largest_remainder_counts(&weights, n);
            let mut players = Vec::with_capacity(n);
            for (t, &count) in types.iter().zip(&counts) {
                players.extend(std::iter::repeat(t.characteristic.clone()).take(count));
            }
            players
        }
        (InstantiationScheme::ReplicateTypes, Population::ParamContinuum { .. }) => {
            return Err(Error::Config(
                "scheme replicate_types requires a finite-type population".into(),
            ));
        }
        (InstantiationScheme::QuantileGrid, Population::ParamContinuum { family }) => (1..=n)
            .map(|i| family.characteristic((2 * i - 1) as f64 / (2 * n) as f64))
            .collect(),
        (InstantiationScheme::QuantileGrid, Population::FiniteTypes { .. }) => {
            return Err(Error::Config(
                "scheme quantile_grid requires a parametric-continuum population".into(),
            ));
        }
        (InstantiationScheme::IidSample { seed }, population) => {
            let mut rng = substream(*seed, StreamTag::Instantiate, 0, 0, 0);
            match population {
                Population::FiniteTypes { types } => {
                    let weights: Vec<f64> = types.iter().map(|t| t.weight).collect();
                    (0..n)
                        .map(|_| types[draw_action(&mut rng, &weights)].characteristic.clone())
                        .collect()
                }
                Population::ParamContinuum { family } => {
                    use rand::Rng;
                    (0..n).map(|_| family.characteristic(rng.gen::<f64>())).collect()
                }
            }
        }
    };
    FiniteGameInstance::new(game.action_space.clone(), players)
}

/// Denominator cap for deciding whether a type parameter "is rational":
/// continued-fraction convergents up to this denominator within 1e-12.
/// Quantile grids produce θ = (2i−1)/(2n), so the discontinuous rules
/// classify them exactly for n ≤ 2048.
pub const MAX_RATIONAL_DENOMINATOR: u64 = 4096;

/// True when θ is within `tol` of a fraction with denominator ≤ `max_den`.
pub fn is_small_rational(theta: f64, max_den: u64, tol: f64) -> bool {
    if !(0.0..=1.0).contains(&theta) {
        return false;
    }
    let (mut h_prev, mut h_prev2) = (1.0f64, 0.0f64);
    let (mut k_prev, mut k_prev2) = (0.0f64, 1.0f64);
    let mut x = theta;
    for _ in 0..64 {
        let a = x.floor();
        let h = a * h_prev + h_prev2;
        let k = a * k_prev + k_prev2;
        if k > max_den as f64 {
            return false;
        }
        if k > 0.0 && (theta - h / k).abs() <= tol {
            return true;
        }
        let frac = x - a;
        if frac < 1e-15 {
            return false;
        }
        x = 1.0 / frac;
        h_prev2 = h_prev;
        h_prev = h;
        k_prev2 = k_prev;
        k_prev = k;
    }
    false
}

/// Closed-form auxiliary-mapping rules for parametric games. Rules read a
/// scalar type parameter θ from the characteristic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum GbarRule {
    /// Every characteristic plays the same strategy.
    Constant { strategy: MixedStrategy },
    /// ḡ(θ) = (θ, 1−θ) on a two-action space; everywhere continuous.
    Linear,
    /// The discontinuous rule: δ₁ for rational θ, θ·δ₀ + (1−θ)·δ₁ for
    /// irrational θ. Rationality is decided by [`is_small_rational`] with
    /// denominator cap [`MAX_RATIONAL_DENOMINATOR`].
    Example1Discontinuous,
}

impl GbarRule {
    pub fn id(&self) -> &'static str {
        match self {
            GbarRule::Constant { .. } => "constant",
            GbarRule::Linear => "linear",
            GbarRule::Example1Discontinuous => "example1",
        }
    }

    /// Parses a rule id; `constant` requires the strategy it should assign.
    pub fn parse(id: &str, constant: Option<MixedStrategy>) -> Result<GbarRule> {
        match id {
            "constant" => {
                let strategy = constant.ok_or_else(|| {
                    Error::Config("rule 'constant' needs a strategy (pass --tau)".into())
                })?;
                Ok(GbarRule::Constant { strategy })
            }
            "linear" => Ok(GbarRule::Linear),
            "example1" => Ok(GbarRule::Example1Discontinuous),
            other => Err(Error::Config(format!(
                "unknown auxiliary rule '{other}'; available: constant, linear, example1"
            ))),
        }
    }

    /// Strategy assigned to the scalar type θ on an `na`-action space.
    pub fn eval_theta(&self, theta: f64, na: usize) -> Result<MixedStrategy> {
        match self {
            GbarRule::Constant { strategy } => {
                if strategy.len() != na {
                    return Err(Error::Config(format!(
                        "constant rule strategy has {} entries for a {na}-action space",
                        strategy.len()
                    )));
                }
                Ok(strategy.clone())
            }
            GbarRule::Linear | GbarRule::Example1Discontinuous => {
                if na != 2 {
                    return Err(Error::Config(format!(
                        "rule '{}' is defined on two-action spaces, got {na}",
                        self.id()
                    )));
                }
                if !(0.0..=1.0).contains(&theta) {
                    return Err(Error::Config(format!(
                        "rule '{}' needs a type parameter in [0,1], got {theta}",
                        self.id()
                    )));
                }
                if matches!(self, GbarRule::Example1Discontinuous)
                    && is_small_rational(theta, MAX_RATIONAL_DENOMINATOR, 1e-12)
                {
                    return Ok(MixedStrategy::point_mass(1, 2));
                }
                Ok(MixedStrategy::renormalized(vec![theta, 1.0 - theta]))
            }
        }
    }

    /// Strategy for a characteristic: constant rules apply to anything,
    /// the θ-rules read the first parameter.
    pub fn eval(&self, ch: &Characteristic, na: usize) -> Result<MixedStrategy> {
        match self {
            GbarRule::Constant { .. } => self.eval_theta(0.0, na),
            _ => {
                let theta = *ch.params.first().ok_or_else(|| {
                    Error::Config(format!("rule '{}' needs a scalar type parameter", self.id()))
                })?;
                self.eval_theta(theta, na)
            }
        }
    }
}

/// An auxiliary mapping as the profile builder sees it: a table on the
/// game's support, optionally backed by a named rule for characteristics
/// the table does not list (possible under i.i.d. sampling from a
/// parametric population).
#[derive(Debug, Clone)]
pub struct AuxiliaryMapping {
    pub table: BTreeMap<Characteristic, MixedStrategy>,
    pub rule: Option<GbarRule>,
}

impl AuxiliaryMapping {
    pub fn from_table(table: BTreeMap<Characteristic, MixedStrategy>) -> Self {
        AuxiliaryMapping { table, rule: None }
    }

    pub fn from_rule(rule: GbarRule) -> Self {
        AuxiliaryMapping {
            table: BTreeMap::new(),
            rule: Some(rule),
        }
    }

    fn strategy_for(&self, ch: &Characteristic, na: usize) -> Option<MixedStrategy> {
        if let Some(s) = self.table.get(ch) {
            return Some(s.clone());
        }
        self.rule.as_ref().and_then(|r| r.eval(ch, na).ok())
    }
}

/// The direct strategy profile: row i is the auxiliary mapping applied to
/// player i's characteristic. Symmetric by construction.
pub fn build_direct_profile(
    gn: &FiniteGameInstance,
    gbar: &AuxiliaryMapping,
) -> Result<StrategyProfile> {
    let na = gn.action_space.len();
    let mut rows = Vec::with_capacity(gn.n());
    let mut missing = Vec::new();
    for (i, ch) in gn.players.iter().enumerate() {
        match gbar.strategy_for(ch, na) {
            Some(s) => rows.push(s),
            None => missing.push(i),
        }
    }
    if !missing.is_empty() {
        return Err(Error::InvalidInput(format!(
            "auxiliary mapping has no entry or applicable rule for players {missing:?}"
        )));
    }
    let mut profile = StrategyProfile::new(rows);
    profile.symmetric = true;
    Ok(profile)
}

/// One refinement level of the continuity probe.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeLevel {
    pub grid: usize,
    /// max over adjacent grid points θ_j, θ_{j+1} of β(ḡ(θ_j), ḡ(θ_{j+1}))
    pub max_adjacent_bl: f64,
    /// same, with irrational midpoints θ_j + 1/(grid·√2) interleaved
    pub mixed_max_adjacent_bl: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub rule: String,
    pub levels: Vec<ProbeLevel>,
}

/// Samples the rule along refining grids of \[0,1\] and reports the largest
/// β-jump between adjacent evaluation points. Persistently large jumps
/// under refinement are evidence (not proof) that the rule is
/// discontinuous on the type space.
pub fn continuity_probe(
    game: &LargeGameSpec,
    rule: &GbarRule,
    grid: usize,
) -> Result<ProbeReport> {
    if grid < 2 {
        return Err(Error::Config("probe grid must be at least 2".into()));
    }
    if !matches!(game.population, Population::ParamContinuum { .. }) {
        return Err(Error::Config(
            "continuity_probe requires a parametric-continuum population".into(),
        ));
    }
    let na = game.action_space.len();
    let mut levels = Vec::with_capacity(3);
    for factor in [1usize, 2, 4] {
        let g = grid * factor;
        let thetas: Vec<f64> = (0..=g).map(|j| j as f64 / g as f64).collect();
        let max_plain = max_adjacent_gap(game, rule, &thetas, na)?;
        let shift = 1.0 / (g as f64 * std::f64::consts::SQRT_2);
        let mut mixed: Vec<f64> = Vec::with_capacity(2 * g + 2);
        for &t in &thetas {
            mixed.push(t);
            let m = t + shift;
            if m < 1.0 {
                mixed.push(m);
            }
        }
        mixed.sort_by(f64::total_cmp);
        let max_mixed = max_adjacent_gap(game, rule, &mixed, na)?;
        levels.push(ProbeLevel {
            grid: g,
            max_adjacent_bl: max_plain,
            mixed_max_adjacent_bl: max_mixed,
        });
    }
    Ok(ProbeReport {
        rule: rule.id().to_string(),
        levels,
    })
}

fn max_adjacent_gap(
    game: &LargeGameSpec,
    rule: &GbarRule,
    thetas: &[f64],
    na: usize,
) -> Result<f64> {
    let mut max_gap = 0.0f64;
    let mut prev: Option<MixedStrategy> = None;
    for &t in thetas {
        let cur = rule.eval_theta(t, na)?;
        if let Some(p) = prev {
            let gap = metrics::bl_distance(&p, &cur, &game.action_space)?;
            max_gap = max_gap.max(gap);
        }
        prev = Some(cur);
    }
    Ok(max_gap)
}
