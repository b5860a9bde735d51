//! Core domain types: finite metric action spaces, mixed strategies, and
//! strategy profiles for finite-player games.
//!
//! A societal summary (the action distribution induced by a profile) is
//! itself a [`MixedStrategy`], so point masses, per-player strategies and
//! aggregates all share one representation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for probability-vector and weight normalization.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Maximum number of actions; the Prohorov metric enumerates all 2^|A|
/// subsets of the action set.
pub const MAX_ACTIONS: usize = 16;

/// A finite labeled action set together with a metric on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawActionSpace")]
pub struct ActionSpace {
    labels: Vec<String>,
    dist: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawActionSpace {
    labels: Vec<String>,
    dist: Vec<Vec<f64>>,
}

impl TryFrom<RawActionSpace> for ActionSpace {
    type Error = Error;
    fn try_from(raw: RawActionSpace) -> Result<Self> {
        ActionSpace::new(raw.labels, raw.dist)
    }
}

impl ActionSpace {
    /// Builds an action space, checking the metric axioms: zero diagonal,
    /// symmetry, strictly positive off-diagonal entries, and the triangle
    /// inequality for every triple.
    pub fn new(labels: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::Config("action_space.labels must be nonempty".into()));
        }
        if n > MAX_ACTIONS {
            return Err(Error::Capability(format!(
                "action space has {n} actions; the metric machinery supports at most {MAX_ACTIONS}"
            )));
        }
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::Config(format!(
                "action_space.dist must be a {n}x{n} matrix matching the labels"
            )));
        }
        for (i, row) in dist.iter().enumerate() {
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() {
                    return Err(Error::Config(format!(
                        "action_space.dist[{i}][{j}] is not finite"
                    )));
                }
                if i == j && d != 0.0 {
                    return Err(Error::Config(format!(
                        "action_space.dist[{i}][{i}] must be 0, got {d}"
                    )));
                }
                if i != j && d <= 0.0 {
                    return Err(Error::Config(format!(
                        "action_space.dist[{i}][{j}] must be positive for distinct actions, got {d}"
                    )));
                }
                if (d - dist[j][i]).abs() > 0.0 {
                    return Err(Error::Config(format!(
                        "action_space.dist is not symmetric at [{i}][{j}]"
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if dist[i][k] > dist[i][j] + dist[j][k] + 1e-12 {
                        return Err(Error::Config(format!(
                            "action_space.dist violates the triangle inequality on ({}, {}, {}): d({},{}) = {} > {} + {}",
                            labels[i], labels[j], labels[k], labels[i], labels[k],
                            dist[i][k], dist[i][j], dist[j][k]
                        )));
                    }
                }
            }
        }
        Ok(ActionSpace { labels, dist })
    }

    /// Two-point space with labels `0`, `1` at distance `d`.
    pub fn two_point(d: f64) -> Result<Self> {
        ActionSpace::new(
            vec!["0".into(), "1".into()],
            vec![vec![0.0, d], vec![d, 0.0]],
        )
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Metric distance between actions `a` and `b`.
    pub fn d(&self, a: usize, b: usize) -> f64 {
        self.dist[a][b]
    }

    /// Smallest distance between two distinct actions; `None` for a
    /// single-action space.
    pub fn min_distance(&self) -> Option<f64> {
        let n = self.len();
        let mut best: Option<f64> = None;
        for i in 0..n {
            for j in i + 1..n {
                best = Some(match best {
                    Some(b) => b.min(self.dist[i][j]),
                    None => self.dist[i][j],
                });
            }
        }
        best
    }
}

/// A probability vector over the actions of an [`ActionSpace`].
///
/// Serialized as a bare JSON array. Entries are clamped of sub-tolerance
/// negative noise and renormalized exactly on construction; anything
/// further off than [`NORMALIZATION_TOL`] is rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>")]
#[serde(transparent)]
pub struct MixedStrategy {
    probs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for MixedStrategy {
    type Error = Error;
    fn try_from(probs: Vec<f64>) -> Result<Self> {
        MixedStrategy::new(probs)
    }
}

impl MixedStrategy {
    /// Validates and normalizes a probability vector.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Domain("probability vector must be nonempty".into()));
        }
        let mut sum = 0.0;
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::Domain(format!("probability [{i}] is not finite")));
            }
            if !(-NORMALIZATION_TOL..=1.0 + NORMALIZATION_TOL).contains(&p) {
                return Err(Error::Domain(format!(
                    "probability [{i}] = {p} outside [0, 1]"
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Domain(format!(
                "probabilities sum to {sum}, expected 1 within {NORMALIZATION_TOL:e}"
            )));
        }
        Ok(Self::renormalized(probs))
    }

    /// Normalizes a nonnegative vector by its sum without the strict
    /// tolerance check. Used internally where sums drift by rounding only.
    pub(crate) fn renormalized(mut probs: Vec<f64>) -> Self {
        for p in probs.iter_mut() {
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        debug_assert!(sum > 0.0, "cannot normalize an all-zero vector");
        for p in probs.iter_mut() {
            *p /= sum;
        }
        MixedStrategy { probs }
    }

    /// Point mass on action `a` in a space of `len` actions.
    pub fn point_mass(a: usize, len: usize) -> Self {
        let mut probs = vec![0.0; len];
        probs[a] = 1.0;
        MixedStrategy { probs }
    }

    /// Uniform distribution over `len` actions.
    pub fn uniform(len: usize) -> Self {
        MixedStrategy {
            probs: vec![1.0 / len as f64; len],
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, a: usize) -> f64 {
        self.probs[a]
    }

    /// True when all mass sits on a single action.
    pub fn is_point_mass(&self) -> bool {
        self.probs.iter().any(|&p| p >= 1.0 - 1e-12)
    }

    /// Index with maximal mass (lowest index on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }
}

/// Per-player mixed strategies for a finite-player game, aligned with the
/// instance's player list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub per_player: Vec<MixedStrategy>,
    /// Set when players with equal characteristics are known to play equal
    /// strategies (e.g. any profile built from an auxiliary mapping).
    pub symmetric: bool,
    /// Set when every row is a point mass.
    pub pure: bool,
}

impl StrategyProfile {
    pub fn new(per_player: Vec<MixedStrategy>) -> Self {
        let pure = per_player.iter().all(MixedStrategy::is_point_mass);
        StrategyProfile {
            per_player,
            symmetric: false,
            pure,
        }
    }

    /// Marks the profile symmetric after verifying that players with
    /// bitwise-equal characteristics play identical strategies.
    pub fn into_symmetric(mut self, players: &[crate::characteristic::Characteristic]) -> Result<Self> {
        if players.len() != self.per_player.len() {
            return Err(Error::Domain(format!(
                "profile has {} rows for {} players",
                self.per_player.len(),
                players.len()
            )));
        }
        for i in 0..players.len() {
            for j in i + 1..players.len() {
                if players[i] == players[j] && self.per_player[i] != self.per_player[j] {
                    return Err(Error::InvalidInput(format!(
                        "players {i} and {j} share a characteristic but play different strategies in a symmetric profile"
                    )));
                }
            }
        }
        self.symmetric = true;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.per_player.len()
    }
}

/// Uniform average of the per-player strategies: the action distribution
/// induced by the profile.
pub fn societal_summary(profile: &StrategyProfile) -> Result<MixedStrategy> {
    if profile.per_player.is_empty() {
        return Err(Error::Domain(
            "societal summary of an empty profile is undefined".into(),
        ));
    }
    let len = profile.per_player[0].len();
    let mut acc = vec![0.0; len];
    for row in &profile.per_player {
        if row.len() != len {
            return Err(Error::Domain("profile rows have inconsistent lengths".into()));
        }
        for (a, &p) in row.probs().iter().enumerate() {
            acc[a] += p;
        }
    }
    Ok(MixedStrategy::renormalized(acc))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn action_space_rejects_triangle_violation() {
        let err = ActionSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![0.0, 1.0, 5.0],
                vec![1.0, 0.0, 1.0],
                vec![5.0, 1.0, 0.0],
            ],
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("triangle"), "message was: {msg}");
        assert!(msg.contains('a') && msg.contains('b') && msg.contains('c'));
    }

    #[test]
    fn action_space_rejects_oversize() {
        let n = 17;
        let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let dist: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
            .collect();
        assert!(matches!(
            ActionSpace::new(labels, dist),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn mixed_strategy_tolerance() {
        assert!(MixedStrategy::new(vec![0.5, 0.5 + 1e-13]).is_ok());
        assert!(MixedStrategy::new(vec![0.6, 0.5]).is_err());
        assert!(MixedStrategy::new(vec![0.5, -0.5]).is_err());
    }

    #[test]
    fn summary_of_point_masses_is_empirical_frequency() {
        let profile = StrategyProfile::new(vec![
            MixedStrategy::point_mass(0, 2),
            MixedStrategy::point_mass(1, 2),
        ]);
        let s = societal_summary(&profile).unwrap();
        assert_eq!(s.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn summary_of_identical_rows_is_the_row() {
        let row = MixedStrategy::new(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let profile = StrategyProfile::new(vec![row.clone(); 7]);
        let s = societal_summary(&profile).unwrap();
        for a in 0..2 {
            assert!((s.get(a) - row.get(a)).abs() < 1e-15);
        }
    }

    #[test]
    fn summary_hand_average() {
        let profile = StrategyProfile::new(vec![
            MixedStrategy::new(vec![1.0, 0.0]).unwrap(),
            MixedStrategy::new(vec![0.0, 1.0]).unwrap(),
            MixedStrategy::new(vec![0.5, 0.5]).unwrap(),
        ]);
        let s = societal_summary(&profile).unwrap();
        assert!((s.get(0) - 0.5).abs() < 1e-15);
        assert!((s.get(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn summary_is_permutation_invariant() {
        let rows = vec![
            MixedStrategy::new(vec![0.2, 0.8]).unwrap(),
            MixedStrategy::new(vec![0.7, 0.3]).unwrap(),
            MixedStrategy::new(vec![0.0, 1.0]).unwrap(),
        ];
        let mut permuted = rows.clone();
        permuted.rotate_left(1);
        let a = societal_summary(&StrategyProfile::new(rows)).unwrap();
        let b = societal_summary(&StrategyProfile::new(permuted)).unwrap();
        for i in 0..2 {
            assert!((a.get(i) - b.get(i)).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_profile_is_a_domain_error() {
        assert!(matches!(
            societal_summary(&StrategyProfile::new(vec![])),
            Err(Error::Domain(_))
        ));
    }
}
