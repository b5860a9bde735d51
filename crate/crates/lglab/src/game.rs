//! Game specifications: a continuum game (types with weights, or a
//! parametric continuum of characteristics) and its n-player instances.

use serde::{Deserialize, Serialize};

use crate::characteristic::{Characteristic, PayoffFamily};
use crate::error::{Error, Result};
use crate::model::{ActionSpace, NORMALIZATION_TOL};

/// Hard cap on the number of distinct types the equilibrium machinery
/// accepts.
pub const MAX_TYPES: usize = 64;

/// One type of a finite-type population: a characteristic and its mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameType {
    pub characteristic: Characteristic,
    pub weight: f64,
}

/// Parametric continua: a scalar type θ uniform on \[0,1\] mapped into
/// characteristic parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuumFamily {
    /// θ ↦ example1 characteristic with parameter θ.
    Example1,
}

impl ContinuumFamily {
    pub fn characteristic(&self, theta: f64) -> Characteristic {
        match self {
            ContinuumFamily::Example1 => Characteristic::example1(theta),
        }
    }

    /// Recovers θ from a characteristic if it lies in this family's image.
    pub fn theta_of(&self, ch: &Characteristic) -> Option<f64> {
        match self {
            ContinuumFamily::Example1 => {
                if ch.family == PayoffFamily::Example1 && ch.params.len() == 1 {
                    Some(ch.params[0])
                } else {
                    None
                }
            }
        }
    }
}

/// Population of a large game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Population {
    FiniteTypes { types: Vec<GameType> },
    ParamContinuum { family: ContinuumFamily },
}

/// A large (continuum-of-players) game: an action space and a distribution
/// of characteristics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeGameSpec {
    pub action_space: ActionSpace,
    pub population: Population,
}

impl LargeGameSpec {
    /// Validates and weight-normalizes a specification.
    pub fn new(action_space: ActionSpace, population: Population) -> Result<Self> {
        let mut spec = LargeGameSpec {
            action_space,
            population,
        };
        spec.validate_and_normalize()?;
        Ok(spec)
    }

    /// Checks every invariant reachable from the spec and normalizes type
    /// weights that are within tolerance of summing to one.
    pub fn validate_and_normalize(&mut self) -> Result<()> {
        let n_actions = self.action_space.len();
        match &mut self.population {
            Population::FiniteTypes { types } => {
                if types.is_empty() {
                    return Err(Error::Config("population.types must be nonempty".into()));
                }
                if types.len() > MAX_TYPES {
                    return Err(Error::Capability(format!(
                        "population has {} types; the solver supports at most {MAX_TYPES}",
                        types.len()
                    )));
                }
                let mut sum = 0.0;
                for (i, t) in types.iter().enumerate() {
                    if !t.weight.is_finite() || t.weight <= 0.0 {
                        return Err(Error::Config(format!(
                            "population.types[{i}].weight must be strictly positive, got {}",
                            t.weight
                        )));
                    }
                    t.characteristic.validate_for_space(n_actions)?;
                    sum += t.weight;
                }
                if (sum - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(Error::Config(format!("weights sum {sum}, expected 1")));
                }
                for t in types.iter_mut() {
                    t.weight /= sum;
                }
            }
            Population::ParamContinuum { family } => {
                // the whole family must evaluate on this space
                family.characteristic(0.0).validate_for_space(n_actions)?;
                family.characteristic(1.0).validate_for_space(n_actions)?;
            }
        }
        Ok(())
    }

    /// The finite type list, or a configuration error for parametric games.
    pub fn finite_types(&self) -> Result<&[GameType]> {
        match &self.population {
            Population::FiniteTypes { types } => Ok(types),
            Population::ParamContinuum { .. } => Err(Error::Config(
                "operation requires a finite-type population; discretize the parametric continuum first"
                    .into(),
            )),
        }
    }

    /// Whether a characteristic lies in the support of the population's
    /// characteristic distribution.
    pub fn supports(&self, ch: &Characteristic) -> bool {
        match &self.population {
            Population::FiniteTypes { types } => types.iter().any(|t| &t.characteristic == ch),
            Population::ParamContinuum { family } => match family.theta_of(ch) {
                Some(theta) => (0.0..=1.0).contains(&theta),
                None => false,
            },
        }
    }
}

/// An n-player game whose players all carry characteristics drawn from a
/// parent large game; players have uniform weight 1/n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteGameInstance {
    pub action_space: ActionSpace,
    pub players: Vec<Characteristic>,
}

impl FiniteGameInstance {
    pub fn new(action_space: ActionSpace, players: Vec<Characteristic>) -> Result<Self> {
        if players.is_empty() {
            return Err(Error::Config("instance must have at least one player".into()));
        }
        for (i, p) in players.iter().enumerate() {
            p.validate_for_space(action_space.len()).map_err(|e| {
                Error::Config(format!("players[{i}]: {e}"))
            })?;
        }
        Ok(FiniteGameInstance {
            action_space,
            players,
        })
    }

    pub fn n(&self) -> usize {
        self.players.len()
    }

    /// Verifies the support-inclusion assumption G_n(I_n) ⊆ supp λG⁻¹.
    pub fn validate_against(&self, parent: &LargeGameSpec) -> Result<()> {
        if self.action_space != parent.action_space {
            return Err(Error::InvalidInput(
                "instance action space differs from the parent game".into(),
            ));
        }
        for (i, p) in self.players.iter().enumerate() {
            if !parent.supports(p) {
                return Err(Error::InvalidInput(format!(
                    "players[{i}] carries a characteristic outside the parent game's support"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> ActionSpace {
        ActionSpace::two_point(1.0).unwrap()
    }

    #[test]
    fn weights_normalize_within_tolerance() {
        let spec = LargeGameSpec::new(
            two_point(),
            Population::FiniteTypes {
                types: vec![
                    GameType {
                        characteristic: Characteristic::routing_congestion(vec![2.0, 1.0]),
                        weight: 0.5,
                    },
                    GameType {
                        characteristic: Characteristic::routing_congestion(vec![1.0, 1.0]),
                        weight: 0.5 + 1e-13,
                    },
                ],
            },
        )
        .unwrap();
        let types = spec.finite_types().unwrap();
        let total: f64 = types.iter().map(|t| t.weight).sum();
        assert_eq!(total, 1.0);
    }

    #[test]
    fn weights_beyond_tolerance_rejected() {
        let err = LargeGameSpec::new(
            two_point(),
            Population::FiniteTypes {
                types: vec![
                    GameType {
                        characteristic: Characteristic::routing_congestion(vec![2.0, 1.0]),
                        weight: 0.6,
                    },
                    GameType {
                        characteristic: Characteristic::routing_congestion(vec![1.0, 1.0]),
                        weight: 0.5,
                    },
                ],
            },
        )
        .unwrap_err();
        assert!(err.to_string().contains("weights sum 1.1"), "{err}");
    }

    #[test]
    fn parametric_support_checks_theta_range() {
        let spec = LargeGameSpec::new(
            two_point(),
            Population::ParamContinuum {
                family: ContinuumFamily::Example1,
            },
        )
        .unwrap();
        assert!(spec.supports(&Characteristic::example1(0.25)));
        assert!(!spec.supports(&Characteristic::example1(1.5)));
        assert!(!spec.supports(&Characteristic::routing_congestion(vec![1.0, 1.0])));
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = LargeGameSpec::new(
            two_point(),
            Population::ParamContinuum {
                family: ContinuumFamily::Example1,
            },
        )
        .unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        let back: LargeGameSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }
}
