//! Built-in demo games.

use crate::characteristic::Characteristic;
use crate::error::{Error, Result};
use crate::game::{ContinuumFamily, GameType, LargeGameSpec, Population};
use crate::model::ActionSpace;

/// Two-road congestion game: a narrow path whose travel time is twice the
/// share of drivers on it, and a wide path whose travel time equals its
/// share. Unique equilibrium distribution (1/3, 2/3).
pub fn routing() -> LargeGameSpec {
    let space = ActionSpace::new(
        vec!["path_a".into(), "path_b".into()],
        vec![vec![0.0, 1.0], vec![1.0, 0.0]],
    )
    .expect("static space");
    LargeGameSpec::new(
        space,
        Population::FiniteTypes {
            types: vec![GameType {
                characteristic: Characteristic::routing_congestion(vec![2.0, 1.0]),
                weight: 1.0,
            }],
        },
    )
    .expect("static game")
}

/// Continuum of types θ uniform on \[0,1\] with u(a, τ) = θ + (a − τ(1))² on
/// the two-action space. The equilibrium aggregate puts mass 1/2 on each
/// action; the interesting auxiliary mappings for it are discontinuous.
pub fn example1() -> LargeGameSpec {
    let space = ActionSpace::two_point(1.0).expect("static space");
    LargeGameSpec::new(
        space,
        Population::ParamContinuum {
            family: ContinuumFamily::Example1,
        },
    )
    .expect("static game")
}

/// Two equally weighted affine-congestion types on a two-action space.
/// Both types dislike crowding (M = −I); type 2 additionally gets a 0.25
/// bonus on action 0. Unique equilibrium: aggregate (1/2, 1/2), with type 1
/// on action 1 and type 2 on action 0.
pub fn two_type_congestion() -> LargeGameSpec {
    let space = ActionSpace::two_point(1.0).expect("static space");
    let minus_identity = vec![vec![-1.0, 0.0], vec![0.0, -1.0]];
    LargeGameSpec::new(
        space,
        Population::FiniteTypes {
            types: vec![
                GameType {
                    characteristic: Characteristic::affine(vec![0.0, 0.0], minus_identity.clone()),
                    weight: 0.5,
                },
                GameType {
                    characteristic: Characteristic::affine(vec![0.25, 0.0], minus_identity),
                    weight: 0.5,
                },
            ],
        },
    )
    .expect("static game")
}

/// Resolves a builtin game by name.
pub fn by_name(name: &str) -> Result<LargeGameSpec> {
    match name {
        "routing" => Ok(routing()),
        "example1" => Ok(example1()),
        "two_type_congestion" => Ok(two_type_congestion()),
        other => Err(Error::Config(format!(
            "unknown builtin game '{other}'; available: routing, example1, two_type_congestion"
        ))),
    }
}

/// Named metric spaces for the `metric` subcommand.
pub fn space_by_name(name: &str) -> Result<ActionSpace> {
    match name {
        "two_point" => ActionSpace::two_point(1.0),
        other => Err(Error::Config(format!(
            "unknown builtin space '{other}'; available: two_point"
        ))),
    }
}
