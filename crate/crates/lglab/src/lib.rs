//! lglab — a laboratory for large anonymous games.
//!
//! The crate solves continuum games with finitely many player types,
//! symmetrizes their equilibria into auxiliary mappings (characteristic →
//! mixed strategy), builds direct strategy profiles for n-player games,
//! and measures how close those profiles come to equilibrium, both ex ante
//! (exact expected-payoff audits and Monte-Carlo estimates) and ex post
//! (sampled pure realizations). Prohorov and dual-bounded-Lipschitz
//! metrics on action distributions support the convergence diagnostics.
//!
//! Start with the runnable examples (`cargo run --example routing_equilibrium`
//! and friends); the `lglab` binary exposes the same pipelines as
//! subcommands for scripted experiments.
//!
//! # Modules
//!
//! - [`model`] — action spaces, mixed strategies, profiles, societal summaries
//! - [`characteristic`] — parametric payoff families u(a, τ)
//! - [`game`] — large-game specs and finite instances
//! - [`metrics`] — Prohorov and bounded-Lipschitz distances
//! - [`solver`] — continuum equilibria and symmetrization
//! - [`direct`] — instantiation schemes and direct strategy profiles
//! - [`payoff`] — exact/Monte-Carlo payoff audits and ε* certificates
//! - [`realization`] — ex-post equilibrium tests and concentration checks
//! - [`builtins`] — the demo games
//! - [`cli`] — the command-line front end

pub mod builtins;
pub mod characteristic;
pub mod cli;
pub mod direct;
pub mod error;
pub mod game;
pub mod metrics;
pub mod model;
pub mod payoff;
pub mod realization;
mod rng;
pub mod solver;
mod simplex;
mod transport;

pub use characteristic::{eval_payoff, Characteristic, PayoffFamily};
pub use direct::{
    build_direct_profile, continuity_probe, instantiate, AuxiliaryMapping, GbarRule,
    InstantiationScheme,
};
pub use error::{Error, Result};
pub use game::{ContinuumFamily, FiniteGameInstance, GameType, LargeGameSpec, Population};
pub use metrics::{bl_distance, metric_report, prohorov, MetricReport};
pub use model::{societal_summary, ActionSpace, MixedStrategy, StrategyProfile};
pub use payoff::{
    audit, eps_star_from_gains, expected_payoff_exact, expected_payoff_mc, theorem1_curve,
    AuditConfig, AuditMethod, CurveRow, GainReport,
};
pub use realization::{
    concentration_check, estimate_omega, expost_gain, sample_realization, ConcentrationReport,
    RealizationBatch,
};
pub use solver::{
    discretize_population, profile_exploitability, solve_equilibrium, symmetrize,
    ContinuumEquilibrium, SolverConfig,
};
