//! Exact and simulated statistics for sequential-trial stopping rules.
//!
//! A policy is trialed repeatedly; each trial yields a [`TrialOutcome`]
//! (reward or punishment) independently with a fixed reward probability.
//! Four stopping rules end the trialing:
//!
//! | kind                      | stops when                      |
//! |---------------------------|---------------------------------|
//! | `ConsecutiveRewards`      | `m` rewards in a row            |
//! | `TotalRewards`            | `m` rewards in total            |
//! | `ConsecutivePunishments`  | `m` punishments in a row        |
//! | `TotalPunishments`        | `m` punishments in total        |
//!
//! The punishment rules are the reward rules with the roles of reward and
//! punishment swapped, so every punishment-rule quantity is computed by
//! [`reflect`]ing the problem and using the reward-rule formulas.
//!
//! Modules:
//! - [`model`]: domain types and reflection.
//! - [`analytics`]: closed-form moments, cost ratios and exact stopping-time
//!   distributions obtained by generating-function series expansion.
//! - [`automata`]: streaming state machines that detect the stopping event.
//! - [`montecarlo`]: seeded, reproducible episode simulation.
//! - [`decision`]: the two-phase adopt/validate framework.

pub mod analytics;
pub mod automata;
pub mod decision;
mod error;
pub mod model;
pub mod montecarlo;

pub use error::{Error, Result};
pub use model::{
    reflect, CostRatio, CriticalityProfile, DecisionThresholds, Environment, RuleKind, RuleSpec,
    StoppingTimeStats, TrialOutcome,
};
