//! Numerical engine for a digital content market with suppliers, a single
//! intermediary, and homogeneous consumers.
//!
//! Consumers can buy the intermediary's content for a fee or produce their
//! own with the same technology; the intermediary survives only where
//! matching the consumers' outside option is affordable. The engine computes
//! the subgame-perfect equilibrium, the production-cost thresholds bounding
//! the intermediated regime, welfare and quality metrics, the monopolist /
//! marginal-cost / linear-fee extensions, and a grid-based brute-force
//! oracle that re-derives everything from the raw game definitions for
//! cross-checking.
//!
//! All operations are pure functions of immutable inputs and safe to call
//! from any number of threads.

pub mod cost;
pub mod equilibrium;
mod error;
pub mod extensions;
pub mod market;
pub mod oracle;
mod root;
pub mod tolerances;
pub mod welfare;

pub use cost::{CostFamily, CostModel};
pub use equilibrium::{
    closed_form_thresholds_power, compute_thresholds, compute_thresholds_real,
    disintermediation_margin, interior_minimizer, solve_equilibrium, usage, ConsumerAction,
    EquilibriumOutcome, Provider, Regime, Thresholds,
};
pub use error::{Error, Result};
pub use market::{CostSource, EffectiveCost, MarketParams};
pub use welfare::{
    bliss_point, consumer_utility, content_quality, intermediary_utility, planner_welfare,
    social_welfare, welfare_report, WelfareReport,
};
