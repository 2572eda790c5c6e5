//! Numerical tolerances used across the engine, collected in one place so the
//! CLI can record them in run metadata.

/// Absolute tolerance on the first-order residual `nu * g'(w) - 1` when
/// solving for the utility-maximizing quality.
pub const FOC_RESIDUAL_ABS: f64 = 1e-12;

/// Iteration cap for the guarded Newton solve of the first-order condition.
pub const FOC_MAX_ITER: usize = 200;

/// Relative bracket width at which geometric bisection stops.
pub const ROOT_REL_WIDTH: f64 = 1e-13;

/// A threshold root must satisfy `|margin| <= MARGIN_RESIDUAL_REL * alpha * C`.
pub const MARGIN_RESIDUAL_REL: f64 = 1e-9;

/// Upper cap for geometric bracket expansion when hunting the upper threshold.
pub const BRACKET_EXPANSION_CAP: f64 = 1e12;

/// Monopolist profit-ratio roots must satisfy this residual relative to the
/// profit scale.
pub const PROFIT_ROOT_RESIDUAL_REL: f64 = 1e-9;

/// Bliss-point certificates compare equilibrium welfare to the planner value
/// at this relative tolerance.
pub const BLISS_WELFARE_REL: f64 = 1e-8;
