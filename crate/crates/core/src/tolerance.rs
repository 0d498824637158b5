//! Numerical tolerances shared by every module.

/// Slack for exact algebraic identities (unitarity, route agreement).
pub const ALGEBRAIC: f64 = 1e-12;

/// Slack for "sums to one" checks on probability distributions.
pub const NORMALIZATION: f64 = 1e-9;

/// Default absolute slack on inequality predicates (EUR, WPDR).
pub const INEQUALITY: f64 = 1e-9;
