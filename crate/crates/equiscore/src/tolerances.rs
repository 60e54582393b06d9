//! Numeric thresholds shared across the crate.
//!
//! Every comparison against "should be zero" goes through one of these
//! constants so the whole pipeline can be audited in one place.

/// A density must sum to 1 (weighted) within this bound or the instance
/// is rejected. We reject rather than silently renormalize; renormalizing
/// is available as an explicit opt-in at the CLI.
pub const DENSITY_NORMALIZATION: f64 = 1e-9;

/// Post-correction average-vs-target agreement expected from the
/// closed-form two-population path, where only summation rounding is
/// in play.
pub const EQUAL_AVERAGE: f64 = 1e-9;

/// Agreement expected from quantities that pass through the simplex
/// solver. Looser than [`EQUAL_AVERAGE`]: pivoting accumulates rounding
/// that plain summation does not.
pub const LP_POST_SOLVE: f64 = 1e-7;

/// A returned optimum must satisfy every constraint within this slack.
/// The solver self-checks against it in debug builds.
pub const FEASIBILITY: f64 = 1e-9;

/// Tableau entries with absolute value at or below this are treated as
/// zero when selecting pivots.
pub const PIVOT: f64 = 1e-10;
