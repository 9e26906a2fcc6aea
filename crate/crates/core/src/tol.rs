//! Named tolerances. Lengths marked "scale" are multiplied by the triangle
//! scale `a` (or the largest side) at the point of use.

/// Absolute tolerance on the sum of a triangle's interior angles.
pub const EPS_SHAPE: f64 = 1e-12;

/// Components below this magnitude are ignored when fixing a canonical sign.
pub const EPS_DIR: f64 = 1e-12;

/// Third-line z-component squared at or below this counts as coplanar.
pub const EPS_COPLANAR: f64 = 1e-14;

/// Relative area threshold for a degenerate triangle (times scale^2).
pub const EPS_AREA: f64 = 1e-12;

/// Position tolerance for on-line checks (times scale).
pub const TOL_POS: f64 = 1e-9;

/// Angle tolerance for matching prescribed angles, radians.
pub const TOL_ANG: f64 = 1e-7;

/// Vertices closer than this to the origin (times scale) count as "at O".
pub const ORIGIN_VERTEX: f64 = 1e-9;

/// Minimum torus distance in (theta, psi) between distinct solutions.
pub const DEDUP: f64 = 1e-6;
