//! Value types shared by every other module: triangle shapes, line-angle
//! configurations, lines through the origin and the canonical line triple.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use crate::tol;

/// A point or direction in 3-space.
pub type Vec3 = Vector3<f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("invalid triangle shape: {0}")]
    ShapeInvalid(String),
    #[error("invalid line configuration: {0}")]
    ConfigInvalid(String),
    #[error("line configuration is numerically coplanar (z3^2 = {z3_sq:e})")]
    DegenerateConfig { z3_sq: f64 },
    #[error("zero-length direction vector")]
    ZeroVector,
    #[error("degenerate triangle (area^2 = {area_sq:e})")]
    DegenerateTriangle { area_sq: f64 },
}

/// Interior angles of a triangle, in radians, summing to pi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleShape {
    ang_a: f64,
    ang_b: f64,
    ang_c: f64,
}

impl TriangleShape {
    pub fn new(ang_a: f64, ang_b: f64, ang_c: f64) -> Result<Self, GeomError> {
        validate_shape(ang_a, ang_b, ang_c)
    }

    pub fn ang_a(&self) -> f64 {
        self.ang_a
    }

    pub fn ang_b(&self) -> f64 {
        self.ang_b
    }

    pub fn ang_c(&self) -> f64 {
        self.ang_c
    }

    pub fn angles(&self) -> [f64; 3] {
        [self.ang_a, self.ang_b, self.ang_c]
    }

    /// True when no interior angle exceeds a right angle.
    pub fn is_acute_or_right(&self) -> bool {
        self.angles().iter().all(|&x| x <= PI / 2.0)
    }
}

pub fn validate_shape(ang_a: f64, ang_b: f64, ang_c: f64) -> Result<TriangleShape, GeomError> {
    let angles = [ang_a, ang_b, ang_c];
    if angles.iter().any(|x| !x.is_finite()) {
        return Err(GeomError::ShapeInvalid("angles must be finite".into()));
    }
    for (name, &x) in ["A", "B", "C"].iter().zip(&angles) {
        if x <= 0.0 || x >= PI {
            return Err(GeomError::ShapeInvalid(format!(
                "angle {name} = {x} is outside (0, pi)"
            )));
        }
    }
    let sum = ang_a + ang_b + ang_c;
    if (sum - PI).abs() > tol::EPS_SHAPE {
        return Err(GeomError::ShapeInvalid(format!(
            "angles sum to {sum}, expected pi"
        )));
    }
    Ok(TriangleShape { ang_a, ang_b, ang_c })
}

/// The three angles between pairs of lines: alpha between l2 and l3, beta
/// between l3 and l1, gamma between l1 and l2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineConfig {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl LineConfig {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self, GeomError> {
        validate_config(alpha, beta, gamma)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn angles(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    pub fn orthogonal() -> Self {
        LineConfig {
            alpha: PI / 2.0,
            beta: PI / 2.0,
            gamma: PI / 2.0,
        }
    }
}

pub fn validate_config(alpha: f64, beta: f64, gamma: f64) -> Result<LineConfig, GeomError> {
    let v = [alpha, beta, gamma];
    if v.iter().any(|x| !x.is_finite()) {
        return Err(GeomError::ConfigInvalid("angles must be finite".into()));
    }
    for (name, &x) in ["alpha", "beta", "gamma"].iter().zip(&v) {
        if x <= 0.0 {
            return Err(GeomError::ConfigInvalid(format!("{name} = {x} must be positive")));
        }
        if x >= PI {
            return Err(GeomError::ConfigInvalid(format!("{name} = {x} must be below pi")));
        }
    }
    if alpha + beta + gamma >= 2.0 * PI {
        return Err(GeomError::ConfigInvalid(format!(
            "alpha + beta + gamma = {} must be below 2 pi",
            alpha + beta + gamma
        )));
    }
    if alpha >= beta + gamma {
        return Err(GeomError::ConfigInvalid("alpha < beta + gamma fails".into()));
    }
    if beta >= gamma + alpha {
        return Err(GeomError::ConfigInvalid("beta < gamma + alpha fails".into()));
    }
    if gamma >= alpha + beta {
        return Err(GeomError::ConfigInvalid("gamma < alpha + beta fails".into()));
    }
    Ok(LineConfig { alpha, beta, gamma })
}

/// A line through the origin, stored as a unit direction with canonical sign
/// (first non-negligible component positive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineThroughOrigin {
    dir: Vec3,
}

impl LineThroughOrigin {
    pub fn new(dir: Vec3) -> Result<Self, GeomError> {
        Ok(LineThroughOrigin {
            dir: canonical_unit(dir)?,
        })
    }

    pub fn dir(&self) -> Vec3 {
        self.dir
    }

    /// Distance from `p` to the line.
    pub fn distance(&self, p: &Vec3) -> f64 {
        (p - self.dir * p.dot(&self.dir)).norm()
    }

    /// Scale-aware incidence test.
    pub fn contains(&self, p: &Vec3, tol: f64) -> bool {
        self.distance(p) <= tol * p.norm().max(1.0)
    }
}

/// Normalize `v` and flip it so its first component with magnitude above
/// `EPS_DIR` is positive.
pub fn canonical_unit(v: Vec3) -> Result<Vec3, GeomError> {
    let n = v.norm();
    if !n.is_finite() || n <= 0.0 {
        return Err(GeomError::ZeroVector);
    }
    let u = v / n;
    let lead = u.iter().copied().find(|c| c.abs() > tol::EPS_DIR).unwrap_or(0.0);
    Ok(if lead < 0.0 { -u } else { u })
}

/// Three lines through the origin realizing a [`LineConfig`].
///
/// `rays` holds one oriented unit direction per line such that the pairwise
/// direction angles are exactly (alpha, beta, gamma); ray mode uses these.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineTriple {
    pub l1: LineThroughOrigin,
    pub l2: LineThroughOrigin,
    pub l3: LineThroughOrigin,
    pub rays: [Vec3; 3],
    pub config: LineConfig,
}

impl LineTriple {
    pub fn lines(&self) -> [LineThroughOrigin; 3] {
        [self.l1, self.l2, self.l3]
    }

    pub fn gram_determinant(&self) -> f64 {
        let m = Matrix3::from_columns(&[self.l1.dir(), self.l2.dir(), self.l3.dir()]);
        (m.transpose() * m).determinant()
    }
}

/// Place the lines with l1 on the x-axis, l2 in the xy-plane at angle gamma
/// counterclockwise from the positive x-axis, and l3 in the upper half-space.
pub fn build_canonical_lines(config: &LineConfig) -> Result<LineTriple, GeomError> {
    let (alpha, beta, gamma) = (config.alpha, config.beta, config.gamma);
    let (sg, cg) = gamma.sin_cos();
    let cb = beta.cos();
    let y3 = (alpha.cos() - cb * cg) / sg;
    let z3_sq = 1.0 - cb * cb - y3 * y3;
    if z3_sq <= tol::EPS_COPLANAR {
        return Err(GeomError::DegenerateConfig { z3_sq });
    }
    let d1 = Vec3::new(1.0, 0.0, 0.0);
    let d2 = Vec3::new(cg, sg, 0.0);
    let d3 = Vec3::new(cb, y3, z3_sq.sqrt());
    let d3 = d3 / d3.norm();
    Ok(LineTriple {
        l1: LineThroughOrigin::new(d1)?,
        l2: LineThroughOrigin::new(d2)?,
        l3: LineThroughOrigin::new(d3)?,
        rays: [d1, d2, d3],
        config: *config,
    })
}

/// Angle between two directions in [0, pi], via atan2(|u x v|, u . v).
pub fn angle_between_directions(u: &Vec3, v: &Vec3) -> Result<f64, GeomError> {
    if u.norm() == 0.0 || v.norm() == 0.0 {
        return Err(GeomError::ZeroVector);
    }
    Ok(angle_unchecked(u, v))
}

pub(crate) fn angle_unchecked(u: &Vec3, v: &Vec3) -> f64 {
    u.cross(v).norm().atan2(u.dot(v))
}

/// Angle between two lines, min(theta, pi - theta).
pub fn line_angle(u: &Vec3, v: &Vec3) -> Result<f64, GeomError> {
    let t = angle_between_directions(u, v)?;
    Ok(t.min(PI - t))
}

/// Interior angles of triangle ABC at A, B and C.
pub fn interior_angles(a: &Vec3, b: &Vec3, c: &Vec3) -> Result<(f64, f64, f64), GeomError> {
    let ab = b - a;
    let ac = c - a;
    let bc = c - b;
    let scale = ab.norm().max(ac.norm()).max(bc.norm());
    let area_sq = ab.cross(&ac).norm_squared();
    if scale == 0.0 || area_sq.sqrt() <= tol::EPS_AREA * scale * scale {
        return Err(GeomError::DegenerateTriangle { area_sq });
    }
    let at_a = angle_unchecked(&ab, &ac);
    let at_b = angle_unchecked(&(-ab), &bc);
    let at_c = angle_unchecked(&(-ac), &(-bc));
    Ok((at_a, at_b, at_c))
}
