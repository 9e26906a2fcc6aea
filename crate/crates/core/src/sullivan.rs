//! The planar sliding-triangle construction and its lift to 3-space.
//!
//! A triangle with the prescribed angles is laid down with vertex A at the
//! origin and B on the ray at angle `gamma`, then rotated by `theta` about
//! the origin and slid along x so that A stays on the x-axis and B stays on
//! the line at angle `gamma`. The third vertex is then swung out of the
//! plane about line AB by `psi`. Every congruent triangle with A on the
//! first line and B on the second is reached by some `(theta, psi)`.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use thiserror::Error;

use crate::geom::{TriangleShape, Vec3};
use crate::roots::{scan_periodic, RootKind};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("scale a = {0} must be positive and finite")]
    BadScale(f64),
    #[error("gamma = {0} must lie strictly between 0 and pi")]
    BadGamma(f64),
}

/// Side lengths opposite A, B, C for a triangle of the given shape with
/// `a` as the side opposite A.
pub fn derive_sides(shape: &TriangleShape, a: f64) -> (f64, f64, f64) {
    let k = a / shape.ang_a().sin();
    (a, k * shape.ang_b().sin(), k * shape.ang_c().sin())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SullivanFrame {
    pub shape: TriangleShape,
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl SullivanFrame {
    pub fn new(shape: TriangleShape, gamma: f64, a: f64) -> Result<Self, FrameError> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(FrameError::BadScale(a));
        }
        if !(gamma > 0.0 && gamma < PI) {
            return Err(FrameError::BadGamma(gamma));
        }
        let (a, b, c) = derive_sides(&shape, a);
        Ok(SullivanFrame { shape, gamma, a, b, c })
    }

    /// Largest side length; used to scale tolerances.
    pub fn scale(&self) -> f64 {
        self.a.max(self.b).max(self.c)
    }

    /// `c csc(gamma)`: the diameter of the moving circle, and the amplitude
    /// of A's slide along the x-axis.
    pub fn slide(&self) -> f64 {
        self.c / self.gamma.sin()
    }

    /// Distance from C' to line AB, i.e. the radius of the circle swept by
    /// the lifted vertex.
    pub fn swing_radius(&self) -> f64 {
        self.b * self.shape.ang_a().sin()
    }
}

/// Unrotated triangle: A0 at the origin, B0 on the ray at angle gamma.
pub fn base_triangle(frame: &SullivanFrame) -> [Vec3; 3] {
    let g = frame.gamma;
    let ga = g + frame.shape.ang_a();
    [
        Vec3::zeros(),
        Vec3::new(frame.c * g.cos(), frame.c * g.sin(), 0.0),
        Vec3::new(frame.b * ga.cos(), frame.b * ga.sin(), 0.0),
    ]
}

/// Planar state at one `theta`. `cp` and `cpp` are C' and its reflection
/// across line AB; `f` is the foot of the perpendicular from C' to AB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarPose {
    pub theta: f64,
    pub a: Vec3,
    pub b: Vec3,
    pub cp: Vec3,
    pub cpp: Vec3,
    pub f: Vec3,
}

impl PlanarPose {
    /// Unit direction of AB.
    pub fn along(&self) -> Vec3 {
        let t = self.b - self.a;
        t / t.norm()
    }

    /// In-plane unit normal to AB, pointing from F toward C'.
    pub fn across(&self) -> Vec3 {
        let w = self.along();
        Vec3::new(-w.y, w.x, 0.0)
    }
}

pub fn pose_at(frame: &SullivanFrame, theta: f64) -> PlanarPose {
    let ang_a = frame.shape.ang_a();
    let shift = frame.slide() * theta.sin();
    let dir = frame.gamma + theta;
    let (b, c) = (frame.b, frame.c);
    let at = |len: f64, phi: f64| Vec3::new(len * phi.cos() + shift, len * phi.sin(), 0.0);
    PlanarPose {
        theta,
        a: Vec3::new(shift, 0.0, 0.0),
        b: at(c, dir),
        cp: at(b, ang_a + dir),
        cpp: at(b, dir - ang_a),
        f: at(b * ang_a.cos(), dir),
    }
}

/// The lifted third vertex at `(theta, psi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialCandidate {
    pub theta: f64,
    pub psi: f64,
    pub c: Vec3,
}

pub fn spatial_point(frame: &SullivanFrame, theta: f64, psi: f64) -> SpatialCandidate {
    let ang_a = frame.shape.ang_a();
    let dir = frame.gamma + theta;
    let (sd, cd) = dir.sin_cos();
    let (sp, cp) = psi.sin_cos();
    let near = frame.b * ang_a.cos();
    let far = frame.swing_radius();
    let shift = frame.slide() * theta.sin();
    SpatialCandidate {
        theta,
        psi,
        c: Vec3::new(
            near * cd + shift - far * sd * cp,
            near * sd + far * cd * cp,
            far * sp,
        ),
    }
}

/// The circle through O, A(theta) and B(theta):
/// `x^2 + y^2 = c csc(gamma) (sin(theta) x + cos(theta) y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovingCircle {
    pub theta: f64,
    pub center: Vec3,
    pub radius: f64,
    diameter: f64,
}

impl MovingCircle {
    /// Implicit form; negative inside, zero on the circle, positive outside.
    pub fn value(&self, p: &Vec3) -> f64 {
        let (s, c) = self.theta.sin_cos();
        p.x * p.x + p.y * p.y - self.diameter * (s * p.x + c * p.y)
    }

    pub fn point_at(&self, phi: f64) -> Vec3 {
        self.center + self.radius * Vec3::new(phi.cos(), phi.sin(), 0.0)
    }
}

pub fn circle_oab(frame: &SullivanFrame, theta: f64) -> MovingCircle {
    let d = frame.slide();
    let (s, c) = theta.sin_cos();
    MovingCircle {
        theta,
        center: Vec3::new(0.5 * d * s, 0.5 * d * c, 0.0),
        radius: 0.5 * d,
        diameter: d,
    }
}

/// Planar rigid motion carrying the `theta = 0` pose to the `theta` pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidMotion {
    sin: f64,
    cos: f64,
    shift: f64,
}

impl RigidMotion {
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        Vec3::new(
            p.x * self.cos - p.y * self.sin + self.shift,
            p.x * self.sin + p.y * self.cos,
            p.z,
        )
    }

    pub fn invert(&self, p: &Vec3) -> Vec3 {
        let x = p.x - self.shift;
        Vec3::new(x * self.cos + p.y * self.sin, -x * self.sin + p.y * self.cos, p.z)
    }
}

pub fn rigid_motion(frame: &SullivanFrame, theta: f64) -> RigidMotion {
    let (sin, cos) = theta.sin_cos();
    RigidMotion {
        sin,
        cos,
        shift: frame.slide() * sin,
    }
}

/// Does segment C'C'' meet the circle OAB (tangency included)? Evaluated
/// at theta = 0; the answer does not depend on theta.
pub fn predicate_ii(frame: &SullivanFrame) -> bool {
    segment_meets_circle(frame, 0.0)
}

pub fn segment_meets_circle(frame: &SullivanFrame, theta: f64) -> bool {
    let pose = pose_at(frame, theta);
    let circle = circle_oab(frame, theta);
    let u = pose.across();
    let r = frame.swing_radius();
    // value(F + s u) = s^2 + p s + q on s in [-r, r]
    let (sn, cs) = theta.sin_cos();
    let q_dir = Vec3::new(sn, cs, 0.0);
    let p = 2.0 * pose.f.dot(&u) - circle.diameter * q_dir.dot(&u);
    let q = circle.value(&pose.f);
    let at = |s: f64| s * s + p * s + q;
    let s_min = (-0.5 * p).clamp(-r, r);
    if at(s_min) > 0.0 {
        return false;
    }
    at(-r) >= 0.0 || at(r) >= 0.0
}

/// F on or inside circle OAB, and angle C at most max(gamma, pi - gamma).
pub fn predicate_iii(frame: &SullivanFrame) -> bool {
    foot_inside(frame) && frame.shape.ang_c() <= frame.gamma.max(PI - frame.gamma)
}

/// Same as [`predicate_iii`] with the angle clause in cosine form.
pub fn predicate_iv(frame: &SullivanFrame) -> bool {
    let (cg, cc) = (frame.gamma.cos(), frame.shape.ang_c().cos());
    foot_inside(frame) && (cg <= cc || cg >= -cc)
}

fn foot_inside(frame: &SullivanFrame) -> bool {
    let pose = pose_at(frame, 0.0);
    circle_oab(frame, 0.0).value(&pose.f) <= 0.0
}

/// A parameter pair placing the lifted vertex on the z-axis. `touching`
/// marks pairs recovered from a double root, whose `theta` is only known to
/// about the square root of machine precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZWitness {
    pub theta: f64,
    pub psi: f64,
    pub bracket: (f64, f64),
    pub touching: bool,
}

/// All `(theta, psi)` with the lifted vertex on the z-axis, found by
/// scanning theta for the origin crossing the line C'C'' and keeping
/// crossings inside the segment. Mirror pairs `(theta, +-psi)` are both
/// returned.
pub fn z_axis_witnesses(frame: &SullivanFrame, scan_n: usize) -> Vec<ZWitness> {
    let h = |theta: f64| {
        let pose = pose_at(frame, theta);
        pose.f.dot(&pose.along())
    };
    let r = frame.swing_radius();
    let scale = frame.scale();
    let mut out: Vec<ZWitness> = Vec::new();
    for root in scan_periodic(&h, 0.0, TAU, scan_n, 1e-3 * tol::TOL_POS * scale) {
        let theta = root.x.rem_euclid(TAU);
        let pose = pose_at(frame, theta);
        let s = pose.f.dot(&pose.across());
        if s.abs() > r * (1.0 + 1e-12) {
            continue;
        }
        let psi = (r * r - s * s).max(0.0).sqrt().atan2(-s);
        for cand in [psi, -psi] {
            let dup = out.iter().any(|w| {
                torus_gap(w.theta, theta) <= tol::DEDUP && torus_gap(w.psi, cand) <= tol::DEDUP
            });
            if !dup {
                out.push(ZWitness {
                    theta,
                    psi: cand,
                    bracket: root.bracket,
                    touching: root.kind == RootKind::Touch,
                });
            }
        }
    }
    out
}

/// Lifted vertex reaches the z-axis for some `(theta, psi)`; returns one
/// witness, preferring positive psi.
pub fn predicate_i_solvable_z(frame: &SullivanFrame, scan_n: usize) -> Option<(f64, f64)> {
    let w = z_axis_witnesses(frame, scan_n);
    w.iter()
        .find(|w| w.psi >= 0.0)
        .or_else(|| w.first())
        .map(|w| (w.theta, w.psi))
}

/// Distance between two angles on the circle.
pub fn torus_gap(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(TAU);
    d.min(TAU - d)
}

/// SVG drawing of the planar construction at `theta`: circle OAB, segments
/// AB and C'C'', and labelled points O, A, B, C', C'', F.
pub fn construction_svg(frame: &SullivanFrame, theta: f64) -> String {
    let pose = pose_at(frame, theta);
    let circle = circle_oab(frame, theta);
    let pts = [
        ("O", Vec3::zeros()),
        ("A", pose.a),
        ("B", pose.b),
        ("C'", pose.cp),
        ("C''", pose.cpp),
        ("F", pose.f),
    ];
    let mut lo = circle.center - Vec3::repeat(circle.radius);
    let mut hi = circle.center + Vec3::repeat(circle.radius);
    for (_, p) in &pts {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let pad = 0.1 * (hi - lo).max();
    let (x0, y0) = (lo.x - pad, lo.y - pad);
    let (w, h) = (hi.x - lo.x + 2.0 * pad, hi.y - lo.y + 2.0 * pad);
    let stroke = 0.004 * w.max(h);
    // y is flipped so the drawing reads with +y up.
    let fy = |y: f64| 0.0 - y;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.17e} {:.17e} {:.17e} {:.17e}">"#,
        x0,
        fy(y0 + h),
        w,
        h
    );
    let _ = writeln!(
        s,
        r#"  <circle id="circle-oab" cx="{:.17e}" cy="{:.17e}" r="{:.17e}" fill="none" stroke="black" stroke-width="{stroke:.6e}"/>"#,
        circle.center.x,
        fy(circle.center.y),
        circle.radius
    );
    for (id, p, q, color) in [
        ("segment-ab", pose.a, pose.b, "blue"),
        ("segment-cp-cpp", pose.cp, pose.cpp, "red"),
    ] {
        let _ = writeln!(
            s,
            r#"  <line id="{id}" x1="{:.17e}" y1="{:.17e}" x2="{:.17e}" y2="{:.17e}" stroke="{color}" stroke-width="{stroke:.6e}"/>"#,
            p.x,
            fy(p.y),
            q.x,
            fy(q.y)
        );
    }
    for (name, p) in &pts {
        let _ = writeln!(
            s,
            r#"  <circle class="point" data-name="{name}" cx="{:.17e}" cy="{:.17e}" r="{:.6e}"/>"#,
            p.x,
            fy(p.y),
            2.0 * stroke
        );
        let _ = writeln!(
            s,
            r#"  <text x="{:.17e}" y="{:.17e}" font-size="{:.6e}">{}</text>"#,
            p.x + 3.0 * stroke,
            fy(p.y) - 3.0 * stroke,
            12.0 * stroke,
            name.replace('\'', "&#39;")
        );
    }
    s.push_str("</svg>\n");
    s
}
