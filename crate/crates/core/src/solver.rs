//! Place a triangle of prescribed shape with one vertex on each of three
//! lines through the origin.
//!
//! For each rotation `theta` of the sliding construction, the lifted vertex
//! sweeps a circle of radius `b sin(A)` centred at the foot F, in the
//! vertical plane through F orthogonal to AB. The third line meets that plane
//! in one point X, and a solution exists at `theta` exactly when X lies on
//! the circle. Clearing the denominator of the plane intersection gives a
//! smooth scalar function of `theta` whose roots are bracketed on a grid and
//! refined by bisection; `psi` is then read off from the position of X on
//! the circle. A third line along the z-axis lies in every such plane and is
//! handled separately.

use std::f64::consts::TAU;

use nalgebra::{Matrix2, Vector2};
use thiserror::Error;

use crate::geom::{
    build_canonical_lines, interior_angles, GeomError, LineConfig, LineTriple, TriangleShape, Vec3,
};
use crate::roots::{scan_periodic, RootKind};
use crate::sullivan::{
    pose_at, spatial_point, torus_gap, z_axis_witnesses, FrameError, SullivanFrame,
};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("no z-axis witness exists for this frame")]
    NotFound,
    #[error(
        "refinement failed on bracket [{lo}, {hi}]: residual {residual:e} exceeds tolerance"
    )]
    NumericalFailure { lo: f64, hi: f64, residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Lines,
    Rays,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Lines => "lines",
            Mode::Rays => "rays",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lines" => Ok(Mode::Lines),
            "rays" => Ok(Mode::Rays),
            other => Err(format!("unknown mode {other:?}, expected lines or rays")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveRequest {
    pub shape: TriangleShape,
    pub config: LineConfig,
    pub scale: f64,
    pub mode: Mode,
    pub scan_n: usize,
    pub tol_pos: f64,
    pub tol_ang: f64,
    pub allow_origin_vertex: bool,
}

impl SolveRequest {
    pub fn new(shape: TriangleShape, config: LineConfig) -> Self {
        SolveRequest {
            shape,
            config,
            scale: 1.0,
            mode: Mode::Lines,
            scan_n: 720,
            tol_pos: tol::TOL_POS,
            tol_ang: tol::TOL_ANG,
            allow_origin_vertex: false,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_scan_n(mut self, scan_n: usize) -> Self {
        self.scan_n = scan_n;
        self
    }

    pub fn allow_origin_vertex(mut self, allow: bool) -> Self {
        self.allow_origin_vertex = allow;
        self
    }

    pub fn check(&self) -> Result<(), SolveError> {
        if self.scan_n < 16 {
            return Err(SolveError::InvalidRequest(format!(
                "scan_n = {} must be at least 16",
                self.scan_n
            )));
        }
        if !(self.tol_pos > 0.0 && self.tol_ang > 0.0) {
            return Err(SolveError::InvalidRequest("tolerances must be positive".into()));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(SolveError::InvalidRequest(format!(
                "scale = {} must be positive",
                self.scale
            )));
        }
        Ok(())
    }

    pub fn frame(&self) -> Result<SullivanFrame, SolveError> {
        Ok(SullivanFrame::new(self.shape, self.config.gamma(), self.scale)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solution {
    pub theta: f64,
    pub psi: f64,
    pub a: Vec3,
    pub b: Vec3,
    pub c: Vec3,
    /// Distance of C from the third line.
    pub residual: f64,
    pub angles: [f64; 3],
    /// |BC|, |CA|, |AB|.
    pub sides: [f64; 3],
}

impl Solution {
    pub fn vertices(&self) -> [Vec3; 3] {
        [self.a, self.b, self.c]
    }
}

/// The third line written as x = m z, y = n z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line3Param {
    pub m: f64,
    pub n: f64,
    pub is_z_axis: bool,
}

impl Line3Param {
    pub fn from_direction(d: &Vec3) -> Self {
        let m = d.x / d.z;
        let n = d.y / d.z;
        Line3Param {
            m,
            n,
            is_z_axis: m.abs() <= tol::EPS_DIR && n.abs() <= tol::EPS_DIR,
        }
    }
}

pub fn residual_to_l3(frame: &SullivanFrame, lines: &LineTriple, theta: f64, psi: f64) -> f64 {
    lines.l3.distance(&spatial_point(frame, theta, psi).c)
}

/// Parameter pairs placing the lifted vertex on the z-axis.
pub fn solve_z_axis(frame: &SullivanFrame, scan_n: usize) -> Result<Vec<(f64, f64)>, SolveError> {
    let w: Vec<(f64, f64)> = z_axis_witnesses(frame, scan_n)
        .into_iter()
        .map(|w| (w.theta, w.psi))
        .collect();
    if w.is_empty() {
        Err(SolveError::NotFound)
    } else {
        Ok(w)
    }
}

struct Candidate {
    theta: f64,
    psi: f64,
    bracket: (f64, f64),
    certain: bool,
}

pub fn solve(req: &SolveRequest) -> Result<Vec<Solution>, SolveError> {
    req.check()?;
    let lines = build_canonical_lines(&req.config)?;
    let frame = req.frame()?;
    let scale = frame.scale();
    let d3 = lines.rays[2];
    let param = Line3Param::from_direction(&d3);

    let candidates = if param.is_z_axis {
        z_axis_witnesses(&frame, req.scan_n)
            .into_iter()
            .map(|w| Candidate {
                theta: w.theta,
                psi: w.psi,
                bracket: w.bracket,
                certain: !w.touching,
            })
            .collect()
    } else {
        general_candidates(&frame, &d3, req.scan_n)
    };

    let pos_tol = req.tol_pos * scale;
    let mut out: Vec<Solution> = Vec::new();
    for cand in candidates {
        let (theta, psi) = polish(&frame, &lines, cand.theta, cand.psi, scale);
        let theta = theta.rem_euclid(TAU);
        let psi = wrap_pi(psi);
        let residual = residual_to_l3(&frame, &lines, theta, psi);
        if residual > pos_tol {
            if cand.certain {
                return Err(SolveError::NumericalFailure {
                    lo: cand.bracket.0,
                    hi: cand.bracket.1,
                    residual,
                });
            }
            continue;
        }
        let sol = assemble(&frame, theta, psi, residual)?;
        let near_origin = tol::ORIGIN_VERTEX * scale;
        if !req.allow_origin_vertex && sol.vertices().iter().any(|v| v.norm() <= near_origin) {
            continue;
        }
        if req.mode == Mode::Rays
            && sol
                .vertices()
                .iter()
                .zip(&lines.rays)
                .any(|(v, r)| v.dot(r) < -pos_tol)
        {
            continue;
        }
        let dup = out
            .iter()
            .any(|s| torus_gap(s.theta, theta).max(torus_gap(s.psi, psi)) <= tol::DEDUP);
        if !dup {
            out.push(sol);
        }
    }
    out.sort_by(|x, y| x.theta.total_cmp(&y.theta).then(x.psi.total_cmp(&y.psi)));
    Ok(out)
}

fn wrap_pi(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > std::f64::consts::PI {
        y - TAU
    } else {
        y
    }
}

fn assemble(frame: &SullivanFrame, theta: f64, psi: f64, residual: f64) -> Result<Solution, SolveError> {
    let pose = pose_at(frame, theta);
    let c = spatial_point(frame, theta, psi).c;
    let (x, y, z) = interior_angles(&pose.a, &pose.b, &c)?;
    Ok(Solution {
        theta,
        psi,
        a: pose.a,
        b: pose.b,
        c,
        residual,
        angles: [x, y, z],
        sides: [(c - pose.b).norm(), (pose.a - c).norm(), (pose.b - pose.a).norm()],
    })
}

/// Signed mismatch between the swing circle and the third line at `theta`,
/// multiplied through by `(d3 . w)^2` so it stays finite when the line is
/// parallel to the swing plane.
fn swing_mismatch(frame: &SullivanFrame, d3: &Vec3, theta: f64) -> f64 {
    let pose = pose_at(frame, theta);
    let w = pose.along();
    let dw = d3.dot(&w);
    let fw = pose.f.dot(&w);
    let r = frame.swing_radius();
    (fw * d3 - dw * pose.f).norm_squared() - r * r * dw * dw
}

fn general_candidates(frame: &SullivanFrame, d3: &Vec3, scan_n: usize) -> Vec<Candidate> {
    let scale = frame.scale();
    let g = |theta: f64| swing_mismatch(frame, d3, theta);
    let touch = 1e-3 * tol::TOL_POS * scale * scale;
    let mut out = Vec::new();
    for root in scan_periodic(&g, 0.0, TAU, scan_n, touch) {
        let pose = pose_at(frame, root.x);
        let (w, u) = (pose.along(), pose.across());
        let dw = d3.dot(&w);
        let fw = pose.f.dot(&w);
        let certain = root.kind == RootKind::SignChange;
        let mut push = |x: Vec3| {
            let rel = x - pose.f;
            out.push(Candidate {
                theta: root.x,
                psi: rel.z.atan2(rel.dot(&u)),
                bracket: root.bracket,
                certain,
            });
        };
        if dw.abs() > 1e-9 {
            push(d3 * (fw / dw));
        } else {
            // Third line (nearly) inside the swing plane: meet it with the
            // circle directly.
            let p = d3.dot(&pose.f);
            let disc = p * p - pose.f.norm_squared() + frame.swing_radius().powi(2);
            if disc >= 0.0 {
                let s = disc.sqrt();
                push(d3 * (p + s));
                push(d3 * (p - s));
            }
        }
    }
    out
}

/// Gauss-Newton on the offset of the lifted vertex from the third line.
fn polish(frame: &SullivanFrame, lines: &LineTriple, theta: f64, psi: f64, scale: f64) -> (f64, f64) {
    let d3 = lines.rays[2];
    let offset = |t: f64, p: f64| {
        let c = spatial_point(frame, t, p).c;
        c - d3 * c.dot(&d3)
    };
    let (mut t, mut p) = (theta, psi);
    let mut r = offset(t, p);
    let target = 1e-13 * scale;
    for _ in 0..8 {
        if r.norm() <= target {
            break;
        }
        let h = 1e-7;
        let jt = (offset(t + h, p) - offset(t - h, p)) / (2.0 * h);
        let jp = (offset(t, p + h) - offset(t, p - h)) / (2.0 * h);
        let jtj = Matrix2::new(jt.dot(&jt), jt.dot(&jp), jp.dot(&jt), jp.dot(&jp));
        let rhs = Vector2::new(jt.dot(&r), jp.dot(&r));
        let Some(step) = jtj.lu().solve(&rhs) else {
            break;
        };
        let (nt, np) = (t - step.x, p - step.y);
        let nr = offset(nt, np);
        if nr.norm() >= r.norm() {
            break;
        }
        (t, p, r) = (nt, np, nr);
    }
    (t, p)
}

/// Per-constraint deviations of a solution against its request.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    /// Distances of A, B, C from their lines.
    pub line_distances: [f64; 3],
    pub on_line: [bool; 3],
    /// Achieved minus prescribed interior angle at A, B, C.
    pub angle_errors: [f64; 3],
    pub angles_ok: bool,
    /// Achieved minus expected |BC|, |CA|, |AB|.
    pub side_errors: [f64; 3],
    pub sides_ok: bool,
    /// Projections of A, B, C onto their ray directions (ray mode only).
    pub ray_projections: Option<[f64; 3]>,
    pub rays_ok: bool,
    pub pass: bool,
}

impl VerificationReport {
    pub fn max_line_distance(&self) -> f64 {
        self.line_distances.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_angle_error(&self) -> f64 {
        self.angle_errors.iter().fold(0.0, |m, e| m.max(e.abs()))
    }
}

pub fn verify(sol: &Solution, req: &SolveRequest) -> Result<VerificationReport, SolveError> {
    let lines = build_canonical_lines(&req.config)?;
    let frame = req.frame()?;
    let pos_tol = req.tol_pos * frame.scale();
    let verts = sol.vertices();
    let line_distances = [
        lines.l1.distance(&verts[0]),
        lines.l2.distance(&verts[1]),
        lines.l3.distance(&verts[2]),
    ];
    let on_line = line_distances.map(|d| d <= pos_tol);

    let achieved = interior_angles(&verts[0], &verts[1], &verts[2])
        .map(|(x, y, z)| [x, y, z])
        .unwrap_or([f64::NAN; 3]);
    let target = req.shape.angles();
    let angle_errors = [0, 1, 2].map(|i| achieved[i] - target[i]);
    let angles_ok = angle_errors.iter().all(|e| e.abs() <= req.tol_ang);

    let expected = [frame.a, frame.b, frame.c];
    let got = [
        (verts[2] - verts[1]).norm(),
        (verts[0] - verts[2]).norm(),
        (verts[1] - verts[0]).norm(),
    ];
    let side_errors = [0, 1, 2].map(|i| got[i] - expected[i]);
    let sides_ok = side_errors.iter().all(|e| e.abs() <= pos_tol);

    let (ray_projections, rays_ok) = match req.mode {
        Mode::Lines => (None, true),
        Mode::Rays => {
            let p = [0, 1, 2].map(|i| verts[i].dot(&lines.rays[i]));
            (Some(p), p.iter().all(|&x| x >= -pos_tol))
        }
    };
    let pass = on_line.iter().all(|&b| b) && angles_ok && sides_ok && rays_ok;
    Ok(VerificationReport {
        line_distances,
        on_line,
        angle_errors,
        angles_ok,
        side_errors,
        sides_ok,
        ray_projections,
        rays_ok,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::validate_shape;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    fn equilateral() -> TriangleShape {
        validate_shape(FRAC_PI_3, FRAC_PI_3, FRAC_PI_3).unwrap()
    }

    fn witness_psi() -> f64 {
        (2.0f64 / 3.0).sqrt().atan2(1.0 / 3f64.sqrt())
    }

    #[test]
    fn residual_examples() {
        let lines = build_canonical_lines(&LineConfig::orthogonal()).unwrap();
        let frame = SullivanFrame::new(equilateral(), FRAC_PI_2, 1.0).unwrap();
        assert!(residual_to_l3(&frame, &lines, FRAC_PI_4, witness_psi()) < 1e-12);
        assert!(residual_to_l3(&frame, &lines, 0.3, 0.0) > 0.1);
        for (t, p) in [(0.3, 0.4), (1.7, 2.9), (5.0, 1.1)] {
            assert_abs_diff_eq!(
                residual_to_l3(&frame, &lines, t, p),
                residual_to_l3(&frame, &lines, t, -p),
                epsilon = 1e-14
            );
        }
        let cfg = LineConfig::new(1.2, 1.0, 0.9).unwrap();
        let lines = build_canonical_lines(&cfg).unwrap();
        let frame = SullivanFrame::new(equilateral(), 0.9, 1.0).unwrap();
        assert!(residual_to_l3(&frame, &lines, 0.5, 0.0) > 0.0);
    }

    #[test]
    fn worked_orthogonal_equilateral_solution() {
        let req = SolveRequest::new(equilateral(), LineConfig::orthogonal());
        let sols = solve(&req).unwrap();
        let s = sols
            .iter()
            .find(|s| (s.theta - FRAC_PI_4).abs() < 1e-9 && (s.psi - witness_psi()).abs() < 1e-9)
            .expect("worked solution present");
        assert_abs_diff_eq!(s.a, Vec3::new(FRAC_1_SQRT_2, 0.0, 0.0), epsilon = 1e-12);
        assert_abs_diff_eq!(s.b, Vec3::new(0.0, FRAC_1_SQRT_2, 0.0), epsilon = 1e-12);
        assert_abs_diff_eq!(s.c, Vec3::new(0.0, 0.0, FRAC_1_SQRT_2), epsilon = 1e-12);
        for x in s.angles {
            assert_abs_diff_eq!(x, FRAC_PI_3, epsilon = 1e-12);
        }
        let report = verify(s, &req).unwrap();
        assert!(report.pass);
        assert!(report.max_angle_error() < 1e-10);
        // all eight (theta, +-psi) pairs over the four quarter turns
        assert_eq!(sols.len(), 8);
    }

    #[test]
    fn right_isosceles_on_orthogonal_lines_hugs_the_origin() {
        // The right angle must sit at (or, since fl(pi/2) < pi/2, within a
        // few 1e-9 of) the origin.
        let shape = validate_shape(FRAC_PI_2, FRAC_PI_4, FRAC_PI_4).unwrap();
        for allow in [false, true] {
            let req = SolveRequest::new(shape, LineConfig::orthogonal()).allow_origin_vertex(allow);
            let sols = solve(&req).unwrap();
            assert!(!sols.is_empty());
            for s in &sols {
                assert!(s.a.norm() < 1e-6);
                let r = verify(s, &req).unwrap();
                assert!(r.pass, "{r:?}");
                assert!(r.max_angle_error() < 1e-7);
            }
        }
    }

    #[test]
    fn obtuse_on_orthogonal_lines_has_no_solution() {
        let shape = validate_shape(1.9, 0.7, PI - 2.6).unwrap();
        let req = SolveRequest::new(shape, LineConfig::orthogonal());
        assert!(solve(&req).unwrap().is_empty());
    }

    #[test]
    fn rays_mode_keeps_worked_solution() {
        let req = SolveRequest::new(equilateral(), LineConfig::orthogonal()).with_mode(Mode::Rays);
        let sols = solve(&req).unwrap();
        assert!(!sols.is_empty());
        for s in &sols {
            assert!(s.a.x > 0.0 && s.b.y > 0.0 && s.c.z > 0.0);
            assert!(verify(s, &req).unwrap().pass);
        }
    }

    #[test]
    fn general_configuration_solutions_verify() {
        let shape = validate_shape(1.0, 1.2, PI - 2.2).unwrap();
        let cfg = LineConfig::new(1.1, 0.8, 1.3).unwrap();
        let req = SolveRequest::new(shape, cfg).with_scale(2.5);
        let sols = solve(&req).unwrap();
        assert!(!sols.is_empty());
        for s in &sols {
            let r = verify(s, &req).unwrap();
            assert!(r.pass, "{r:?}");
            assert!(s.residual < 1e-12 * 2.5 * 2.0);
        }
    }

    #[test]
    fn perturbed_vertex_fails_verification() {
        let req = SolveRequest::new(equilateral(), LineConfig::orthogonal());
        let mut s = solve(&req).unwrap()[0];
        s.c += Vec3::new(1e-3, 0.0, 0.0);
        let r = verify(&s, &req).unwrap();
        assert!(!r.pass);
        assert!(!r.on_line[2]);
        assert_abs_diff_eq!(r.line_distances[2], 1e-3, epsilon = 1e-9);
        assert_eq!(r, verify(&s, &req).unwrap());
    }

    #[test]
    fn z_axis_not_found_when_predicate_fails() {
        let shape = validate_shape(0.6, PI - 2.6, 2.0).unwrap();
        let frame = SullivanFrame::new(shape, FRAC_PI_2, 1.0).unwrap();
        assert_eq!(solve_z_axis(&frame, 720), Err(SolveError::NotFound));
    }

    #[test]
    fn line3_param_matches_direction() {
        let cfg = LineConfig::new(1.1, 0.8, 1.3).unwrap();
        let d3 = build_canonical_lines(&cfg).unwrap().rays[2];
        let p = Line3Param::from_direction(&d3);
        let v = Vec3::new(p.m, p.n, 1.0);
        assert!(v.cross(&d3).norm() < 1e-14);
        assert!(!p.is_z_axis);
        assert!(Line3Param::from_direction(&Vec3::z()).is_z_axis);
    }

    #[test]
    fn bad_requests_rejected() {
        let req = SolveRequest::new(equilateral(), LineConfig::orthogonal()).with_scan_n(8);
        assert!(matches!(solve(&req), Err(SolveError::InvalidRequest(_))));
        let req = SolveRequest::new(equilateral(), LineConfig::orthogonal()).with_scale(-1.0);
        assert!(matches!(solve(&req), Err(SolveError::InvalidRequest(_))));
    }
}
