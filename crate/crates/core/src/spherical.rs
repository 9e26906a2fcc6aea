//! The great-circle side of the problem.
//!
//! A fitted triangle ABC maps to a great circle parallel to its plane; the
//! directions of its sidelines BC, CA, AB meet that circle in the antipodal
//! pairs p1, p2, p3, which also lie on the great circles spanned by pairs of
//! the three lines. The arcs p1-p2, p2-p3 and p3-p1' then equal the interior
//! angles at C, A and B. This module builds that scene, checks it, searches
//! for such a circle by brute force without the triangle, and transfers the
//! result to the elliptic plane.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, Vector2};
use rayon::prelude::*;
use thiserror::Error;

use crate::geom::{canonical_unit, line_angle, GeomError, LineConfig, LineTriple, TriangleShape, Vec3};
use crate::solver::{solve, Solution, SolveError, SolveRequest};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SphericalError {
    #[error("solution triangle has zero area")]
    DegenerateSolution,
    #[error("no labelling puts the six points in cyclic order p1, p2, p3, p1', p2', p3'")]
    OrderUnachievable,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("no rotation carries the constructed points onto the given points (mismatch {0:e})")]
    AlignmentFailed(f64),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreatCircle {
    normal: Vec3,
}

impl GreatCircle {
    pub fn from_normal(n: Vec3) -> Result<Self, GeomError> {
        Ok(GreatCircle {
            normal: canonical_unit(n)?,
        })
    }

    pub fn normal(&self) -> Vec3 {
        self.normal
    }

    /// |cos| of the angle between `p` and the circle's pole; zero on the circle.
    pub fn offset(&self, p: &Vec3) -> f64 {
        self.normal.dot(p).abs()
    }
}

/// Circle j is spanned by the two lines other than line j.
pub fn circles_from_lines(lines: &LineTriple) -> [GreatCircle; 3] {
    let [d1, d2, d3] = lines.rays;
    // The lines are linearly independent, so every cross product is nonzero.
    [d2.cross(&d3), d3.cross(&d1), d1.cross(&d2)].map(|n| GreatCircle::from_normal(n).unwrap())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphericalScene {
    pub circles: [GreatCircle; 3],
    pub cutting: GreatCircle,
    /// Unit normal fixing the direction of travel along the cutting circle
    /// (counterclockwise about it); equal to the cutting normal up to sign.
    pub travel: Vec3,
    /// p1, p2, p3, p1', p2', p3' in order of travel.
    pub points: [Vec3; 6],
    /// arc(p1, p2), arc(p2, p3), arc(p3, p1').
    pub arcs: [f64; 3],
}

impl SphericalScene {
    pub fn arc_sum(&self) -> f64 {
        self.arcs.iter().sum()
    }
}

/// Lay out representatives of three line classes through the origin, all in
/// the plane orthogonal to `axis`, so that p1, p2, p3 come in increasing
/// order within half a turn counterclockwise about `axis`. Returns the
/// chosen representatives and the three arcs, or `None` when the classes run
/// the other way round.
fn cyclic_layout(axis: &Vec3, dirs: &[Vec3; 3]) -> Option<([Vec3; 3], [f64; 3])> {
    let e1 = dirs[0].normalize();
    let e2 = axis.normalize().cross(&e1);
    let place = |d: &Vec3| {
        let d = d.normalize();
        let phi = d.dot(&e2).atan2(d.dot(&e1));
        if phi < 0.0 {
            (phi + PI, -d)
        } else {
            (phi, d)
        }
    };
    let (phi2, p2) = place(&dirs[1]);
    let (phi3, p3) = place(&dirs[2]);
    if phi2 > 0.0 && phi2 < phi3 && phi3 < PI {
        Some(([e1, p2, p3], [phi2, phi3 - phi2, PI - phi3]))
    } else {
        None
    }
}

/// Try both directions of travel about `normal`.
fn layout_either_way(normal: &Vec3, dirs: &[Vec3; 3]) -> Option<(Vec3, [Vec3; 3], [f64; 3])> {
    let n = normal.normalize();
    [n, -n]
        .into_iter()
        .find_map(|axis| cyclic_layout(&axis, dirs).map(|(p, arcs)| (axis, p, arcs)))
}

pub fn scene_from_solution(sol: &Solution, lines: &LineTriple) -> Result<SphericalScene, SphericalError> {
    let (a, b, c) = (sol.a, sol.b, sol.c);
    let normal = (b - a).cross(&(c - a));
    let scale = (b - a).norm().max((c - a).norm()).max((c - b).norm());
    if normal.norm() <= tol::EPS_AREA * scale * scale {
        return Err(SphericalError::DegenerateSolution);
    }
    let dirs = [c - b, a - c, b - a];
    let (travel, p, arcs) =
        layout_either_way(&normal, &dirs).ok_or(SphericalError::OrderUnachievable)?;
    Ok(SphericalScene {
        circles: circles_from_lines(lines),
        cutting: GreatCircle::from_normal(normal)?,
        travel,
        points: [p[0], p[1], p[2], -p[0], -p[1], -p[2]],
        arcs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Question1Report {
    /// arc(p1,p2) - C, arc(p2,p3) - A, arc(p3,p1') - B.
    pub deviations: [f64; 3],
    pub arc_sum_error: f64,
    /// Largest |dot| of a point with the normal of a circle it should lie on.
    pub incidence: f64,
    pub pass: bool,
}

impl Question1Report {
    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().fold(0.0, |m, d| m.max(d.abs()))
    }
}

pub fn verify_question1(scene: &SphericalScene, shape: &TriangleShape, tol_ang: f64) -> Question1Report {
    let target = [shape.ang_c(), shape.ang_a(), shape.ang_b()];
    let deviations = [0, 1, 2].map(|i| scene.arcs[i] - target[i]);
    let arc_sum_error = scene.arc_sum() - PI;
    let mut incidence: f64 = 0.0;
    for (j, p) in scene.points.iter().enumerate() {
        incidence = incidence
            .max(scene.cutting.offset(p))
            .max(scene.circles[j % 3].offset(p));
    }
    let pass = deviations.iter().all(|d| d.abs() <= tol_ang)
        && arc_sum_error.abs() <= 1e-10
        && incidence <= 1e-10;
    Question1Report {
        deviations,
        arc_sum_error,
        incidence,
        pass,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub normal: Vec3,
    pub deviation: f64,
    pub arcs: [f64; 3],
    /// Index of the grid sample the winning candidate was refined from.
    pub seed_index: usize,
}

/// Worst arc mismatch for cutting-circle pole `n`, or infinity when the
/// circle coincides with one of the three.
fn oracle_score(n: &Vec3, poles: &[Vec3; 3], target: &[f64; 3]) -> (f64, [f64; 3]) {
    let dirs = poles.map(|c| n.cross(&c));
    if dirs.iter().any(|d| d.norm() < 1e-12) {
        return (f64::INFINITY, [f64::NAN; 3]);
    }
    match layout_either_way(n, &dirs) {
        Some((_, _, arcs)) => {
            let dev = (0..3).fold(0.0f64, |m, i| m.max((arcs[i] - target[i]).abs()));
            (dev, arcs)
        }
        None => (f64::INFINITY, [f64::NAN; 3]),
    }
}

/// Near-uniform points on the upper hemisphere (golden-angle spiral).
pub fn hemisphere_grid(n: usize) -> Vec<Vec3> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

fn tangent_basis(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let t1 = n.cross(&helper).normalize();
    (t1, n.cross(&t1))
}

/// Exhaustive search for a cutting great circle whose arcs match the shape,
/// using only the three circles spanned by the lines.
///
/// Candidate poles come from a golden-angle grid of `n_grid` points on the
/// hemisphere. The best few well-separated grid points are refined by three
/// compass-search passes, each starting at a tenth of the previous step, and
/// then by damped Gauss-Newton steps on the two independent arc equations.
pub fn oracle_search(shape: &TriangleShape, lines: &LineTriple, n_grid: usize) -> Result<OracleResult, SphericalError> {
    if n_grid < 1000 {
        return Err(SphericalError::PreconditionFailed(format!(
            "oracle grid needs at least 1000 points, got {n_grid}"
        )));
    }
    let poles = circles_from_lines(lines).map(|c| c.normal());
    let target = [shape.ang_c(), shape.ang_a(), shape.ang_b()];
    let grid = hemisphere_grid(n_grid);
    let scores: Vec<f64> = grid
        .par_iter()
        .map(|n| oracle_score(n, &poles, &target).0)
        .collect();
    let spacing = (2.0 * PI / n_grid as f64).sqrt();

    let mut order: Vec<usize> = (0..n_grid).filter(|&i| scores[i].is_finite()).collect();
    order.sort_by(|&i, &j| scores[i].total_cmp(&scores[j]).then(i.cmp(&j)));
    let mut seeds: Vec<usize> = Vec::new();
    for &i in &order {
        if seeds.len() == 16 {
            break;
        }
        let far = seeds
            .iter()
            .all(|&s| line_angle(&grid[s], &grid[i]).unwrap_or(0.0) > 3.0 * spacing);
        if far {
            seeds.push(i);
        }
    }

    let refined: Vec<OracleResult> = seeds
        .par_iter()
        .map(|&i| refine_pole(grid[i], spacing, &poles, &target, i))
        .collect();
    let best = refined
        .into_iter()
        .min_by(|x, y| x.deviation.total_cmp(&y.deviation).then(x.seed_index.cmp(&y.seed_index)))
        .ok_or_else(|| SphericalError::PreconditionFailed("no admissible cutting circle on the grid".into()))?;
    Ok(best)
}

fn refine_pole(start: Vec3, spacing: f64, poles: &[Vec3; 3], target: &[f64; 3], seed_index: usize) -> OracleResult {
    let score = |n: &Vec3| oracle_score(n, poles, target).0;
    let mut n = start;
    let mut best = score(&n);
    let dirs: Vec<(f64, f64)> = (0..8)
        .map(|k| {
            let a = k as f64 * PI / 4.0;
            (a.cos(), a.sin())
        })
        .collect();

    for pass in 0..3 {
        let start_step = spacing * 0.1f64.powi(pass);
        let mut step = start_step;
        while step > start_step * 1e-3 {
            let (t1, t2) = tangent_basis(&n);
            let mut moved = false;
            for &(u, v) in &dirs {
                let m = (n + step * (u * t1 + v * t2)).normalize();
                let s = score(&m);
                if s < best {
                    n = m;
                    best = s;
                    moved = true;
                    break;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
    }

    // Damped Gauss-Newton on (arc1 - C, arc1 + arc2 - C - A) in tangent
    // coordinates; smooth, unlike the max-norm score above.
    let resid = |m: &Vec3| -> Option<Vector2<f64>> {
        let (_, arcs) = oracle_score(m, poles, target);
        if arcs[0].is_nan() {
            return None;
        }
        Some(Vector2::new(arcs[0] - target[0], arcs[0] + arcs[1] - target[0] - target[1]))
    };
    let mut damping = 1e-3;
    for _ in 0..100 {
        let Some(r0) = resid(&n) else { break };
        if r0.norm() <= 1e-15 {
            break;
        }
        let (t1, t2) = tangent_basis(&n);
        let h = 1e-7;
        let at = |u: f64, v: f64| resid(&(n + u * t1 + v * t2).normalize());
        let (Some(up), Some(um), Some(vp), Some(vm)) = (at(h, 0.0), at(-h, 0.0), at(0.0, h), at(0.0, -h))
        else {
            break;
        };
        let jac = Matrix2::from_columns(&[(up - um) / (2.0 * h), (vp - vm) / (2.0 * h)]);
        let jtj = jac.transpose() * jac;
        let g = jac.transpose() * r0;
        let mut improved = false;
        while damping < 1e8 {
            let Some(step) = (jtj + Matrix2::identity() * damping).lu().solve(&g) else {
                break;
            };
            let m = (n - step.x * t1 - step.y * t2).normalize();
            if let Some(r1) = resid(&m) {
                if r1.norm() < r0.norm() {
                    n = m;
                    damping = (damping * 0.1).max(1e-12);
                    improved = true;
                    break;
                }
            }
            damping *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let (deviation, arcs) = oracle_score(&n, poles, target);
    OracleResult {
        normal: canonical_unit(n).unwrap_or(n),
        deviation,
        arcs,
        seed_index,
    }
}

/// A point of the elliptic plane: a pair of antipodal unit vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticPoint {
    rep: Vec3,
}

impl EllipticPoint {
    pub fn new(v: Vec3) -> Result<Self, GeomError> {
        Ok(EllipticPoint {
            rep: canonical_unit(v)?,
        })
    }

    pub fn rep(&self) -> Vec3 {
        self.rep
    }

    /// Elliptic distance, in [0, pi/2].
    pub fn distance(&self, other: &EllipticPoint) -> f64 {
        line_angle(&self.rep, &other.rep).unwrap_or(0.0)
    }
}

/// |det| of three unit representatives; zero when the points are collinear.
pub fn collinearity(p: &EllipticPoint, q: &EllipticPoint, r: &EllipticPoint) -> f64 {
    Matrix3::from_columns(&[p.rep, q.rep, r.rep]).determinant().abs()
}

/// Given collinear P1, P2, P3 with elliptic distances at most pi/2 summing
/// to pi, build Q1, Q2, Q3 with P1 on line Q2Q3, P2 on Q3Q1, P3 on Q1Q2 and
/// side lengths min(alpha, pi - alpha), min(beta, pi - beta),
/// min(gamma, pi - gamma).
pub fn elliptic_construct(p: [EllipticPoint; 3], config: &LineConfig) -> Result<[EllipticPoint; 3], SphericalError> {
    let det = collinearity(&p[0], &p[1], &p[2]);
    if det > 1e-10 {
        return Err(SphericalError::PreconditionFailed(format!(
            "points are not collinear (|det| = {det:e})"
        )));
    }
    let d23 = p[1].distance(&p[2]);
    let d31 = p[2].distance(&p[0]);
    let d12 = p[0].distance(&p[1]);
    let sum = d23 + d31 + d12;
    if (sum - PI).abs() > 1e-9 {
        return Err(SphericalError::PreconditionFailed(format!(
            "distances sum to {sum}, expected pi"
        )));
    }
    if [d23, d31, d12].iter().any(|&d| d <= 0.0 || d > PI / 2.0 + 1e-12) {
        return Err(SphericalError::PreconditionFailed(
            "each distance must lie in (0, pi/2]".into(),
        ));
    }
    let shape = TriangleShape::new(d23, d31, PI - d23 - d31)
        .map_err(|e| SphericalError::PreconditionFailed(e.to_string()))?;

    let req = SolveRequest::new(shape, *config).allow_origin_vertex(true);
    let sols = solve(&req)?;
    let lines = crate::geom::build_canonical_lines(config)?;
    let sol = sols.first().ok_or_else(|| {
        SphericalError::PreconditionFailed("no fitted triangle for this shape and configuration".into())
    })?;
    let scene = scene_from_solution(sol, &lines)?;
    let rot = align_triples(&[scene.points[0], scene.points[1], scene.points[2]], &p)?;
    let [q1, q2, q3] = lines.rays.map(|d| EllipticPoint::new(rot * d));
    Ok([q1?, q2?, q3?])
}

/// Rotation carrying the class of `src[j]` onto `dst[j]` for each j, built
/// from frames anchored at the first point and the direction toward the
/// second.
fn align_triples(src: &[Vec3; 3], dst: &[EllipticPoint; 3]) -> Result<Matrix3<f64>, SphericalError> {
    let frame = |a: Vec3, b: Vec3| -> Option<Matrix3<f64>> {
        let e1 = a.normalize();
        let t = b - e1 * b.dot(&e1);
        if t.norm() < 1e-12 {
            return None;
        }
        let e2 = t.normalize();
        Some(Matrix3::from_columns(&[e1, e2, e1.cross(&e2)]))
    };
    let source = frame(src[0], src[1]).ok_or(SphericalError::AlignmentFailed(f64::INFINITY))?;
    let want_c = src[0].normalize().dot(&src[1].normalize());
    let mut best: Option<(f64, Matrix3<f64>)> = None;
    for s1 in [1.0, -1.0] {
        for s2 in [1.0, -1.0] {
            let (a, b) = (dst[0].rep() * s1, dst[1].rep() * s2);
            if (a.dot(&b) - want_c).abs() > 1e-6 {
                continue;
            }
            let Some(target) = frame(a, b) else { continue };
            let rot = target * source.transpose();
            let miss = (rot * src[2].normalize()).cross(&dst[2].rep()).norm();
            if best.is_none_or(|(m, _)| miss < m) {
                best = Some((miss, rot));
            }
        }
    }
    match best {
        Some((miss, rot)) if miss <= 1e-6 => Ok(rot),
        Some((miss, _)) => Err(SphericalError::AlignmentFailed(miss)),
        None => Err(SphericalError::AlignmentFailed(f64::INFINITY)),
    }
}
