//! JSON documents exchanged by the command-line tool.
//!
//! Every document carries `"schema": "trifit/1"` and a `units` field. Floats
//! are written with 17 significant digits so output is byte-stable and
//! round-trips exactly. Angles are converted to degrees only when `units`
//! says so; coordinates and lengths are never converted.

use std::f64::consts::PI;
use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::geom::{validate_config, validate_shape, Vec3};
use crate::solver::{Mode, Solution, SolveRequest, VerificationReport};
use crate::spherical::{Question1Report, SphericalScene};

pub const SCHEMA: &str = "trifit/1";

/// Compact JSON with every float printed as `{:.16e}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SeventeenDigits;

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        // Fold -0 into 0.
        let value = if value == 0.0 { 0.0 } else { value };
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits);
    // Serializing plain data into a Vec cannot fail.
    value
        .serialize(&mut ser)
        .expect("serializing to memory");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Radians,
    Degrees,
}

impl Units {
    pub fn from_degrees_flag(degrees: bool) -> Self {
        if degrees {
            Units::Degrees
        } else {
            Units::Radians
        }
    }

    /// Radians to these units.
    pub fn out(&self, x: f64) -> f64 {
        match self {
            Units::Radians => x,
            Units::Degrees => x * 180.0 / PI,
        }
    }

    /// These units to radians.
    pub fn inp(&self, x: f64) -> f64 {
        match self {
            Units::Radians => x,
            Units::Degrees => x * PI / 180.0,
        }
    }

    fn out3(&self, v: [f64; 3]) -> [f64; 3] {
        v.map(|x| self.out(x))
    }

    fn inp3(&self, v: [f64; 3]) -> [f64; 3] {
        v.map(|x| self.inp(x))
    }
}

pub fn pt(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestDoc {
    /// Interior angles A, B, C.
    pub angles: [f64; 3],
    /// Line angles alpha, beta, gamma.
    pub config: [f64; 3],
    pub scale: f64,
    pub mode: String,
    pub scan_n: usize,
    pub tol_pos: f64,
    pub tol_ang: f64,
    pub allow_origin_vertex: bool,
}

impl RequestDoc {
    pub fn from_request(req: &SolveRequest, units: Units) -> Self {
        RequestDoc {
            angles: units.out3(req.shape.angles()),
            config: units.out3(req.config.angles()),
            scale: req.scale,
            mode: req.mode.as_str().into(),
            scan_n: req.scan_n,
            tol_pos: req.tol_pos,
            tol_ang: req.tol_ang,
            allow_origin_vertex: req.allow_origin_vertex,
        }
    }

    /// Rebuild the request. `angle_sum_tol` lets a shape whose angles were
    /// rounded in degrees still validate; it is renormalized to sum to pi.
    pub fn to_request(&self, units: Units, angle_sum_tol: f64) -> Result<SolveRequest, String> {
        let [a, b, c] = normalize_shape(units.inp3(self.angles), angle_sum_tol)?;
        let shape = validate_shape(a, b, c).map_err(|e| e.to_string())?;
        let [al, be, ga] = units.inp3(self.config);
        let config = validate_config(al, be, ga).map_err(|e| e.to_string())?;
        let mode: Mode = self.mode.parse()?;
        let req = SolveRequest {
            shape,
            config,
            scale: self.scale,
            mode,
            scan_n: self.scan_n,
            tol_pos: self.tol_pos,
            tol_ang: self.tol_ang,
            allow_origin_vertex: self.allow_origin_vertex,
        };
        req.check().map_err(|e| e.to_string())?;
        Ok(req)
    }
}

/// Scale three angles so they sum to exactly pi, if they are already within
/// `tol` of it. Typed-in angles like 1.0472 otherwise never validate.
pub fn normalize_shape(angles: [f64; 3], tol: f64) -> Result<[f64; 3], String> {
    if angles.iter().any(|x| !x.is_finite() || *x <= 0.0) {
        return Err(format!("angles {angles:?} must be finite and positive"));
    }
    let sum: f64 = angles.iter().sum();
    if (sum - PI).abs() > tol {
        return Err(format!(
            "angles sum to {sum}, which differs from pi by {:e} (allowed {tol:e})",
            (sum - PI).abs()
        ));
    }
    if (sum - PI).abs() <= crate::tol::EPS_SHAPE {
        return Ok(angles);
    }
    let k = PI / sum;
    let [a, b, _] = angles.map(|x| x * k);
    Ok([a, b, PI - a - b])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDoc {
    pub theta: f64,
    pub psi: f64,
    #[serde(rename = "A")]
    pub a: [f64; 3],
    #[serde(rename = "B")]
    pub b: [f64; 3],
    #[serde(rename = "C")]
    pub c: [f64; 3],
    pub residual: f64,
    pub angles: [f64; 3],
    pub sides: [f64; 3],
}

impl SolutionDoc {
    pub fn from_solution(s: &Solution, units: Units) -> Self {
        SolutionDoc {
            theta: units.out(s.theta),
            psi: units.out(s.psi),
            a: pt(&s.a),
            b: pt(&s.b),
            c: pt(&s.c),
            residual: s.residual,
            angles: units.out3(s.angles),
            sides: s.sides,
        }
    }

    pub fn to_solution(&self, units: Units) -> Solution {
        Solution {
            theta: units.inp(self.theta),
            psi: units.inp(self.psi),
            a: vec3(self.a),
            b: vec3(self.b),
            c: vec3(self.c),
            residual: self.residual,
            angles: units.inp3(self.angles),
            sides: self.sides,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDoc {
    pub schema: String,
    pub units: Units,
    pub request: RequestDoc,
    pub solutions: Vec<SolutionDoc>,
}

impl SolveDoc {
    pub fn new(req: &SolveRequest, sols: &[Solution], units: Units) -> Self {
        SolveDoc {
            schema: SCHEMA.into(),
            units,
            request: RequestDoc::from_request(req, units),
            solutions: sols.iter().map(|s| SolutionDoc::from_solution(s, units)).collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let doc: SolveDoc = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if doc.schema != SCHEMA {
            return Err(format!("unsupported schema {:?}, expected {SCHEMA:?}", doc.schema));
        }
        Ok(doc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub index: usize,
    pub pass: bool,
    pub line_distances: [f64; 3],
    pub on_line: [bool; 3],
    pub angle_errors: [f64; 3],
    pub angles_ok: bool,
    pub side_errors: [f64; 3],
    pub sides_ok: bool,
    pub ray_projections: Option<[f64; 3]>,
    pub rays_ok: bool,
}

impl ReportDoc {
    pub fn new(index: usize, r: &VerificationReport, units: Units) -> Self {
        ReportDoc {
            index,
            pass: r.pass,
            line_distances: r.line_distances,
            on_line: r.on_line,
            angle_errors: units.out3(r.angle_errors),
            angles_ok: r.angles_ok,
            side_errors: r.side_errors,
            sides_ok: r.sides_ok,
            ray_projections: r.ray_projections,
            rays_ok: r.rays_ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyDoc {
    pub schema: String,
    pub units: Units,
    pub pass: bool,
    pub max_line_distance: f64,
    pub max_angle_error: f64,
    pub reports: Vec<ReportDoc>,
}

impl VerifyDoc {
    pub fn new(reports: &[VerificationReport], units: Units) -> Self {
        VerifyDoc {
            schema: SCHEMA.into(),
            units,
            pass: !reports.is_empty() && reports.iter().all(|r| r.pass),
            max_line_distance: reports.iter().map(|r| r.max_line_distance()).fold(0.0, f64::max),
            max_angle_error: units.out(reports.iter().map(|r| r.max_angle_error()).fold(0.0, f64::max)),
            reports: reports
                .iter()
                .enumerate()
                .map(|(i, r)| ReportDoc::new(i, r, units))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointsDoc {
    pub p1: [f64; 3],
    pub p2: [f64; 3],
    pub p3: [f64; 3],
    pub p1p: [f64; 3],
    pub p2p: [f64; 3],
    pub p3p: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question1Doc {
    pub pass: bool,
    pub deviations: [f64; 3],
    pub arc_sum_error: f64,
    pub incidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDoc {
    pub solution: usize,
    /// Normals of the circles through (q2, q3), (q3, q1), (q1, q2).
    pub circles: [[f64; 3]; 3],
    pub cutting: [f64; 3],
    /// Orientation used to read off the cyclic order.
    pub travel: [f64; 3],
    pub points: PointsDoc,
    /// arc(p1,p2), arc(p2,p3), arc(p3,p1p).
    pub arcs: [f64; 3],
    pub question1: Question1Doc,
}

impl SceneDoc {
    pub fn new(solution: usize, s: &SphericalScene, q: &Question1Report, units: Units) -> Self {
        let p = s.points.map(|v| pt(&v));
        SceneDoc {
            solution,
            circles: s.circles.map(|c| pt(&c.normal())),
            cutting: pt(&s.cutting.normal()),
            travel: pt(&s.travel),
            points: PointsDoc {
                p1: p[0],
                p2: p[1],
                p3: p[2],
                p1p: p[3],
                p2p: p[4],
                p3p: p[5],
            },
            arcs: units.out3(s.arcs),
            question1: Question1Doc {
                pass: q.pass,
                deviations: units.out3(q.deviations),
                arc_sum_error: units.out(q.arc_sum_error),
                incidence: q.incidence,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalDoc {
    pub schema: String,
    pub units: Units,
    pub pass: bool,
    pub scenes: Vec<SceneDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleDoc {
    pub schema: String,
    pub units: Units,
    pub angles: [f64; 3],
    pub config: [f64; 3],
    pub grid: usize,
    pub normal: [f64; 3],
    pub deviation: f64,
    pub arcs: [f64; 3],
    pub seed_index: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticDoc {
    pub schema: String,
    pub units: Units,
    pub config: [f64; 3],
    #[serde(rename = "P")]
    pub p: [[f64; 3]; 3],
    #[serde(rename = "Q")]
    pub q: [[f64; 3]; 3],
    /// |det| for (P1,Q2,Q3), (P2,Q3,Q1), (P3,Q1,Q2).
    pub collinearity: [f64; 3],
    /// dist(Q2,Q3), dist(Q3,Q1), dist(Q1,Q2).
    pub distances: [f64; 3],
    /// min(x, pi - x) of alpha, beta, gamma.
    pub expected: [f64; 3],
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDoc {
    pub schema: String,
    pub error: ErrorBody,
}
