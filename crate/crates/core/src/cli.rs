//! The `trifit` command-line tool.
//!
//! Exit codes: 0 success, 2 invalid input, 3 no result or a failed check,
//! 4 I/O error, 5 numerical failure. Errors go to stderr as JSON.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::geom::{build_canonical_lines, validate_config, validate_shape, LineConfig, TriangleShape, Vec3};
use crate::json::{
    self, normalize_shape, pt, EllipticDoc, ErrorBody, ErrorDoc, OracleDoc, SceneDoc, SolveDoc,
    SphericalDoc, Units, VerifyDoc, SCHEMA,
};
use crate::solver::{solve, verify, Mode, Solution, SolveError, SolveRequest};
use crate::spherical::{
    collinearity, elliptic_construct, oracle_search, scene_from_solution, verify_question1,
    EllipticPoint, SphericalError,
};
use crate::sullivan::{construction_svg, SullivanFrame};
use crate::sweep::{sweep, Axis, Link, SweepError, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_RESULT: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "trifit", version, about = "Fit a triangle of prescribed angles onto three lines through the origin")]
pub struct Cli {
    /// Read and write angles in degrees instead of radians.
    #[arg(long, global = true)]
    pub degrees: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find every placement of the triangle on the three lines.
    Solve(SolveArgs),
    /// Re-check the solutions in a solve output file.
    Verify(VerifyArgs),
    /// Brute-force search for the cutting great circle.
    Oracle(OracleArgs),
    /// Solve over a grid of angles and write CSV.
    Sweep(SweepArgs),
    /// Map solutions to the great-circle picture and check the arcs.
    Spherical(SphericalArgs),
    /// Elliptic-plane construction from three collinear points.
    Elliptic(EllipticArgs),
    /// Draw the planar construction at one rotation as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args, Clone)]
pub struct ShapeArgs {
    /// Interior angles A,B,C.
    #[arg(long, value_name = "A,B,C", value_parser = parse_triple)]
    pub angles: [f64; 3],
    /// Angles alpha,beta,gamma between the lines (l2,l3), (l3,l1), (l1,l2).
    #[arg(long, value_name = "ALPHA,BETA,GAMMA", value_parser = parse_triple)]
    pub sides: [f64; 3],
    /// Largest accepted |A+B+C-pi| in radians; the angles are rescaled to
    /// sum to pi exactly.
    #[arg(long, default_value_t = 1e-3)]
    pub angle_sum_tol: f64,
}

#[derive(Debug, Args, Clone)]
pub struct SolverArgs {
    /// Length of side a (opposite A).
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// `lines` or `rays` (vertices on the positive half-lines).
    #[arg(long, default_value = "lines")]
    pub mode: Mode,
    /// Rotation grid resolution for root bracketing.
    #[arg(long, default_value_t = 720)]
    pub scan_n: usize,
    #[arg(long, default_value_t = crate::tol::TOL_POS)]
    pub tol_pos: f64,
    #[arg(long, default_value_t = crate::tol::TOL_ANG)]
    pub tol_ang: f64,
    /// Keep solutions with a vertex at the origin.
    #[arg(long)]
    pub allow_origin_vertex: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Output of `solve`.
    #[arg(long)]
    pub solution: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Number of candidate poles on the hemisphere.
    #[arg(long, default_value_t = 4000)]
    pub grid: usize,
    /// Largest arc deviation (radians) counted as a match.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Varied parameter, `name=from:to:steps`; repeatable. Names are angA,
    /// angB, angC, alpha, beta, gamma.
    #[arg(long, value_name = "NAME=FROM:TO:STEPS", required = true)]
    pub vary: Vec<String>,
    /// Linked parameters, e.g. `angA=angB=(pi-angC)/2`; repeatable.
    #[arg(long, value_name = "NAME=...=EXPR")]
    pub link: Vec<String>,
    /// Fixed interior angles for parameters that are not varied or linked.
    #[arg(long, value_name = "A,B,C", value_parser = parse_triple)]
    pub angles: Option<[f64; 3]>,
    /// Fixed line angles for parameters that are not varied or linked.
    #[arg(long, value_name = "ALPHA,BETA,GAMMA", value_parser = parse_triple)]
    pub sides: Option<[f64; 3]>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Worker threads; 0 uses all cores. Output order does not depend on it.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SphericalArgs {
    /// Output of `solve`; otherwise solve from --angles and --sides.
    #[arg(long, conflicts_with_all = ["angles", "sides"])]
    pub solution: Option<PathBuf>,
    #[arg(long, value_name = "A,B,C", value_parser = parse_triple, requires = "sides")]
    pub angles: Option<[f64; 3]>,
    #[arg(long, value_name = "ALPHA,BETA,GAMMA", value_parser = parse_triple, requires = "angles")]
    pub sides: Option<[f64; 3]>,
    #[arg(long, default_value_t = 1e-3)]
    pub angle_sum_tol: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EllipticArgs {
    /// Three points as `x,y,z;x,y,z;x,y,z` (any nonzero representatives).
    #[arg(long, value_name = "P1;P2;P3", allow_hyphen_values = true)]
    pub points: String,
    #[arg(long, value_name = "ALPHA,BETA,GAMMA", value_parser = parse_triple)]
    pub sides: [f64; 3],
    #[arg(long, default_value_t = crate::tol::TOL_ANG)]
    pub tol_ang: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Rotation parameter of the construction.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
    /// SVG output path; stdout when omitted.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        [a, b, c] if v.iter().all(|x| x.is_finite()) => Ok([*a, *b, *c]),
        [_, _, _] => Err("values must be finite".into()),
        _ => Err(format!("expected three comma-separated numbers, got {}", v.len())),
    }
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    NoResult(String),
    Io(String),
    Numerical(String, Option<serde_json::Value>),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::NoResult(_) => EXIT_NO_RESULT,
            CliError::Io(_) => EXIT_IO,
            CliError::Numerical(..) => EXIT_NUMERICAL,
        }
    }

    fn doc(&self) -> ErrorDoc {
        let (kind, message, detail) = match self {
            CliError::Input(m) => ("invalid_input", m, None),
            CliError::NoResult(m) => ("no_result", m, None),
            CliError::Io(m) => ("io", m, None),
            CliError::Numerical(m, d) => ("numerical_failure", m, d.clone()),
        };
        ErrorDoc {
            schema: SCHEMA.into(),
            error: ErrorBody {
                kind: kind.into(),
                message: message.clone(),
                detail,
            },
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::NumericalFailure { lo, hi, residual } => CliError::Numerical(
                e.to_string(),
                Some(serde_json::json!({"bracket": [lo, hi], "residual": residual})),
            ),
            SolveError::NotFound => CliError::NoResult(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<SphericalError> for CliError {
    fn from(e: SphericalError) -> Self {
        match e {
            SphericalError::Solve(s) => s.into(),
            SphericalError::Geom(_) | SphericalError::PreconditionFailed(_) => CliError::Input(e.to_string()),
            SphericalError::DegenerateSolution | SphericalError::OrderUnachievable => {
                CliError::NoResult(e.to_string())
            }
            SphericalError::AlignmentFailed(_) => CliError::Numerical(e.to_string(), None),
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Pool(m) => CliError::Io(m),
            other => CliError::Input(other.to_string()),
        }
    }
}

/// Result of a command that ran to completion: the exit code to report
/// after the artifact was written.
type Outcome = Result<i32, CliError>;

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let err = CliError::Input(e.to_string().trim_end().to_string());
            let _ = writeln!(stderr, "{}", json::to_string(&err.doc()));
            return EXIT_INPUT;
        }
    };
    match dispatch(&cli, stdout) {
        Ok(code) => code,
        Err(err) => {
            let _ = writeln!(stderr, "{}", json::to_string(&err.doc()));
            err.code()
        }
    }
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Outcome {
    let units = Units::from_degrees_flag(cli.degrees);
    match &cli.command {
        Command::Solve(a) => cmd_solve(a, units, stdout),
        Command::Verify(a) => cmd_verify(a, stdout),
        Command::Oracle(a) => cmd_oracle(a, units, stdout),
        Command::Sweep(a) => cmd_sweep(a, cli.degrees, stdout),
        Command::Spherical(a) => cmd_spherical(a, units, stdout),
        Command::Elliptic(a) => cmd_elliptic(a, units, stdout),
        Command::Plot(a) => cmd_plot(a, units, stdout),
    }
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, doc: &T, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut text = json::to_string(doc);
    text.push('\n');
    emit(out, &text, stdout)
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn shape_from(angles: [f64; 3], units: Units, tol: f64) -> Result<TriangleShape, CliError> {
    let [a, b, c] = normalize_shape(angles.map(|x| units.inp(x)), tol).map_err(CliError::Input)?;
    validate_shape(a, b, c).map_err(|e| CliError::Input(e.to_string()))
}

fn config_from(sides: [f64; 3], units: Units) -> Result<LineConfig, CliError> {
    let [a, b, c] = sides.map(|x| units.inp(x));
    validate_config(a, b, c).map_err(|e| CliError::Input(e.to_string()))
}

fn build_request(shape: &ShapeArgs, s: &SolverArgs, units: Units) -> Result<SolveRequest, CliError> {
    let req = SolveRequest {
        shape: shape_from(shape.angles, units, shape.angle_sum_tol)?,
        config: config_from(shape.sides, units)?,
        scale: s.scale,
        mode: s.mode,
        scan_n: s.scan_n,
        tol_pos: s.tol_pos,
        tol_ang: s.tol_ang,
        allow_origin_vertex: s.allow_origin_vertex,
    };
    req.check()?;
    // Surfaces DegenerateConfig as an input error before solving.
    build_canonical_lines(&req.config).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(req)
}

fn cmd_solve(a: &SolveArgs, units: Units, stdout: &mut dyn Write) -> Outcome {
    let req = build_request(&a.shape, &a.solver, units)?;
    let sols = solve(&req)?;
    emit_json(a.out.as_deref(), &SolveDoc::new(&req, &sols, units), stdout)?;
    Ok(if sols.is_empty() { EXIT_NO_RESULT } else { EXIT_OK })
}

fn load_solutions(path: &Path) -> Result<(SolveRequest, Vec<Solution>, Units), CliError> {
    let doc = SolveDoc::parse(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    // The file was written by `solve`, so its angles already sum to pi up to
    // printing; allow only rounding slack here.
    let req = doc
        .request
        .to_request(doc.units, 1e-9)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let sols = doc.solutions.iter().map(|s| s.to_solution(doc.units)).collect();
    Ok((req, sols, doc.units))
}

fn cmd_verify(a: &VerifyArgs, stdout: &mut dyn Write) -> Outcome {
    let (req, sols, units) = load_solutions(&a.solution)?;
    let reports = sols
        .iter()
        .map(|s| verify(s, &req))
        .collect::<Result<Vec<_>, _>>()?;
    let doc = VerifyDoc::new(&reports, units);
    emit_json(a.out.as_deref(), &doc, stdout)?;
    Ok(if doc.pass { EXIT_OK } else { EXIT_NO_RESULT })
}

fn cmd_oracle(a: &OracleArgs, units: Units, stdout: &mut dyn Write) -> Outcome {
    let shape = shape_from(a.shape.angles, units, a.shape.angle_sum_tol)?;
    let config = config_from(a.shape.sides, units)?;
    let lines = build_canonical_lines(&config).map_err(|e| CliError::Input(e.to_string()))?;
    let run = || oracle_search(&shape, &lines, a.grid);
    let res = if a.jobs == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(a.jobs)
            .build()
            .map_err(|e| CliError::Io(e.to_string()))?
            .install(run)
    }?;
    let pass = res.deviation <= a.tol;
    let doc = OracleDoc {
        schema: SCHEMA.into(),
        units,
        angles: shape.angles().map(|x| units.out(x)),
        config: config.angles().map(|x| units.out(x)),
        grid: a.grid,
        normal: pt(&res.normal),
        deviation: units.out(res.deviation),
        arcs: res.arcs.map(|x| units.out(x)),
        seed_index: res.seed_index,
        pass,
    };
    emit_json(a.out.as_deref(), &doc, stdout)?;
    Ok(if pass { EXIT_OK } else { EXIT_NO_RESULT })
}

fn cmd_sweep(a: &SweepArgs, degrees: bool, stdout: &mut dyn Write) -> Outcome {
    let units = Units::from_degrees_flag(degrees);
    let k = units.inp(1.0);
    let axes = a
        .vary
        .iter()
        .map(|s| s.parse::<Axis>().map(|ax| ax.scaled(k)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut spec = SweepSpec::new(axes);
    if let Some([x, y, z]) = a.angles {
        spec = spec.with_shape(x * k, y * k, z * k);
    }
    if let Some([x, y, z]) = a.sides {
        spec = spec.with_config(x * k, y * k, z * k);
    }
    for l in &a.link {
        spec = spec.with_link(l.parse::<Link>()?);
    }
    // Axes and links override the fixed triples.
    spec.scale = a.solver.scale;
    spec.mode = a.solver.mode;
    spec.scan_n = a.solver.scan_n;
    spec.tol_pos = a.solver.tol_pos;
    spec.tol_ang = a.solver.tol_ang;
    spec.allow_origin_vertex = a.solver.allow_origin_vertex;
    spec.degrees = degrees;
    let grid = sweep(&spec, a.jobs)?;
    let mut buf = Vec::new();
    grid.write_csv(&mut buf).map_err(|e| CliError::Io(e.to_string()))?;
    let text = String::from_utf8(buf).map_err(|e| CliError::Io(e.to_string()))?;
    emit(a.out.as_deref(), &text, stdout)?;
    Ok(EXIT_OK)
}

fn cmd_spherical(a: &SphericalArgs, units: Units, stdout: &mut dyn Write) -> Outcome {
    let (req, sols, units) = match (&a.solution, a.angles, a.sides) {
        (Some(path), _, _) => load_solutions(path)?,
        (None, Some(angles), Some(sides)) => {
            let shape = ShapeArgs {
                angles,
                sides,
                angle_sum_tol: a.angle_sum_tol,
            };
            let req = build_request(&shape, &a.solver, units)?;
            let sols = solve(&req)?;
            (req, sols, units)
        }
        _ => {
            return Err(CliError::Input(
                "spherical needs --solution FILE or both --angles and --sides".into(),
            ))
        }
    };
    let lines = build_canonical_lines(&req.config).map_err(|e| CliError::Input(e.to_string()))?;
    let mut scenes = Vec::new();
    for (i, s) in sols.iter().enumerate() {
        let scene = scene_from_solution(s, &lines)?;
        let q = verify_question1(&scene, &req.shape, req.tol_ang);
        scenes.push(SceneDoc::new(i, &scene, &q, units));
    }
    let pass = !scenes.is_empty() && scenes.iter().all(|s| s.question1.pass);
    let doc = SphericalDoc {
        schema: SCHEMA.into(),
        units,
        pass,
        scenes,
    };
    emit_json(a.out.as_deref(), &doc, stdout)?;
    Ok(if pass { EXIT_OK } else { EXIT_NO_RESULT })
}

fn parse_points(s: &str) -> Result<[EllipticPoint; 3], CliError> {
    let pts = s
        .split(';')
        .map(|t| {
            let [x, y, z] = parse_triple(t).map_err(CliError::Input)?;
            EllipticPoint::new(Vec3::new(x, y, z)).map_err(|e| CliError::Input(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    <[EllipticPoint; 3]>::try_from(pts)
        .map_err(|v| CliError::Input(format!("expected three points separated by ';', got {}", v.len())))
}

fn cmd_elliptic(a: &EllipticArgs, units: Units, stdout: &mut dyn Write) -> Outcome {
    let p = parse_points(&a.points)?;
    let config = config_from(a.sides, units)?;
    let q = elliptic_construct(p, &config)?;
    let collin = [
        collinearity(&p[0], &q[1], &q[2]),
        collinearity(&p[1], &q[2], &q[0]),
        collinearity(&p[2], &q[0], &q[1]),
    ];
    let distances = [q[1].distance(&q[2]), q[2].distance(&q[0]), q[0].distance(&q[1])];
    let expected = config.angles().map(|x| x.min(std::f64::consts::PI - x));
    let pass = collin.iter().all(|&c| c <= 1e-9)
        && (0..3).all(|i| (distances[i] - expected[i]).abs() <= a.tol_ang);
    let doc = EllipticDoc {
        schema: SCHEMA.into(),
        units,
        config: config.angles().map(|x| units.out(x)),
        p: p.map(|x| pt(&x.rep())),
        q: q.map(|x| pt(&x.rep())),
        collinearity: collin,
        distances: distances.map(|x| units.out(x)),
        expected: expected.map(|x| units.out(x)),
        pass,
    };
    emit_json(a.out.as_deref(), &doc, stdout)?;
    Ok(if pass { EXIT_OK } else { EXIT_NO_RESULT })
}

fn cmd_plot(a: &PlotArgs, units: Units, stdout: &mut dyn Write) -> Outcome {
    let shape = shape_from(a.shape.angles, units, a.shape.angle_sum_tol)?;
    let config = config_from(a.shape.sides, units)?;
    let frame = SullivanFrame::new(shape, config.gamma(), a.scale).map_err(|e| CliError::Input(e.to_string()))?;
    let svg = construction_svg(&frame, units.inp(a.theta));
    emit(a.svg.as_deref(), &svg, stdout)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triple_parsing() {
        assert_eq!(parse_triple("1,2.5, -3").unwrap(), [1.0, 2.5, -3.0]);
        assert!(parse_triple("1,2").is_err());
        assert!(parse_triple("1,2,x").is_err());
        assert!(parse_triple("1,2,inf").is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
