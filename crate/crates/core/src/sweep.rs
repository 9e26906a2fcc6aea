//! Feasibility sweeps over a Cartesian grid of shape and line-angle values.
//!
//! Each axis varies one of the six angles. Parameters that are not varied
//! come from the template or from linked expressions such as
//! `angA=angB=(pi-angC)/2`. Cells are solved independently and returned in
//! grid order (first axis slowest) regardless of evaluation order.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use evalexpr::{
    build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node,
    Value,
};
use rayon::prelude::*;
use thiserror::Error;

use crate::geom::{validate_config, validate_shape};
use crate::solver::{solve, Mode, SolveRequest};
use crate::sullivan::{predicate_ii, predicate_iii, predicate_iv};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("bad axis {spec:?}: {reason}")]
    BadAxis { spec: String, reason: String },
    #[error("bad link {spec:?}: {reason}")]
    BadLink { spec: String, reason: String },
    #[error("parameter {0} is not set by the template, an axis or a link")]
    Unset(Param),
    #[error("parameter {0} is set by more than one axis or link")]
    Conflict(Param),
    #[error("invalid sweep: {0}")]
    Invalid(String),
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Param {
    AngA,
    AngB,
    AngC,
    Alpha,
    Beta,
    Gamma,
}

impl Param {
    pub const ALL: [Param; 6] = [
        Param::AngA,
        Param::AngB,
        Param::AngC,
        Param::Alpha,
        Param::Beta,
        Param::Gamma,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Param::AngA => "angA",
            Param::AngB => "angB",
            Param::AngC => "angC",
            Param::Alpha => "alpha",
            Param::Beta => "beta",
            Param::Gamma => "gamma",
        }
    }

    fn index(&self) -> usize {
        *self as usize
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Param::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| {
                format!("unknown parameter {s:?}, expected one of angA, angB, angC, alpha, beta, gamma")
            })
    }
}

/// One varied parameter: `steps` evenly spaced values from `from` to `to`
/// inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub param: Param,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(param: Param, from: f64, to: f64, steps: usize) -> Result<Self, SweepError> {
        let axis = Axis { param, from, to, steps };
        let bad = |reason: &str| SweepError::BadAxis {
            spec: axis.to_string(),
            reason: reason.into(),
        };
        if steps < 2 {
            return Err(bad("steps must be at least 2"));
        }
        if !(from.is_finite() && to.is_finite()) {
            return Err(bad("bounds must be finite"));
        }
        Ok(axis)
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.steps {
            return self.to;
        }
        self.from + (self.to - self.from) * i as f64 / (self.steps - 1) as f64
    }

    /// Same axis with both bounds multiplied by `k` (unit conversion).
    pub fn scaled(&self, k: f64) -> Axis {
        Axis {
            from: self.from * k,
            to: self.to * k,
            ..*self
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}:{}:{}", self.param, self.from, self.to, self.steps)
    }
}

impl FromStr for Axis {
    type Err = SweepError;

    /// Parses `name=from:to:steps`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |reason: String| SweepError::BadAxis {
            spec: s.into(),
            reason,
        };
        let (name, range) = s
            .split_once('=')
            .ok_or_else(|| bad("expected name=from:to:steps".into()))?;
        let param: Param = name.parse().map_err(bad)?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected name=from:to:steps".into()));
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| bad(format!("{t:?}: {e}")));
        let steps = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|e| bad(format!("{:?}: {e}", parts[2])))?;
        Axis::new(param, num(parts[0])?, num(parts[1])?, steps).map_err(|e| match e {
            SweepError::BadAxis { reason, .. } => bad(reason),
            other => other,
        })
    }
}

/// `target1=target2=...=expression`, evaluated per cell after the axes.
/// The expression may use any parameter name and `pi`.
#[derive(Debug, Clone)]
pub struct Link {
    pub targets: Vec<Param>,
    pub expr: String,
    node: Node<DefaultNumericTypes>,
    reads: Vec<Param>,
}

impl PartialEq for Link {
    fn eq(&self, other: &Self) -> bool {
        self.targets == other.targets && self.expr == other.expr
    }
}

impl FromStr for Link {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |reason: String| SweepError::BadLink {
            spec: s.into(),
            reason,
        };
        let mut pieces: Vec<&str> = s.split('=').collect();
        if pieces.len() < 2 {
            return Err(bad("expected target=expression".into()));
        }
        let expr = pieces.pop().unwrap_or_default().trim().to_string();
        let targets = pieces
            .iter()
            .map(|t| t.parse::<Param>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(bad)?;
        let node = build_operator_tree::<DefaultNumericTypes>(&expr).map_err(|e| bad(e.to_string()))?;
        let mut reads = Vec::new();
        for id in node.iter_read_variable_identifiers() {
            if id == "pi" {
                continue;
            }
            let p: Param = id.parse().map_err(bad)?;
            if !reads.contains(&p) {
                reads.push(p);
            }
        }
        if node.iter_function_identifiers().next().is_some() {
            return Err(bad("function calls are not supported".into()));
        }
        Ok(Link {
            targets,
            expr,
            node,
            reads,
        })
    }
}

impl Link {
    /// Evaluate with `values` in radians. With `degrees`, the expression
    /// sees degrees and `pi` is 180, so the same text works in both units.
    fn eval(&self, values: &[Option<f64>; 6], degrees: bool) -> Result<f64, String> {
        let unit = if degrees { PI / 180.0 } else { 1.0 };
        let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
        let set = |ctx: &mut HashMapContext, k: &str, v: f64| {
            ctx.set_value(k.into(), Value::Float(v)).map_err(|e| e.to_string())
        };
        set(&mut ctx, "pi", PI / unit)?;
        for p in &self.reads {
            let v = values[p.index()].ok_or_else(|| format!("{p} is not available to this link"))?;
            set(&mut ctx, p.name(), v / unit)?;
        }
        let out = self
            .node
            .eval_number_with_context(&ctx)
            .map_err(|e| e.to_string())?;
        Ok(out * unit)
    }
}

/// Template plus axes and links. Angles are in radians; `degrees` only
/// changes how link expressions and CSV values are expressed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: [Option<f64>; 6],
    pub axes: Vec<Axis>,
    pub links: Vec<Link>,
    pub scale: f64,
    pub mode: Mode,
    pub scan_n: usize,
    pub tol_pos: f64,
    pub tol_ang: f64,
    pub allow_origin_vertex: bool,
    pub degrees: bool,
}

impl SweepSpec {
    pub fn new(axes: Vec<Axis>) -> Self {
        SweepSpec {
            base: [None; 6],
            axes,
            links: Vec::new(),
            scale: 1.0,
            mode: Mode::Lines,
            scan_n: 720,
            tol_pos: tol::TOL_POS,
            tol_ang: tol::TOL_ANG,
            allow_origin_vertex: false,
            degrees: false,
        }
    }

    pub fn with_base(mut self, p: Param, v: f64) -> Self {
        self.base[p.index()] = Some(v);
        self
    }

    pub fn with_shape(self, a: f64, b: f64, c: f64) -> Self {
        self.with_base(Param::AngA, a)
            .with_base(Param::AngB, b)
            .with_base(Param::AngC, c)
    }

    pub fn with_config(self, alpha: f64, beta: f64, gamma: f64) -> Self {
        self.with_base(Param::Alpha, alpha)
            .with_base(Param::Beta, beta)
            .with_base(Param::Gamma, gamma)
    }

    pub fn with_link(mut self, link: Link) -> Self {
        self.links.push(link);
        self
    }

    /// Parameters that change across the grid, in column order.
    pub fn varied(&self) -> Vec<Param> {
        let mut out: Vec<Param> = self.axes.iter().map(|a| a.param).collect();
        for l in &self.links {
            if l.reads.iter().any(|p| out.contains(p)) {
                out.extend(l.targets.iter().copied());
            }
        }
        out
    }

    pub fn n_cells(&self) -> usize {
        self.axes.iter().map(|a| a.steps).product()
    }

    pub fn check(&self) -> Result<(), SweepError> {
        if self.scan_n < 16 {
            return Err(SweepError::Invalid(format!("scan_n = {} must be at least 16", self.scan_n)));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(SweepError::Invalid(format!("scale = {} must be positive", self.scale)));
        }
        let mut owned = HashSet::new();
        for a in &self.axes {
            if a.steps < 2 {
                return Err(SweepError::BadAxis {
                    spec: a.to_string(),
                    reason: "steps must be at least 2".into(),
                });
            }
            if !owned.insert(a.param) {
                return Err(SweepError::Conflict(a.param));
            }
        }
        // Links may read anything set so far: template values, axes, or
        // earlier links.
        let mut known: HashSet<Param> = owned.clone();
        known.extend(Param::ALL.into_iter().filter(|p| self.base[p.index()].is_some()));
        for l in &self.links {
            for r in &l.reads {
                if l.targets.contains(r) {
                    return Err(SweepError::BadLink {
                        spec: l.to_string(),
                        reason: format!("{r} depends on itself"),
                    });
                }
                if !known.contains(r) {
                    return Err(SweepError::Unset(*r));
                }
            }
            for t in &l.targets {
                if !owned.insert(*t) {
                    return Err(SweepError::Conflict(*t));
                }
                known.insert(*t);
            }
        }
        if let Some(p) = Param::ALL.into_iter().find(|p| !known.contains(p)) {
            return Err(SweepError::Unset(p));
        }
        if self.n_cells() > 10_000_000 {
            return Err(SweepError::Invalid(format!("{} cells is too many", self.n_cells())));
        }
        Ok(())
    }

    fn cell_values(&self, index: usize) -> Result<[f64; 6], String> {
        let mut values = self.base;
        let mut rest = index;
        for axis in self.axes.iter().rev() {
            values[axis.param.index()] = Some(axis.value(rest % axis.steps));
            rest /= axis.steps;
        }
        for l in &self.links {
            let v = l.eval(&values, self.degrees)?;
            for t in &l.targets {
                values[t.index()] = Some(v);
            }
        }
        Ok(values.map(|v| v.unwrap_or(f64::NAN)))
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.targets {
            write!(f, "{t}=")?;
        }
        f.write_str(&self.expr)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    /// Shape or config failed validation; not solved.
    Invalid(String),
    /// The solver raised an error on a valid cell.
    Error(String),
    Solved {
        n_solutions: usize,
        best_residual: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub index: usize,
    /// All six angles for this cell, radians, in `Param::ALL` order.
    pub values: [f64; 6],
    pub outcome: CellOutcome,
    /// Lemma predicates (ii), (iii), (iv) for the cell's frame.
    pub predicates: Option<[bool; 3]>,
}

impl SweepCell {
    pub fn value(&self, p: Param) -> f64 {
        self.values[p.index()]
    }

    pub fn n_solutions(&self) -> Option<usize> {
        match self.outcome {
            CellOutcome::Solved { n_solutions, .. } => Some(n_solutions),
            _ => None,
        }
    }

    pub fn feasible(&self) -> bool {
        self.n_solutions().is_some_and(|n| n > 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub columns: Vec<Param>,
    pub degrees: bool,
    pub cells: Vec<SweepCell>,
}

fn eval_cell(spec: &SweepSpec, index: usize) -> SweepCell {
    let invalid = |values, msg: String| SweepCell {
        index,
        values,
        outcome: CellOutcome::Invalid(msg),
        predicates: None,
    };
    let values = match spec.cell_values(index) {
        Ok(v) => v,
        Err(msg) => return invalid([f64::NAN; 6], msg),
    };
    let shape = match validate_shape(values[0], values[1], values[2]) {
        Ok(s) => s,
        Err(e) => return invalid(values, e.to_string()),
    };
    let config = match validate_config(values[3], values[4], values[5]) {
        Ok(c) => c,
        Err(e) => return invalid(values, e.to_string()),
    };
    let req = SolveRequest {
        shape,
        config,
        scale: spec.scale,
        mode: spec.mode,
        scan_n: spec.scan_n,
        tol_pos: spec.tol_pos,
        tol_ang: spec.tol_ang,
        allow_origin_vertex: spec.allow_origin_vertex,
    };
    let predicates = req
        .frame()
        .ok()
        .map(|f| [predicate_ii(&f), predicate_iii(&f), predicate_iv(&f)]);
    let outcome = match solve(&req) {
        Ok(sols) => CellOutcome::Solved {
            n_solutions: sols.len(),
            best_residual: sols.iter().map(|s| s.residual).min_by(f64::total_cmp),
        },
        Err(e) => CellOutcome::Error(e.to_string()),
    };
    SweepCell {
        index,
        values,
        outcome,
        predicates,
    }
}

/// Evaluate every cell. `jobs = 0` uses the global thread pool.
pub fn sweep(spec: &SweepSpec, jobs: usize) -> Result<SweepGrid, SweepError> {
    spec.check()?;
    let run = || -> Vec<SweepCell> {
        (0..spec.n_cells())
            .into_par_iter()
            .map(|i| eval_cell(spec, i))
            .collect()
    };
    let cells = if jobs == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| SweepError::Pool(e.to_string()))?
            .install(run)
    };
    Ok(SweepGrid {
        columns: spec.varied(),
        degrees: spec.degrees,
        cells,
    })
}

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl SweepGrid {
    /// CSV with one column per varied parameter, then n_solutions,
    /// best_residual, pred_ii, pred_iii, pred_iv.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header: Vec<&str> = self.columns.iter().map(|p| p.name()).collect();
        header.extend(["n_solutions", "best_residual", "pred_ii", "pred_iii", "pred_iv"]);
        out.write_record(&header)?;
        let unit = if self.degrees { 180.0 / PI } else { 1.0 };
        for cell in &self.cells {
            let mut row: Vec<String> = self
                .columns
                .iter()
                .map(|p| fmt_float(cell.value(*p) * unit))
                .collect();
            let (count, best) = match &cell.outcome {
                CellOutcome::Invalid(_) => ("invalid".to_string(), String::new()),
                CellOutcome::Error(_) => ("error".to_string(), String::new()),
                CellOutcome::Solved {
                    n_solutions,
                    best_residual,
                } => (n_solutions.to_string(), best_residual.map(fmt_float).unwrap_or_default()),
            };
            row.push(count);
            row.push(best);
            for k in 0..3 {
                row.push(cell.predicates.map(|p| p[k].to_string()).unwrap_or_default());
            }
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}
