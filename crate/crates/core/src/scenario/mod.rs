//! Scenario files: a flat `key = value` format with dotted keys, parsed into
//! a [`Scenario`] and written back in one canonical byte-stable form.
//!
//! ```toml
//! name = "riemann_inflow"
//! solver = "hopf-lax"
//! mode = "mass"
//! data.u0 = { kind = "constant", value = 0.0 }
//! data.v0 = { kind = "constant", value = 0.0 }
//! data.u_boundary = { kind = "constant", value = 1.0 }
//! data.v_boundary = { kind = "constant", value = 1.0 }
//! alpha = { kind = "constant", value = 0.0 }
//! grid.x_min = 0.0
//! grid.x_max = 2.0
//! grid.cells = 400
//! time.horizon = 1.0
//! time.slices = [0.5, 1.0]
//! checks.entropy = true
//! ```

mod output;
mod run;

pub use output::{read_run, write_run, StoredRun};
pub use run::{
    converge, run_scenario, verify_slices, CheckResult, ConvergenceRow, ConvergenceTable,
    RunOptions, RunOutcome,
};

use std::fmt::Write as _;

use toml::{Table, Value};

use crate::damping::{AlphaKind, DampingSpec};
use crate::error::{DropletError, Result};
use crate::profile::Profile;
use crate::viscous::BoundaryMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    HopfLax,
    Viscous,
    Ivp,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::HopfLax => "hopf-lax",
            SolverKind::Viscous => "viscous",
            SolverKind::Ivp => "ivp",
        }
    }
}

/// A data table as written in a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub enum TableSpec {
    Constant(f64),
    /// `values[k]` on `[breaks[k], breaks[k+1])`.
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<f64> },
    PiecewiseLinear { nodes: Vec<f64>, values: Vec<f64> },
}

impl TableSpec {
    /// Build the profile; constants span `[lo, hi]`.
    pub fn profile(&self, lo: f64, hi: f64) -> Result<Profile> {
        match self {
            TableSpec::Constant(v) => Profile::constant(*v, lo, hi),
            TableSpec::PiecewiseConstant { breaks, values } => {
                Profile::piecewise_constant(breaks.clone(), values.clone())
            }
            TableSpec::PiecewiseLinear { nodes, values } => {
                Profile::piecewise_linear(nodes.clone(), values.clone())
            }
        }
    }

    /// Smallest and largest abscissa the table defines explicitly.
    fn extent(&self) -> Option<(f64, f64)> {
        match self {
            TableSpec::Constant(_) => None,
            TableSpec::PiecewiseConstant { breaks: x, .. }
            | TableSpec::PiecewiseLinear { nodes: x, .. } => Some((x[0], x[x.len() - 1])),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Checks {
    pub entropy: bool,
    pub admissibility: bool,
    /// Tolerance on `|-V(0+) - v_B|` at inflowing slices.
    pub mass_condition: Option<f64>,
    /// Tolerance on the point masses of `V_t + u V_x` at tracked jumps.
    pub measure: Option<f64>,
    pub bounds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub solver: SolverKind,
    pub mode: BoundaryMode,
    pub u0: TableSpec,
    pub v0: TableSpec,
    pub u_boundary: TableSpec,
    pub v_boundary: TableSpec,
    pub alpha: AlphaKind,
    pub x_min: f64,
    pub x_max: f64,
    pub cells: usize,
    pub horizon: f64,
    pub slices: Vec<f64>,
    pub epsilon: Option<f64>,
    pub checks: Checks,
}

fn line_of(source: &str, key: &str) -> Option<usize> {
    let starts = |t: &str, k: &str| t.starts_with(k) && t[k.len()..].trim_start().starts_with(['=', '.']);
    let head = key.split('.').next().unwrap_or(key);
    let find = |k: &str| source.lines().position(|l| starts(l.trim_start(), k));
    find(key).or_else(|| find(head)).map(|i| i + 1)
}

struct Reader<'a> {
    source: &'a str,
    root: &'a Table,
}

impl<'a> Reader<'a> {
    fn err(&self, key: &str, msg: impl std::fmt::Display) -> DropletError {
        match line_of(self.source, key) {
            Some(l) => DropletError::Config(format!("line {l}, key `{key}`: {msg}")),
            None => DropletError::Config(format!("key `{key}`: {msg}")),
        }
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        let mut cur: &Value = self.root.get(key.split('.').next()?)?;
        for part in key.split('.').skip(1) {
            cur = cur.as_table()?.get(part)?;
        }
        Some(cur)
    }

    fn required(&self, key: &str) -> Result<&'a Value> {
        self.get(key).ok_or_else(|| self.err(key, "missing"))
    }

    fn string(&self, key: &str) -> Result<&'a str> {
        self.required(key)?
            .as_str()
            .ok_or_else(|| self.err(key, "expected a string"))
    }

    fn float_value(&self, key: &str, v: &Value) -> Result<f64> {
        let x = match v {
            Value::Float(f) => *f,
            Value::Integer(i) => *i as f64,
            _ => return Err(self.err(key, "expected a number")),
        };
        if !x.is_finite() {
            return Err(self.err(key, "must be finite"));
        }
        Ok(x)
    }

    fn float(&self, key: &str) -> Result<f64> {
        self.float_value(key, self.required(key)?)
    }

    fn opt_float(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| self.float_value(key, v)).transpose()
    }

    fn floats_value(&self, key: &str, v: &Value) -> Result<Vec<f64>> {
        v.as_array()
            .ok_or_else(|| self.err(key, "expected an array of numbers"))?
            .iter()
            .map(|x| self.float_value(key, x))
            .collect()
    }

    fn floats(&self, key: &str) -> Result<Vec<f64>> {
        self.floats_value(key, self.required(key)?)
    }

    fn boolean(&self, key: &str) -> Result<bool> {
        match self.get(key) {
            None => Ok(false),
            Some(v) => v.as_bool().ok_or_else(|| self.err(key, "expected true or false")),
        }
    }

    fn table(&self, key: &str) -> Result<TableSpec> {
        let t = self
            .required(key)?
            .as_table()
            .ok_or_else(|| self.err(key, "expected an inline table"))?;
        let field = |name: &str| -> Result<&Value> {
            t.get(name)
                .ok_or_else(|| self.err(key, format!("missing `{name}`")))
        };
        let kind = field("kind")?
            .as_str()
            .ok_or_else(|| self.err(key, "`kind` must be a string"))?;
        let spec = match kind {
            "constant" => TableSpec::Constant(self.float_value(key, field("value")?)?),
            "piecewise-constant" => TableSpec::PiecewiseConstant {
                breaks: self.floats_value(key, field("breaks")?)?,
                values: self.floats_value(key, field("values")?)?,
            },
            "piecewise-linear" => TableSpec::PiecewiseLinear {
                nodes: self.floats_value(key, field("nodes")?)?,
                values: self.floats_value(key, field("values")?)?,
            },
            other => return Err(self.err(key, format!("unknown table kind `{other}`"))),
        };
        // surface shape errors here, with the key attached
        spec.profile(0.0, 1.0).map_err(|e| self.err(key, e))?;
        Ok(spec)
    }

    fn pairs(&self, key: &str, v: &Value) -> Result<Vec<(f64, f64)>> {
        v.as_array()
            .ok_or_else(|| self.err(key, "expected an array of [t, alpha] pairs"))?
            .iter()
            .map(|p| {
                let xs = self.floats_value(key, p)?;
                if xs.len() != 2 {
                    return Err(self.err(key, "each sample must be [t, alpha]"));
                }
                Ok((xs[0], xs[1]))
            })
            .collect()
    }

    fn alpha(&self) -> Result<AlphaKind> {
        let Some(v) = self.get("alpha") else {
            return Ok(AlphaKind::Constant(0.0));
        };
        let t = v
            .as_table()
            .ok_or_else(|| self.err("alpha", "expected an inline table"))?;
        let kind = t.get("kind").and_then(Value::as_str).unwrap_or("constant");
        let field = |name: &str| -> Result<&Value> {
            t.get(name)
                .ok_or_else(|| self.err("alpha", format!("missing `{name}`")))
        };
        Ok(match kind {
            "constant" => AlphaKind::Constant(self.float_value("alpha", field("value")?)?),
            "piecewise-linear" => AlphaKind::PiecewiseLinear(self.pairs("alpha", field("samples")?)?),
            "tabulated" => AlphaKind::Tabulated(self.pairs("alpha", field("samples")?)?),
            other => return Err(self.err("alpha", format!("unknown alpha kind `{other}`"))),
        })
    }
}

impl Scenario {
    /// Parse a scenario file. Syntax errors carry the parser's line and
    /// column; semantic errors name the offending key and its line.
    pub fn parse(source: &str) -> Result<Self> {
        let root: Table = source
            .parse()
            .map_err(|e: toml::de::Error| DropletError::Config(e.to_string()))?;
        let r = Reader {
            source,
            root: &root,
        };
        let solver = match r.string("solver")? {
            "hopf-lax" => SolverKind::HopfLax,
            "viscous" => SolverKind::Viscous,
            "ivp" => SolverKind::Ivp,
            other => return Err(r.err("solver", format!("unknown solver `{other}`"))),
        };
        let mode = match r.get("mode").map(|_| r.string("mode")).transpose()? {
            None | Some("mass") => BoundaryMode::Mass,
            Some("dirichlet") => BoundaryMode::Dirichlet,
            Some(other) => return Err(r.err("mode", format!("unknown mode `{other}`"))),
        };
        let cells = match r.required("grid.cells")? {
            Value::Integer(n) if *n > 0 => *n as usize,
            _ => return Err(r.err("grid.cells", "expected a positive integer")),
        };
        let zero = TableSpec::Constant(0.0);
        let optional_table = |key: &str| -> Result<TableSpec> {
            if r.get(key).is_some() {
                r.table(key)
            } else {
                Ok(zero.clone())
            }
        };
        let scenario = Scenario {
            name: r.string("name")?.to_string(),
            solver,
            mode,
            u0: r.table("data.u0")?,
            v0: optional_table("data.v0")?,
            u_boundary: optional_table("data.u_boundary")?,
            v_boundary: optional_table("data.v_boundary")?,
            alpha: r.alpha()?,
            x_min: r.opt_float("grid.x_min")?.unwrap_or(0.0),
            x_max: r.float("grid.x_max")?,
            cells,
            horizon: r.float("time.horizon")?,
            slices: r.floats("time.slices")?,
            epsilon: r.opt_float("viscous.epsilon")?,
            checks: Checks {
                entropy: r.boolean("checks.entropy")?,
                admissibility: r.boolean("checks.admissibility")?,
                mass_condition: r.opt_float("checks.mass_condition")?,
                measure: r.opt_float("checks.measure")?,
                bounds: r.boolean("checks.bounds")?,
            },
        };
        scenario.validate().map_err(|e| match e {
            DropletError::Config(m) => r.err(m.split(':').next().unwrap_or(""), m.clone()),
            other => other,
        })?;
        Ok(scenario)
    }

    /// Scope and consistency rules.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: &str| Err(DropletError::Config(format!("{key}: {msg}")));
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad("name", "must be a non-empty file-name-safe string");
        }
        if self.mode == BoundaryMode::Dirichlet && self.solver != SolverKind::Viscous {
            return bad("mode", "the dirichlet condition is only available with the viscous solver");
        }
        if self.solver != SolverKind::Ivp && self.x_min != 0.0 {
            return bad("grid.x_min", "half-line solvers need x_min = 0");
        }
        if !(self.x_max > self.x_min) || self.cells < 3 {
            return bad("grid.x_max", "need x_max > x_min and at least 3 cells");
        }
        if !(self.horizon > 0.0) {
            return bad("time.horizon", "must be positive");
        }
        if self.slices.is_empty()
            || self.slices.iter().any(|t| !(*t > 0.0) || *t > self.horizon)
            || self.slices.windows(2).any(|w| w[1] <= w[0])
        {
            return bad("time.slices", "need increasing times in (0, horizon]");
        }
        if self.solver == SolverKind::Viscous && !self.epsilon.is_some_and(|e| e > 0.0) {
            return bad("viscous.epsilon", "the viscous solver needs epsilon > 0");
        }
        for (key, t) in [("data.u_boundary", &self.u_boundary), ("data.v_boundary", &self.v_boundary)] {
            if let Some((lo, hi)) = t.extent() {
                if lo > 0.0 || hi < self.horizon {
                    return bad(key, "boundary tables must cover [0, horizon]");
                }
            }
        }
        if let Some(m) = self.checks.mass_condition {
            if !(m > 0.0) {
                return bad("checks.mass_condition", "tolerance must be positive");
            }
        }
        if let Some(m) = self.checks.measure {
            if !(m > 0.0) {
                return bad("checks.measure", "tolerance must be positive");
            }
        }
        Ok(())
    }

    pub fn damping(&self) -> DampingSpec {
        DampingSpec {
            kind: self.alpha.clone(),
            horizon: self.horizon,
        }
    }

    /// Space data as profiles on the scenario grid, boundary data on
    /// `[0, horizon]`.
    pub fn profiles(&self) -> Result<[Profile; 4]> {
        Ok([
            self.u0.profile(self.x_min, self.x_max)?,
            self.v0.profile(self.x_min, self.x_max)?,
            self.u_boundary.profile(0.0, self.horizon)?,
            self.v_boundary.profile(0.0, self.horizon)?,
        ])
    }

    /// Canonical text: fixed key order, shortest round-trip floats.
    pub fn to_canonical(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "name = {}", Value::String(self.name.clone()));
        let _ = writeln!(s, "solver = \"{}\"", self.solver.as_str());
        let mode = match self.mode {
            BoundaryMode::Mass => "mass",
            BoundaryMode::Dirichlet => "dirichlet",
        };
        let _ = writeln!(s, "mode = \"{mode}\"");
        for (key, t) in [
            ("data.u0", &self.u0),
            ("data.v0", &self.v0),
            ("data.u_boundary", &self.u_boundary),
            ("data.v_boundary", &self.v_boundary),
        ] {
            let _ = writeln!(s, "{key} = {}", table_text(t));
        }
        let _ = writeln!(s, "alpha = {}", alpha_text(&self.alpha));
        let _ = writeln!(s, "grid.x_min = {}", num(self.x_min));
        let _ = writeln!(s, "grid.x_max = {}", num(self.x_max));
        let _ = writeln!(s, "grid.cells = {}", self.cells);
        let _ = writeln!(s, "time.horizon = {}", num(self.horizon));
        let _ = writeln!(s, "time.slices = {}", nums(&self.slices));
        if let Some(e) = self.epsilon {
            let _ = writeln!(s, "viscous.epsilon = {}", num(e));
        }
        let _ = writeln!(s, "checks.entropy = {}", self.checks.entropy);
        let _ = writeln!(s, "checks.admissibility = {}", self.checks.admissibility);
        let _ = writeln!(s, "checks.bounds = {}", self.checks.bounds);
        if let Some(m) = self.checks.mass_condition {
            let _ = writeln!(s, "checks.mass_condition = {}", num(m));
        }
        if let Some(m) = self.checks.measure {
            let _ = writeln!(s, "checks.measure = {}", num(m));
        }
        s
    }
}

fn num(x: f64) -> String {
    let s = format!("{x:?}");
    if s.contains(['.', 'e', 'E']) || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

fn nums(xs: &[f64]) -> String {
    let inner: Vec<String> = xs.iter().map(|&x| num(x)).collect();
    format!("[{}]", inner.join(", "))
}

fn table_text(t: &TableSpec) -> String {
    match t {
        TableSpec::Constant(v) => format!("{{ kind = \"constant\", value = {} }}", num(*v)),
        TableSpec::PiecewiseConstant { breaks, values } => format!(
            "{{ kind = \"piecewise-constant\", breaks = {}, values = {} }}",
            nums(breaks),
            nums(values)
        ),
        TableSpec::PiecewiseLinear { nodes, values } => format!(
            "{{ kind = \"piecewise-linear\", nodes = {}, values = {} }}",
            nums(nodes),
            nums(values)
        ),
    }
}

fn alpha_text(a: &AlphaKind) -> String {
    let pairs = |s: &[(f64, f64)]| {
        let inner: Vec<String> = s
            .iter()
            .map(|(t, a)| format!("[{}, {}]", num(*t), num(*a)))
            .collect();
        format!("[{}]", inner.join(", "))
    };
    match a {
        AlphaKind::Constant(v) => format!("{{ kind = \"constant\", value = {} }}", num(*v)),
        AlphaKind::PiecewiseLinear(s) => {
            format!("{{ kind = \"piecewise-linear\", samples = {} }}", pairs(s))
        }
        AlphaKind::Tabulated(s) => format!("{{ kind = \"tabulated\", samples = {} }}", pairs(s)),
    }
}
