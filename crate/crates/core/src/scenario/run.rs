//! Scenario execution: dispatch to a solver, run the requested checks, and
//! the viscosity ladder study.

use serde::{Deserialize, Serialize};

use super::{Scenario, SolverKind};
use crate::damping::{build_warp, push_data, DEFAULT_WARP_RESOLUTION};
use crate::error::{DropletError, Result};
use crate::field::FieldSlice;
use crate::hopf_lax::{mass_condition_check, solve_ibvp, solve_ivp, GridSpec, SolveOptions};
use crate::profile::Profile;
use crate::quadrature::GaussLegendre;
use crate::verify::{
    boundary_audit, data_residual, entropy_audit, interior_residual, measure_equation_residual,
    Bump, DataTables, TestFunction, DEFAULT_FAMILY_SIZE,
};
use crate::viscous::{run_viscous, ViscousOptions};

/// Relative tolerance for boundary-trace admissibility before scaling.
const TRACE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Multiplies every check tolerance.
    pub tol_scale: f64,
    /// Replace the scenario's slice times by `k T / n`, `k = 1..=n`.
    pub slices: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            tol_scale: 1.0,
            slices: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.to_string(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    /// The scenario as run, with effective slice times.
    pub scenario: Scenario,
    pub slices: Vec<FieldSlice>,
    pub checks: Vec<CheckResult>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn effective(scenario: &Scenario, opts: &RunOptions) -> Scenario {
    let mut s = scenario.clone();
    if let Some(n) = opts.slices {
        let n = n.max(1);
        s.slices = (1..=n).map(|k| scenario.horizon * k as f64 / n as f64).collect();
    }
    s
}

/// Checks that only need the slices and the data tables they should honour.
pub fn verify_slices(
    scenario: &Scenario,
    slices: &[FieldSlice],
    tables: &DataTables,
    tol_scale: f64,
) -> Result<Vec<CheckResult>> {
    let c = &scenario.checks;
    let mut out = Vec::new();
    if c.entropy {
        let audit = entropy_audit(slices);
        out.push(CheckResult::at_most("entropy_violations", audit.violations() as f64, 0.0));
    }
    let half_line = scenario.solver != SolverKind::Ivp;
    if half_line && (c.admissibility || c.mass_condition.is_some()) {
        let audit = boundary_audit(slices, &tables.u_boundary, &tables.v_boundary, TRACE_TOL * tol_scale);
        if c.admissibility {
            out.push(CheckResult::at_most(
                "admissibility_violations",
                audit.violations() as f64,
                0.0,
            ));
        }
        if let Some(tol) = c.mass_condition {
            out.push(CheckResult::at_most(
                "mass_condition",
                audit.max_mass_residual(),
                tol * tol_scale,
            ));
        }
    }
    if let Some(tol) = c.measure {
        if slices.len() < 3 {
            return Err(DropletError::Config(
                "checks.measure: needs at least three slices".into(),
            ));
        }
        let r = measure_equation_residual(slices)?;
        out.push(CheckResult::at_most("measure_jump_residual", r.max_jump_residual(), tol * tol_scale));
    }
    Ok(out)
}

/// Solve the scenario and evaluate its checks.
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<RunOutcome> {
    let scenario = effective(scenario, opts);
    scenario.validate()?;
    let [u0, v0, ub, vb] = scenario.profiles()?;
    let spec = scenario.damping();
    let warp = build_warp(&spec, DEFAULT_WARP_RESOLUTION)?;
    let grid = GridSpec {
        x_min: scenario.x_min,
        x_max: scenario.x_max,
        cells: scenario.cells,
        times: scenario.slices.clone(),
    };
    let solve_opts = SolveOptions {
        trace_tol: TRACE_TOL * opts.tol_scale,
        ..SolveOptions::default()
    };
    let tables = DataTables {
        u0: u0.clone(),
        v0: v0.clone(),
        u_boundary: ub.clone(),
        v_boundary: vb.clone(),
    };
    let (slices, mut checks) = match scenario.solver {
        SolverKind::HopfLax => {
            let sol = solve_ibvp(&u0, &v0, &ub, &vb, &warp, &grid, &solve_opts)?;
            let mut checks = verify_slices(&scenario, &sol.slices, &tables, opts.tol_scale)?;
            if let Some(tol) = scenario.checks.mass_condition {
                // the same condition read off the exit times of boundary paths
                let warped = push_data(&u0, &v0, &ub, &vb, &warp)?;
                let report = mass_condition_check(&sol.warped, &warped.q_boundary, tol * opts.tol_scale);
                checks.push(CheckResult::at_most(
                    "mass_condition_exit_times",
                    report.max_residual(),
                    report.tol,
                ));
            }
            (sol.slices, checks)
        }
        SolverKind::Ivp => {
            let sol = solve_ivp(&u0, &v0, &warp, &grid, &solve_opts)?;
            let checks = verify_slices(&scenario, &sol.slices, &tables, opts.tol_scale)?;
            (sol.slices, checks)
        }
        SolverKind::Viscous => {
            let eps = scenario.epsilon.unwrap_or_default();
            let sol = run_viscous(
                &u0,
                &v0,
                &ub,
                &vb,
                &spec,
                eps,
                &scenario.slices,
                scenario.mode,
                &ViscousOptions::default(),
            )?;
            let slices = sol.field_slices();
            let m = &sol.mollified;
            let imposed = DataTables {
                u0: m.u0.clone(),
                v0: m.v0.clone(),
                u_boundary: m.u_boundary.clone(),
                v_boundary: m.v_boundary.clone(),
            };
            let mut checks = verify_slices(&scenario, &slices, &imposed, opts.tol_scale)?;
            if scenario.checks.bounds {
                checks.push(CheckResult::at_most(
                    "bound_violations",
                    sol.bound_violations() as f64,
                    0.0,
                ));
            }
            (slices, checks)
        }
    };
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(RunOutcome {
        scenario,
        slices,
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    /// `∫ |uᵋ - p| dx` over the comparison window at the final time.
    pub l1_distance: f64,
    pub momentum_residual: f64,
    pub mass_residual: f64,
    /// Sup over the four data-residual families.
    pub data_residual: f64,
    pub data_families: [f64; 4],
    pub bound_violations: usize,
    pub l1_ratio: Option<f64>,
    pub residual_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub window: (f64, f64),
    pub rows: Vec<ConvergenceRow>,
}

/// Fraction of the domain left out next to the boundary layer.
const BOUNDARY_STRIP: f64 = 0.05;
/// Output steps of the viscous runs in a ladder study.
const LADDER_SLICES: usize = 200;

/// `∫ₐᵇ |f - g|` for piecewise-linear profiles, Gauss rule on a fine split.
fn l1_distance(f: &Profile, g: &Profile, a: f64, b: f64) -> f64 {
    let mut cuts: Vec<f64> = f
        .breaks()
        .iter()
        .chain(g.breaks())
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let gl = GaussLegendre::cached(4);
    cuts.windows(2)
        .map(|w| gl.integrate(w[0], w[1], |x| (f.eval(x) - g.eval(x)).abs()))
        .sum()
}

/// Run the viscous solver along `ladder` and compare with the Hopf–Lax
/// solution of the same data at the final time.
pub fn converge(scenario: &Scenario, ladder: &[f64]) -> Result<ConvergenceTable> {
    if scenario.solver == SolverKind::Ivp {
        return Err(DropletError::Config(
            "solver: the ladder study needs a half-line scenario".into(),
        ));
    }
    if ladder.is_empty() || ladder.iter().any(|e| !(*e > 0.0)) {
        return Err(DropletError::InvalidParameter("ladder needs positive ε values".into()));
    }
    let [u0, v0, ub, vb] = scenario.profiles()?;
    let spec = scenario.damping();
    let warp = build_warp(&spec, DEFAULT_WARP_RESOLUTION)?;
    let t_end = scenario.horizon;
    let grid = GridSpec::half_line(scenario.x_max, scenario.cells, vec![t_end]);
    let reference = solve_ibvp(&u0, &v0, &ub, &vb, &warp, &grid, &SolveOptions::default())?;
    let p_ref = Profile::from_sampled(&reference.slices[0].velocity)?;

    let strip = BOUNDARY_STRIP * scenario.x_max;
    let window = (strip, scenario.x_max);
    let phis = TestFunction::dyadic_family(
        (strip, scenario.x_max - strip),
        (1e-3 * t_end, t_end),
        DEFAULT_FAMILY_SIZE,
    );
    let space_bumps = Bump::dyadic(strip, scenario.x_max - strip, DEFAULT_FAMILY_SIZE);
    let time_bumps = Bump::dyadic(1e-3 * t_end, t_end, DEFAULT_FAMILY_SIZE);
    let tables = DataTables {
        u0: u0.clone(),
        v0: v0.clone(),
        u_boundary: ub.clone(),
        v_boundary: vb.clone(),
    };
    let times: Vec<f64> = (0..=LADDER_SLICES)
        .map(|k| t_end * k as f64 / LADDER_SLICES as f64)
        .collect();

    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(ladder.len());
    for &eps in ladder {
        let sol = run_viscous(
            &u0,
            &v0,
            &ub,
            &vb,
            &spec,
            eps,
            &times,
            scenario.mode,
            &ViscousOptions::default(),
        )?;
        let slices = sol.field_slices();
        let last = Profile::from_sampled(&slices[slices.len() - 1].velocity)?;
        let l1 = l1_distance(&last, &p_ref, window.0, window.1);
        let interior = interior_residual(&slices, |t| warp.alpha(t), &phis)?;
        let data = data_residual(&slices, &tables, &space_bumps, &time_bumps)?;
        let families = data.family_sups();
        let data_sup = families.iter().cloned().fold(0.0, f64::max);
        let (l1_ratio, residual_ratio) = match rows.last() {
            Some(prev) => (
                Some(l1 / prev.l1_distance),
                Some(interior.sup() / prev.momentum_residual.max(prev.mass_residual)),
            ),
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            epsilon: eps,
            l1_distance: l1,
            momentum_residual: interior.momentum_sup(),
            mass_residual: interior.mass_sup(),
            data_residual: data_sup,
            data_families: families,
            bound_violations: sol.bound_violations(),
            l1_ratio,
            residual_ratio,
        });
    }
    Ok(ConvergenceTable { window, rows })
}
