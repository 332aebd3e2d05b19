//! Slice assembly for the Hopf–Lax solutions: node evaluation, shock
//! localisation and run diagnostics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::potential::{Branch, HopfLax, MinimizerRecord, Traces, CO_MINIMAL_TOL, DEFAULT_CONTACT_NODES};
use super::admissible_set_contains_tol;
use crate::bv::{Jump, SampledBV};
use crate::damping::{pull_back_slice, push_data, TimeWarp};
use crate::error::{DropletError, Result};
use crate::field::FieldSlice;
use crate::profile::Profile;

/// Bisection steps used to localise a discontinuity inside a grid cell.
const LOCALISE_STEPS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Contact-time nodes for the boundary-branch table.
    pub contact_nodes: usize,
    /// Tolerance for the boundary-trace and mass-condition audits.
    pub trace_tol: f64,
    /// Slack for the monotonicity diagnostics on minimisers and exit times.
    pub order_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            contact_nodes: DEFAULT_CONTACT_NODES,
            trace_tol: 1e-6,
            order_tol: 1e-6,
        }
    }
}

/// Uniform space grid and the list of output times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub cells: usize,
    pub times: Vec<f64>,
}

impl GridSpec {
    pub fn half_line(x_max: f64, cells: usize, times: Vec<f64>) -> Self {
        GridSpec {
            x_min: 0.0,
            x_max,
            cells,
            times,
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        SampledBV::uniform_grid(self.x_min, self.x_max, self.cells)
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / self.cells as f64
    }

    fn validate(&self) -> Result<()> {
        if !(self.x_max > self.x_min) || self.cells < 3 {
            return Err(DropletError::invalid("grid needs x_max > x_min and at least 3 cells"));
        }
        if self.times.is_empty() || self.times.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(DropletError::invalid("output times must be positive and finite"));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DropletError::invalid("output times must be strictly increasing"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyViolation {
    pub tau: f64,
    pub location: f64,
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTraceEntry {
    pub tau: f64,
    /// `p(0+, τ)` by extrapolation from the first interior nodes.
    pub trace: f64,
    pub p_boundary: f64,
    pub admissible: bool,
    /// `|-V(0+, τ) - q_B(τ)|`, only when the trace is inflowing.
    pub mass_residual: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub entropy_violations: Vec<EntropyViolation>,
    /// Decreases of `y⁻` or `y⁺` in `x` among interior-branch nodes.
    pub minimizer_order_violations: usize,
    /// Increases of `τ₂` in `x` among boundary-branch nodes.
    pub exit_order_violations: usize,
    /// Decreases of `τ₂` in `τ` at a fixed node.
    pub exit_time_violations: usize,
    /// Boundary-branch nodes to the right of an interior-branch node.
    pub branch_nesting_violations: usize,
    pub boundary_log: Vec<BoundaryTraceEntry>,
}

impl Diagnostics {
    pub fn admissibility_violations(&self) -> usize {
        self.boundary_log.iter().filter(|e| !e.admissible).count()
    }

    pub fn max_mass_residual(&self) -> f64 {
        self.boundary_log
            .iter()
            .filter_map(|e| e.mass_residual)
            .fold(0.0, f64::max)
    }
}

/// Slices on the warped clock together with minimiser records per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuarterPlaneSolution {
    pub slices: Vec<FieldSlice>,
    pub records: Vec<Vec<MinimizerRecord>>,
    pub diagnostics: Diagnostics,
}

/// Pulled-back solution on physical time plus the undamped solution it came
/// from.
#[derive(Debug, Clone, PartialEq)]
pub struct DampedSolution {
    pub times: Vec<f64>,
    pub slices: Vec<FieldSlice>,
    pub warped: QuarterPlaneSolution,
}

struct NodeEval {
    record: MinimizerRecord,
    p: Traces,
    v: Traces,
}

fn evaluate(hl: &HopfLax, x: f64, tau: f64) -> Result<NodeEval> {
    let record = hl.potential(x, tau);
    let (p, v) = hl.traces(&record)?;
    Ok(NodeEval { record, p, v })
}

fn dominant(inc: &[f64], i: usize, floor: f64) -> bool {
    let d = inc[i].abs();
    if d <= floor {
        return false;
    }
    let left = (i > 0).then(|| inc[i - 1].abs());
    let right = (i + 1 < inc.len()).then(|| inc[i + 1].abs());
    let nb = match (left, right) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => 0.0,
    };
    d > 4.0 * nb
}

/// Build one slice at warped time `tau`. When `extrapolate_first` is set the
/// first node (the boundary) holds the one-sided traces at `x = 0+`.
fn build_slice(
    hl: &HopfLax,
    grid: &[f64],
    tau: f64,
    extrapolate_first: bool,
) -> Result<(FieldSlice, Vec<MinimizerRecord>)> {
    let evals: Vec<NodeEval> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            if i == 0 && extrapolate_first {
                // the corner itself: paths may exit at τ₂ = τ, so the traces
                // are taken as limits instead
                let record = hl.potential(x, tau);
                let nan = Traces::single(f64::NAN);
                Ok(NodeEval { record, p: nan, v: nan })
            } else {
                evaluate(hl, x, tau)
            }
        })
        .collect::<Result<_>>()?;
    let mut p: Vec<f64> = evals.iter().map(|e| e.p.left).collect();
    let mut v: Vec<f64> = evals.iter().map(|e| e.v.left).collect();
    if extrapolate_first {
        (p[0], v[0]) = hl.boundary_traces(tau)?;
    }
    let p_scale = 1.0 + p.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let v_scale = 1.0 + v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let p_inc: Vec<f64> = p.windows(2).map(|w| w[1] - w[0]).collect();
    let v_inc: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();

    let first_cell = usize::from(extrapolate_first);
    let candidates: Vec<usize> = (first_cell..grid.len() - 1)
        .filter(|&i| {
            let (a, b) = (&evals[i], &evals[i + 1]);
            a.record.branch != b.record.branch
                || a.record.branch == Branch::Tie
                || a.p.left != a.p.right
                || a.v.left != a.v.right
                || (p_inc[i] < 0.0 && dominant(&p_inc, i, 1e-10 * p_scale))
                || dominant(&v_inc, i, 1e-10 * v_scale)
        })
        .collect();

    let located: Vec<Option<(f64, bool, bool)>> = candidates
        .par_iter()
        .map(|&i| localise(hl, grid, tau, i, (p[i], v[i]), (p[i + 1], v[i + 1]), p_scale, v_scale))
        .collect::<Result<_>>()?;

    let mut p_jumps = Vec::new();
    let mut v_jumps = Vec::new();
    for (&i, loc) in candidates.iter().zip(located) {
        let Some((x, jp, jv)) = loc else { continue };
        if jp {
            p_jumps.push(Jump {
                location: x,
                left: p[i],
                right: p[i + 1],
                first_cell: i,
                last_cell: i,
            });
        }
        if jv {
            v_jumps.push(Jump {
                location: x,
                left: v[i],
                right: v[i + 1],
                first_cell: i,
                last_cell: i,
            });
        }
    }
    let velocity = SampledBV::new(grid.to_vec(), p)?.with_jumps(p_jumps)?;
    let cumulative = SampledBV::new(grid.to_vec(), v)?.with_jumps(v_jumps)?;
    let records = evals.into_iter().map(|e| e.record).collect();
    Ok((FieldSlice::assemble(tau, velocity, cumulative), records))
}

/// Bisect cell `i` for the point separating the left state from the right
/// state, then decide from the one-sided limits there whether `p` and `V`
/// are discontinuous.
#[allow(clippy::too_many_arguments)]
fn localise(
    hl: &HopfLax,
    grid: &[f64],
    tau: f64,
    i: usize,
    left: (f64, f64),
    right: (f64, f64),
    p_scale: f64,
    v_scale: f64,
) -> Result<Option<(f64, bool, bool)>> {
    let dist = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).abs() / p_scale + (a.1 - b.1).abs() / v_scale;
    let (mut lo, mut hi) = (grid[i], grid[i + 1]);
    let state = |x: f64| -> Result<((f64, f64), (f64, f64))> {
        let e = evaluate(hl, x, tau)?;
        Ok(((e.p.left, e.v.left), (e.p.right, e.v.right)))
    };
    let (mut s_lo, _) = state(lo)?;
    let (_, mut s_hi) = state(hi)?;
    for _ in 0..LOCALISE_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (sl, sr) = state(mid)?;
        if dist(sl, left) <= dist(sl, right) && dist(sr, left) <= dist(sr, right) {
            lo = mid;
            s_lo = sl;
        } else if dist(sl, right) < dist(sl, left) {
            hi = mid;
            s_hi = sl;
        } else {
            // the discontinuity sits exactly at `mid`
            lo = mid;
            hi = mid;
            s_lo = sl;
            s_hi = sr;
            break;
        }
    }
    // Where the two branches touch tangentially the co-minimal band has width
    // δ with δ²/(2τ) ~ tol, and inside it p differs by up to ~δ/τ without any
    // jump in the field. Only a larger difference counts as a shock.
    let band = CO_MINIMAL_TOL * (1.0 + evaluate(hl, lo, tau)?.record.action.abs());
    let p_floor = (1e-7 * p_scale).max(4.0 * (2.0 * band / tau).sqrt());
    let jp = (s_lo.0 - s_hi.0).abs() > p_floor;
    let jv = (s_lo.1 - s_hi.1).abs() > 1e-7 * v_scale;
    if !(jp || jv) {
        return Ok(None);
    }
    let x = 0.5 * (lo + hi);
    // keep the location strictly inside the cell
    let x = x.clamp(grid[i], grid[i + 1]);
    Ok(Some((x, jp, jv)))
}

fn slice_diagnostics(
    hl: &HopfLax,
    slice: &FieldSlice,
    records: &[MinimizerRecord],
    opts: &SolveOptions,
    diag: &mut Diagnostics,
    boundary: bool,
) {
    let tau = slice.time;
    for j in slice.velocity.jumps() {
        if j.left < j.right {
            diag.entropy_violations.push(EntropyViolation {
                tau,
                location: j.location,
                left: j.left,
                right: j.right,
            });
        }
    }
    let interior: Vec<&MinimizerRecord> = records
        .iter()
        .filter(|r| r.branch == Branch::Interior && r.x > 0.0)
        .collect();
    diag.minimizer_order_violations += interior
        .windows(2)
        .filter(|w| {
            w[1].y_minus < w[0].y_minus - opts.order_tol || w[1].y_plus < w[0].y_plus - opts.order_tol
        })
        .count();
    if !boundary {
        return;
    }
    let exits: Vec<f64> = records
        .iter()
        .filter(|r| r.branch == Branch::Boundary && r.x > 0.0)
        .filter_map(|r| r.tau2)
        .collect();
    diag.exit_order_violations += exits
        .windows(2)
        .filter(|w| w[1] > w[0] + opts.order_tol)
        .count();
    let mut seen_interior = false;
    for r in records.iter().skip(1) {
        match r.branch {
            Branch::Interior => seen_interior = true,
            Branch::Boundary if seen_interior => diag.branch_nesting_violations += 1,
            _ => {}
        }
    }
    let trace = slice.velocity.values()[0];
    let pb = hl.p_boundary().map_or(0.0, |p| p.eval(tau));
    let scale = 1.0 + pb.abs();
    let admissible = admissible_set_contains_tol(pb, trace, opts.trace_tol * scale);
    let mass_residual = (trace > opts.trace_tol * scale).then(|| {
        let qb = hl.q_boundary().map_or(0.0, |q| q.eval(tau));
        (-slice.cumulative.values()[0] - qb).abs()
    });
    diag.boundary_log.push(BoundaryTraceEntry {
        tau,
        trace,
        p_boundary: pb,
        admissible,
        mass_residual,
    });
}

fn exit_time_violations(records: &[Vec<MinimizerRecord>], tol: f64) -> usize {
    if records.is_empty() {
        return 0;
    }
    let nodes = records[0].len();
    (1..nodes)
        .map(|k| {
            let exits: Vec<f64> = records
                .iter()
                .filter(|s| s[k].branch == Branch::Boundary)
                .filter_map(|s| s[k].tau2)
                .collect();
            exits.windows(2).filter(|w| w[1] < w[0] - tol).count()
        })
        .sum()
}

/// Quarter-plane problem without damping, with the output times read as
/// warped times.
pub fn solve_ibvp_undamped(
    p0: &Profile,
    q0: &Profile,
    p_boundary: &Profile,
    q_boundary: &Profile,
    grid: &GridSpec,
    opts: &SolveOptions,
) -> Result<QuarterPlaneSolution> {
    grid.validate()?;
    if grid.x_min != 0.0 {
        return Err(DropletError::invalid("quarter-plane grids start at x = 0"));
    }
    let tau_top = *grid.times.last().unwrap();
    let hl = HopfLax::quarter_plane(
        p0.clone(),
        q0.clone(),
        p_boundary.clone(),
        q_boundary.clone(),
        tau_top,
        opts.contact_nodes,
    )?;
    let nodes = grid.nodes();
    let mut slices = Vec::with_capacity(grid.times.len());
    let mut records = Vec::with_capacity(grid.times.len());
    let mut diagnostics = Diagnostics::default();
    for &tau in &grid.times {
        let (slice, recs) = build_slice(&hl, &nodes, tau, true)?;
        slice_diagnostics(&hl, &slice, &recs, opts, &mut diagnostics, true);
        slices.push(slice);
        records.push(recs);
    }
    diagnostics.exit_time_violations = exit_time_violations(&records, opts.order_tol);
    Ok(QuarterPlaneSolution {
        slices,
        records,
        diagnostics,
    })
}

/// Damped quarter-plane problem: push the data to the warped clock, solve,
/// and pull the slices back to the requested physical times.
pub fn solve_ibvp(
    u0: &Profile,
    v0: &Profile,
    u_boundary: &Profile,
    v_boundary: &Profile,
    warp: &TimeWarp,
    grid: &GridSpec,
    opts: &SolveOptions,
) -> Result<DampedSolution> {
    grid.validate()?;
    let warped = push_data(u0, v0, u_boundary, v_boundary, warp)?;
    let taus: Vec<f64> = grid
        .times
        .iter()
        .map(|&t| warp.warp_time(t))
        .collect::<Result<_>>()?;
    let warped_grid = GridSpec {
        times: taus,
        ..grid.clone()
    };
    let solution = solve_ibvp_undamped(
        &warped.p0,
        &warped.q0,
        &warped.p_boundary,
        &warped.q_boundary,
        &warped_grid,
        opts,
    )?;
    let slices = solution
        .slices
        .iter()
        .zip(&grid.times)
        .map(|(s, &t)| pull_back_slice(s, t, warp))
        .collect();
    Ok(DampedSolution {
        times: grid.times.clone(),
        slices,
        warped: solution,
    })
}

/// Whole-line problem. Slices are returned on physical time; velocities are
/// `(x - y)/(τ A(t))` with `τ = τ(t)`.
pub fn solve_ivp(
    u0: &Profile,
    v0: &Profile,
    warp: &TimeWarp,
    grid: &GridSpec,
    opts: &SolveOptions,
) -> Result<DampedSolution> {
    grid.validate()?;
    let hl = HopfLax::whole_line(u0.clone(), v0.clone())?;
    let nodes = grid.nodes();
    let mut warped_slices = Vec::with_capacity(grid.times.len());
    let mut slices = Vec::with_capacity(grid.times.len());
    let mut records = Vec::with_capacity(grid.times.len());
    let mut diagnostics = Diagnostics::default();
    for &t in &grid.times {
        let tau = warp.warp_time(t)?;
        let (slice, recs) = build_slice(&hl, &nodes, tau, false)?;
        slice_diagnostics(&hl, &slice, &recs, opts, &mut diagnostics, false);
        slices.push(pull_back_slice(&slice, t, warp));
        warped_slices.push(slice);
        records.push(recs);
    }
    Ok(DampedSolution {
        times: grid.times.clone(),
        slices,
        warped: QuarterPlaneSolution {
            slices: warped_slices,
            records,
            diagnostics,
        },
    })
}
