//! Entropy solutions of the undamped system through the Hopf–Lax value
//! function, on the quarter plane and on the whole line.

mod action;
mod potential;
mod solver;

pub use action::{
    boundary_path_action, interior_action, min_boundary_action, BoundaryAction,
    COARSE_CONTACT_NODES, REFINEMENT_ROUNDS,
};
pub use potential::{
    cumulative_mass, initial_potential, initial_potential_sampled, velocity, Branch, HopfLax,
    InitialPotential, InteriorMin, MinimizerRecord, Traces, CO_MINIMAL_TOL,
    DEFAULT_CONTACT_NODES,
};
pub use solver::{
    solve_ibvp, solve_ibvp_undamped, solve_ivp, BoundaryTraceEntry, DampedSolution, Diagnostics,
    EntropyViolation, GridSpec, QuarterPlaneSolution, SolveOptions,
};

use serde::{Deserialize, Serialize};

use crate::profile::Profile;

/// Admissible boundary traces: `(-∞, 0]` when `u_B ≤ 0`, otherwise
/// `{u_B} ∪ (-∞, -u_B]`.
pub fn admissible_set_contains(u_boundary: f64, trace: f64) -> bool {
    admissible_set_contains_tol(u_boundary, trace, 0.0)
}

pub fn admissible_set_contains_tol(u_boundary: f64, trace: f64, tol: f64) -> bool {
    if u_boundary <= 0.0 {
        trace <= tol
    } else {
        (trace - u_boundary).abs() <= tol || trace <= -u_boundary + tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassConditionEntry {
    pub tau: f64,
    pub trace: f64,
    /// `None` when the slice is outflowing and no condition is imposed.
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassConditionReport {
    pub entries: Vec<MassConditionEntry>,
    pub tol: f64,
}

impl MassConditionReport {
    pub fn max_residual(&self) -> f64 {
        self.entries
            .iter()
            .filter_map(|e| e.residual)
            .fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_residual() <= self.tol
    }
}

/// For each inflowing slice (`p(0+, τ) > tol`) compare the mass `-V(0+, τ)`
/// with `q_B(τ)`. Traces come from the exit-time relation `τ - τ₂ = x/p` on
/// the innermost boundary-branch nodes when available, otherwise from
/// extrapolation of the sampled fields.
pub fn mass_condition_check(
    solution: &QuarterPlaneSolution,
    q_boundary: &Profile,
    tol: f64,
) -> MassConditionReport {
    let entries = solution
        .slices
        .iter()
        .zip(&solution.records)
        .map(|(slice, recs)| {
            let tau = slice.time;
            let inner: Vec<&MinimizerRecord> = recs
                .iter()
                .skip(1)
                .take(2)
                .filter(|r| r.branch == Branch::Boundary)
                .collect();
            let (trace, mass) = if inner.len() == 2 {
                // τ₂(x) → τ as x → 0: the exit data of the innermost paths
                let t2: Vec<f64> = inner.iter().map(|r| r.tau2.unwrap_or(0.0)).collect();
                let (x1, x2) = (inner[0].x, inner[1].x);
                let slope = (t2[1] - t2[0]) / (x2 - x1);
                let t2_0 = (t2[0] - slope * x1).min(tau);
                let p = if tau - t2[0] > 0.0 { x1 / (tau - t2[0]) } else { 0.0 };
                (p, q_boundary.eval(t2_0))
            } else {
                (
                    slice.velocity.values()[0],
                    -slice.cumulative.values()[0],
                )
            };
            let residual = (trace > tol).then(|| (mass - q_boundary.eval(tau)).abs());
            MassConditionEntry {
                tau,
                trace,
                residual,
            }
        })
        .collect();
    MassConditionReport { entries, tol }
}
