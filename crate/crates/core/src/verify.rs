//! Weak-form verification of computed fields: equation residuals against
//! compactly supported test functions, data residuals, and audits of shocks,
//! boundary traces and the mass transport identity.

use serde::{Deserialize, Serialize};

use crate::bv::{jump_point_measure, volpert_product, SampledBV};
use crate::error::{DropletError, Result};
use crate::field::FieldSlice;
use crate::hopf_lax::admissible_set_contains_tol;
use crate::profile::Profile;

/// `(1 - r²)³` on `|r| < 1` with `r = (s - center)/half_width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub half_width: f64,
}

impl Bump {
    pub fn new(center: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) || !center.is_finite() {
            return Err(DropletError::invalid("bump needs a finite centre and positive width"));
        }
        Ok(Bump {
            center,
            half_width,
        })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }

    /// Value and first two derivatives.
    pub fn eval(&self, s: f64) -> (f64, f64, f64) {
        let w = self.half_width;
        let r = (s - self.center) / w;
        if r.abs() >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        let q = 1.0 - r * r;
        let v = q * q * q;
        let d1 = -6.0 * r * q * q / w;
        let d2 = (-6.0 * q * q + 24.0 * r * r * q) / (w * w);
        (v, d1, d2)
    }

    pub fn value(&self, s: f64) -> f64 {
        self.eval(s).0
    }

    pub fn derivative(&self, s: f64) -> f64 {
        self.eval(s).1
    }

    /// Bumps centred at the middle of `[lo, hi]` with half-widths
    /// `(hi - lo)/2 · 2⁻ᵏ`, `k = 0..count`.
    pub fn dyadic(lo: f64, hi: f64, count: usize) -> Vec<Bump> {
        let c = 0.5 * (lo + hi);
        let w = 0.5 * (hi - lo);
        (0..count)
            .map(|k| Bump {
                center: c,
                half_width: w * 0.5f64.powi(k as i32),
            })
            .collect()
    }
}

/// Tensor-product test function `φ(x, t) = bₓ(x) bₜ(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub space: Bump,
    pub time: Bump,
}

impl TestFunction {
    pub fn value(&self, x: f64, t: f64) -> f64 {
        self.space.value(x) * self.time.value(t)
    }

    /// The family of nested bumps over an `x` window and a `t` window.
    pub fn dyadic_family(x_window: (f64, f64), t_window: (f64, f64), count: usize) -> Vec<Self> {
        Bump::dyadic(x_window.0, x_window.1, count)
            .into_iter()
            .zip(Bump::dyadic(t_window.0, t_window.1, count))
            .map(|(space, time)| TestFunction { space, time })
            .collect()
    }
}

/// Default family: eight nested bumps.
pub const DEFAULT_FAMILY_SIZE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub phi: TestFunction,
    /// Residual of the velocity equation.
    pub momentum: f64,
    /// Residual of the volume-fraction equation.
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub entries: Vec<ResidualEntry>,
}

impl ResidualReport {
    pub fn sup(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.momentum.abs().max(e.mass.abs()))
            .fold(0.0, f64::max)
    }

    pub fn momentum_sup(&self) -> f64 {
        self.entries.iter().map(|e| e.momentum.abs()).fold(0.0, f64::max)
    }

    pub fn mass_sup(&self) -> f64 {
        self.entries.iter().map(|e| e.mass.abs()).fold(0.0, f64::max)
    }
}

const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

/// `∫ w(x, f(x)) dx` over `[a, b]` for the piecewise-linear (with steps at
/// jumps) reading of `f`.
pub fn integrate_field(f: &SampledBV, a: f64, b: f64, w: impl Fn(f64, f64) -> f64) -> Result<f64> {
    let profile = Profile::from_sampled(f)?;
    let mut total = 0.0;
    for (pa, pb, fa, fb) in profile.pieces() {
        let lo = pa.max(a);
        let hi = pb.min(b);
        if hi <= lo {
            continue;
        }
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (node, weight) in GAUSS3 {
            let x = mid + half * node;
            let fx = fa + (fb - fa) * (x - pa) / (pb - pa);
            total += weight * half * w(x, fx);
        }
    }
    Ok(total)
}

fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    (0..n)
        .map(|k| {
            let l = if k > 0 { times[k] - times[k - 1] } else { 0.0 };
            let r = if k + 1 < n { times[k + 1] - times[k] } else { 0.0 };
            0.5 * (l + r)
        })
        .collect()
}

/// Weak residuals of `u_t + (u²/2)_x + α u = 0` and `v_t + (u v)_x = 0`,
///
/// `∬ u φ_t + (u²/2) φ_x - α u φ` and `∬ φ_t dv + φ_x d(u v)`,
///
/// with `u v` the Volpert product and the time integral taken by the
/// trapezoid rule over the slice times. Test functions must be supported
/// strictly inside the slice time range.
pub fn interior_residual(
    slices: &[FieldSlice],
    alpha: impl Fn(f64) -> f64,
    phis: &[TestFunction],
) -> Result<ResidualReport> {
    if slices.len() < 2 {
        return Err(DropletError::invalid("residuals need at least two slices"));
    }
    let times: Vec<f64> = slices.iter().map(|s| s.time).collect();
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DropletError::invalid("slice times must increase"));
    }
    for phi in phis {
        let (t0, t1) = phi.time.support();
        if t0 < times[0] || t1 > times[times.len() - 1] {
            return Err(DropletError::OutOfRange {
                what: "test-function time support",
                value: if t0 < times[0] { t0 } else { t1 },
                lo: times[0],
                hi: times[times.len() - 1],
            });
        }
    }
    let weights = trapezoid_weights(&times);
    let products: Vec<_> = slices
        .iter()
        .map(|s| volpert_product(|p| p, &s.velocity, &s.cumulative))
        .collect::<Result<_>>()?;

    let mut entries = Vec::with_capacity(phis.len());
    for phi in phis {
        let (xa, xb) = phi.space.support();
        let mut momentum = 0.0;
        let mut mass = 0.0;
        for ((slice, &wt), flux) in slices.iter().zip(&weights).zip(&products) {
            let t = slice.time;
            let (bt, dbt, _) = phi.time.eval(t);
            if bt == 0.0 && dbt == 0.0 {
                continue;
            }
            let a = alpha(t);
            let m = integrate_field(&slice.velocity, xa, xb, |x, u| {
                let (bx, dbx, _) = phi.space.eval(x);
                u * bx * dbt + 0.5 * u * u * dbx * bt - a * u * bx * bt
            })?;
            let q = slice.measure.integrate(|x| phi.space.value(x) * dbt)
                + flux.integrate(|x| phi.space.derivative(x) * bt);
            momentum += wt * m;
            mass += wt * q;
        }
        entries.push(ResidualEntry {
            phi: *phi,
            momentum,
            mass,
        });
    }
    Ok(ResidualReport { entries })
}

/// Initial and boundary data of a run, on physical time.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTables {
    pub u0: Profile,
    pub v0: Profile,
    pub u_boundary: Profile,
    pub v_boundary: Profile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataResidualReport {
    /// `∫ (u(x, t₀) - u₀) ψ dx` per space bump.
    pub initial_velocity: Vec<f64>,
    /// `∫ ψ dv(·, t₀) - ∫ v₀ ψ dx` per space bump.
    pub initial_mass: Vec<f64>,
    /// `∫ (u(0, t) - u_B) ψ dt` over inflow times per time bump.
    pub boundary_velocity: Vec<f64>,
    /// `∫ (-V(0, t) - v_B) ψ dt` over times with inflowing trace.
    pub boundary_mass: Vec<f64>,
    /// Share of slice times at which `u_B ≤ 0`: the trace is only required
    /// to be admissible there and is left out of `boundary_velocity`.
    pub outflow_fraction: f64,
}

fn sup_abs(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

impl DataResidualReport {
    pub fn family_sups(&self) -> [f64; 4] {
        [
            sup_abs(&self.initial_velocity),
            sup_abs(&self.initial_mass),
            sup_abs(&self.boundary_velocity),
            sup_abs(&self.boundary_mass),
        ]
    }
}

/// Residuals of the initial and boundary conditions. The first slice is
/// taken as the initial state; boundary traces are the node-0 values.
pub fn data_residual(
    slices: &[FieldSlice],
    data: &DataTables,
    space_bumps: &[Bump],
    time_bumps: &[Bump],
) -> Result<DataResidualReport> {
    let first = slices
        .first()
        .ok_or_else(|| DropletError::invalid("no slices"))?;
    let mut initial_velocity = Vec::with_capacity(space_bumps.len());
    let mut initial_mass = Vec::with_capacity(space_bumps.len());
    for b in space_bumps {
        let (a, c) = b.support();
        let computed = integrate_field(&first.velocity, a, c, |x, u| u * b.value(x))?;
        let exact = integrate_profile(&data.u0, a, c, |x| b.value(x));
        initial_velocity.push(computed - exact);
        let computed = first.measure.integrate(|x| b.value(x));
        let exact = integrate_profile(&data.v0, a, c, |x| b.value(x));
        initial_mass.push(computed - exact);
    }
    let times: Vec<f64> = slices.iter().map(|s| s.time).collect();
    let weights = trapezoid_weights(&times);
    let mut outflow = 0usize;
    let mut boundary_velocity = vec![0.0; time_bumps.len()];
    let mut boundary_mass = vec![0.0; time_bumps.len()];
    for (slice, &w) in slices.iter().zip(&weights) {
        let t = slice.time;
        let ub = data.u_boundary.eval(t);
        let trace = slice.velocity.values()[0];
        let mass = -slice.cumulative.values()[0];
        if ub <= 0.0 {
            outflow += 1;
        }
        for (k, b) in time_bumps.iter().enumerate() {
            let psi = b.value(t);
            if psi == 0.0 {
                continue;
            }
            if ub > 0.0 {
                boundary_velocity[k] += w * (trace - ub) * psi;
            }
            if trace > 0.0 {
                boundary_mass[k] += w * (mass - data.v_boundary.eval(t)) * psi;
            }
        }
    }
    Ok(DataResidualReport {
        initial_velocity,
        initial_mass,
        boundary_velocity,
        boundary_mass,
        outflow_fraction: outflow as f64 / slices.len() as f64,
    })
}

fn integrate_profile(f: &Profile, a: f64, b: f64, w: impl Fn(f64) -> f64) -> f64 {
    let mut cuts = vec![a];
    cuts.extend(f.breaks().iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    let gl = crate::quadrature::GaussLegendre::cached(8);
    // Gauss nodes are interior, so steps at the cuts are respected
    cuts.windows(2)
        .map(|c| gl.integrate(c[0], c[1], |x| f.eval(x) * w(x)))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockRecord {
    pub time: f64,
    pub location: f64,
    pub left: f64,
    pub right: f64,
    pub admissible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyAudit {
    pub shocks: Vec<ShockRecord>,
}

impl EntropyAudit {
    pub fn violations(&self) -> usize {
        self.shocks.iter().filter(|s| !s.admissible).count()
    }
}

/// Every detected velocity jump must decrease: `u(x-) ≥ u(x+)`.
pub fn entropy_audit(slices: &[FieldSlice]) -> EntropyAudit {
    let shocks = slices
        .iter()
        .flat_map(|s| {
            s.velocity.jumps().iter().map(move |j| ShockRecord {
                time: s.time,
                location: j.location,
                left: j.left,
                right: j.right,
                admissible: j.left >= j.right,
            })
        })
        .collect();
    EntropyAudit { shocks }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryAuditEntry {
    pub time: f64,
    pub trace: f64,
    pub u_boundary: f64,
    pub admissible: bool,
    pub mass_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryAudit {
    pub entries: Vec<BoundaryAuditEntry>,
}

impl BoundaryAudit {
    pub fn violations(&self) -> usize {
        self.entries.iter().filter(|e| !e.admissible).count()
    }

    pub fn max_mass_residual(&self) -> f64 {
        self.entries
            .iter()
            .filter_map(|e| e.mass_residual)
            .fold(0.0, f64::max)
    }
}

/// Per slice: is the boundary trace admissible for `u_B(t)`, and when it is
/// inflowing, how far is `-V(0+, t)` from `v_B(t)`.
pub fn boundary_audit(
    slices: &[FieldSlice],
    u_boundary: &Profile,
    v_boundary: &Profile,
    tol: f64,
) -> BoundaryAudit {
    let entries = slices
        .iter()
        .map(|s| {
            let t = s.time;
            let ub = u_boundary.eval(t);
            let trace = s.velocity.values()[0];
            let scale = 1.0 + ub.abs();
            let admissible = admissible_set_contains_tol(ub, trace, tol * scale);
            let mass_residual = (trace > tol * scale)
                .then(|| (-s.cumulative.values()[0] - v_boundary.eval(t)).abs());
            BoundaryAuditEntry {
                time: t,
                trace,
                u_boundary: ub,
                admissible,
                mass_residual,
            }
        })
        .collect();
    BoundaryAudit { entries }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpResidual {
    pub time: f64,
    pub location: f64,
    /// Measured speed of the tracked jump.
    pub speed: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureResidualReport {
    pub jumps: Vec<JumpResidual>,
    /// Largest `|V_t + u V_x|` over nodes away from jumps.
    pub smooth_max: f64,
    pub smooth_nodes: usize,
}

impl MeasureResidualReport {
    pub fn max_jump_residual(&self) -> f64 {
        self.jumps.iter().map(|j| j.residual.abs()).fold(0.0, f64::max)
    }
}

fn jump_locations(s: &FieldSlice) -> Vec<f64> {
    let mut xs: Vec<f64> = s
        .cumulative
        .jumps()
        .iter()
        .chain(s.velocity.jumps())
        .map(|j| j.location)
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// `μ = V_t + u V_x` on interior slices. At each jump of `V` the point mass
/// `-s [V] + ū [V]` is evaluated with `s` the tracked speed and `ū` the
/// averaged superposition of `u` across the jump; elsewhere the identity is
/// checked by centred differences.
pub fn measure_equation_residual(slices: &[FieldSlice]) -> Result<MeasureResidualReport> {
    if slices.len() < 3 {
        return Err(DropletError::invalid("need at least three slices"));
    }
    let grid = slices[0].grid();
    if slices.iter().any(|s| s.grid() != grid) {
        return Err(DropletError::invalid("slices must share one grid"));
    }
    let n = grid.len();
    let h_max = grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let u_max = slices
        .iter()
        .flat_map(|s| s.velocity.values().iter())
        .fold(0.0f64, |m, u| m.max(u.abs()));

    let mut jumps = Vec::new();
    let mut smooth_max = 0.0f64;
    let mut smooth_nodes = 0;
    for k in 1..slices.len() - 1 {
        let (prev, cur, next) = (&slices[k - 1], &slices[k], &slices[k + 1]);
        let dt = next.time - prev.time;
        let reach = (u_max + 1.0) * dt + 2.0 * h_max;
        let locs = |s: &FieldSlice| -> Vec<f64> { s.cumulative.jumps().iter().map(|j| j.location).collect() };
        let (lp, lc, ln) = (locs(prev), locs(cur), locs(next));
        let closest = |set: &[f64], x: f64| -> Option<f64> {
            set.iter()
                .copied()
                .filter(|y| (y - x).abs() <= reach)
                .min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs()))
        };
        // a partner counts only if the pairing is mutual, so two jumps that
        // merge between slices do not both claim the merged one
        let partner = |other: &[f64], x: f64| -> Option<f64> {
            let y = closest(other, x)?;
            (closest(&lc, y) == Some(x)).then_some(y)
        };
        for j in cur.cumulative.jumps() {
            let (before, after) = (partner(&lp, j.location), partner(&ln, j.location));
            let speed = match (before, after) {
                (Some(a), Some(b)) => (b - a) / dt,
                (Some(a), None) => (j.location - a) / (cur.time - prev.time),
                (None, Some(b)) => (b - j.location) / (next.time - cur.time),
                (None, None) => continue,
            };
            let (pl, pr) = match cur.velocity.jump_in_cell(j.first_cell) {
                Some(pj) => (pj.left, pj.right),
                None => {
                    let v = cur.velocity.values();
                    (v[j.first_cell], v[j.last_cell + 1])
                }
            };
            jumps.push(JumpResidual {
                time: cur.time,
                location: j.location,
                speed,
                residual: jump_point_measure(pl, pr, j.left, j.right, speed),
            });
        }

        let mut blocked: Vec<f64> = jump_locations(prev);
        blocked.extend(jump_locations(cur));
        blocked.extend(jump_locations(next));
        let margin = 2.0 * h_max;
        let (vp, vc, vn) = (
            prev.cumulative.values(),
            cur.cumulative.values(),
            next.cumulative.values(),
        );
        let u = cur.velocity.values();
        for i in 1..n - 1 {
            let x = grid[i];
            if blocked.iter().any(|&y| (y - x).abs() <= margin) {
                continue;
            }
            let vt = (vn[i] - vp[i]) / dt;
            let vx = (vc[i + 1] - vc[i - 1]) / (grid[i + 1] - grid[i - 1]);
            smooth_max = smooth_max.max((vt + u[i] * vx).abs());
            smooth_nodes += 1;
        }
    }
    Ok(MeasureResidualReport {
        jumps,
        smooth_max,
        smooth_nodes,
    })
}
