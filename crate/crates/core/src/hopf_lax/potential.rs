//! The value function `P(x, τ) = min_y min(A, B) + P₀(y)` and its minimizers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::action::{exit_term, golden_min, BoundaryAction};
use crate::bv::SampledBV;
use crate::error::{DropletError, Result};
use crate::profile::Profile;

/// Relative tolerance under which two actions count as co-minimal.
pub const CO_MINIMAL_TOL: f64 = 1e-9;

fn co_minimal(a: f64, b: f64) -> bool {
    (a - b).abs() <= CO_MINIMAL_TOL * (1.0 + a.abs().min(b.abs()))
}

/// `P₀(y) = ∫₀ʸ p₀` for a profile; exact.
pub fn initial_potential(p0: &Profile, y: f64) -> f64 {
    p0.integral(0.0, y)
}

/// `P₀(y)` for node-sampled data. Beyond the grid `p₀` is extended by its last
/// value and the second field reports the extrapolation.
pub fn initial_potential_sampled(p0: &SampledBV, y: f64) -> Result<(f64, bool)> {
    let profile = Profile::from_sampled(p0)?;
    let end = *p0.grid().last().unwrap();
    Ok((profile.integral(0.0, y), y > end || y < p0.grid()[0]))
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    reference: f64,
    value: f64,
    slope: f64,
}

/// `P₀` prepared for exact minimisation of `(x-y)²/(2τ) + P₀(y)`: on every
/// linear piece of `p₀` the objective is quadratic.
#[derive(Debug, Clone)]
pub struct InitialPotential {
    p0: Profile,
    lower: Option<f64>,
    segments: Vec<Segment>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorMin {
    pub value: f64,
    pub y_minus: f64,
    pub y_plus: f64,
}

impl InitialPotential {
    /// Minimisation over `y ≥ 0`.
    pub fn half_line(p0: Profile) -> Self {
        Self::build(p0, Some(0.0))
    }

    /// Minimisation over the whole line.
    pub fn whole_line(p0: Profile) -> Self {
        Self::build(p0, None)
    }

    fn build(p0: Profile, lower: Option<f64>) -> Self {
        let mut segments = Vec::new();
        let start = p0.start();
        let end = p0.end();
        let lo_bound = lower.unwrap_or(f64::NEG_INFINITY);
        if lo_bound < start {
            segments.push(Segment {
                lo: lo_bound,
                hi: start,
                reference: start,
                value: p0.first_value(),
                slope: 0.0,
            });
        }
        for (a, b, fa, fb) in p0.pieces() {
            let lo = a.max(lo_bound);
            if b <= lo {
                continue;
            }
            let slope = (fb - fa) / (b - a);
            segments.push(Segment {
                lo,
                hi: b,
                reference: a,
                value: fa,
                slope,
            });
        }
        let tail_lo = end.max(lo_bound);
        segments.push(Segment {
            lo: tail_lo,
            hi: f64::INFINITY,
            reference: tail_lo,
            value: p0.last_value(),
            slope: 0.0,
        });
        InitialPotential {
            p0,
            lower,
            segments,
        }
    }

    pub fn profile(&self) -> &Profile {
        &self.p0
    }

    pub fn lower(&self) -> Option<f64> {
        self.lower
    }

    pub fn value(&self, y: f64) -> f64 {
        self.p0.integral(0.0, y)
    }

    fn objective(&self, x: f64, tau: f64, y: f64) -> f64 {
        (x - y) * (x - y) / (2.0 * tau) + self.value(y)
    }

    /// Exact `min_y (x-y)²/(2τ) + P₀(y)` with the smallest and largest
    /// co-minimal `y`.
    pub fn minimize_interior(&self, x: f64, tau: f64) -> InteriorMin {
        let inv = 1.0 / tau;
        let mut cands: Vec<(f64, f64)> = Vec::with_capacity(3 * self.segments.len());
        for s in &self.segments {
            if inv + s.slope > 0.0 {
                // scaled by τ so that flat data return y = x exactly
                let y = (x - tau * (s.value - s.slope * s.reference)) / (1.0 + tau * s.slope);
                let y = y.clamp(s.lo, s.hi);
                if y.is_finite() {
                    cands.push((self.objective(x, tau, y), y));
                }
            }
            for e in [s.lo, s.hi] {
                if e.is_finite() {
                    cands.push((self.objective(x, tau, e), e));
                }
            }
        }
        let best = cands
            .iter()
            .map(|c| c.0)
            .fold(f64::INFINITY, f64::min);
        let mut y_minus = f64::INFINITY;
        let mut y_plus = f64::NEG_INFINITY;
        for &(v, y) in &cands {
            if co_minimal(v, best) {
                y_minus = y_minus.min(y);
                y_plus = y_plus.max(y);
            }
        }
        InteriorMin {
            value: best,
            y_minus,
            y_plus,
        }
    }
}

/// Which family of paths attains the minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Interior,
    Boundary,
    Tie,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Interior => "interior",
            Branch::Boundary => "boundary",
            Branch::Tie => "tie",
        }
    }
}

/// Outcome of the minimisation at one `(x, τ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizerRecord {
    pub x: f64,
    pub tau: f64,
    pub y_minus: f64,
    pub y_plus: f64,
    pub branch: Branch,
    /// Boundary contact times; `None` on the interior branch.
    pub tau1: Option<f64>,
    pub tau2: Option<f64>,
    /// `P(x, τ)`.
    pub action: f64,
    pub interior_value: f64,
    pub boundary_value: f64,
    /// Minimisers of the interior branch (may differ from `y_minus/y_plus`
    /// on a tie, where the boundary path fixes its own entry point).
    pub interior_y: (f64, f64),
}

/// `K + W` tabulated on a uniform grid of contact times, where
/// `W(σ) = min_y y²/(2σ) + P₀(y)` is the cheapest arrival at the corner
/// `(0, σ)` from the initial line. With it the boundary branch reduces to
/// `min_{τ₁ ≤ τ₂} [K(τ₁) + W(τ₁)] - K(τ₂) + x²/(2(τ-τ₂))`.
#[derive(Debug, Clone)]
struct BoundaryReach {
    sigma: Vec<f64>,
    step: f64,
    prefix_min: Vec<f64>,
    prefix_arg: Vec<usize>,
}

/// Undamped problem data prepared for repeated evaluation of the value
/// function.
#[derive(Debug, Clone)]
pub struct HopfLax {
    potential: InitialPotential,
    q0: Profile,
    boundary: Option<(BoundaryAction, Profile)>,
    reach: Option<BoundaryReach>,
}

pub const DEFAULT_CONTACT_NODES: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Traces {
    pub left: f64,
    pub right: f64,
}

impl Traces {
    pub fn single(v: f64) -> Self {
        Traces { left: v, right: v }
    }
}

fn check_integrable(q0: &Profile, whole_line: bool) -> Result<()> {
    if q0.last_value() != 0.0 || (whole_line && q0.first_value() != 0.0) {
        return Err(DropletError::invalid(
            "volume-fraction data must vanish outside its breakpoints",
        ));
    }
    Ok(())
}

impl HopfLax {
    /// Quarter-plane problem; `tau_top` bounds the times that will be queried.
    pub fn quarter_plane(
        p0: Profile,
        q0: Profile,
        p_boundary: Profile,
        q_boundary: Profile,
        tau_top: f64,
        contact_nodes: usize,
    ) -> Result<Self> {
        check_integrable(&q0, false)?;
        if !(tau_top > 0.0) || contact_nodes < 2 {
            return Err(DropletError::invalid("need τ_top > 0 and at least two contact nodes"));
        }
        let potential = InitialPotential::half_line(p0);
        let action = BoundaryAction::new(p_boundary);
        let mut hl = HopfLax {
            potential,
            q0,
            boundary: Some((action, q_boundary)),
            reach: None,
        };
        let n = contact_nodes;
        let step = tau_top / (n - 1) as f64;
        let sigma: Vec<f64> = (0..n).map(|k| step * k as f64).collect();
        let reach_vals: Vec<f64> = sigma.par_iter().map(|&s| hl.reach_value(s)).collect();
        let mut prefix_min = Vec::with_capacity(n);
        let mut prefix_arg = Vec::with_capacity(n);
        let (mut best, mut arg) = (f64::INFINITY, 0);
        for (k, &v) in reach_vals.iter().enumerate() {
            if v < best {
                best = v;
                arg = k;
            }
            prefix_min.push(best);
            prefix_arg.push(arg);
        }
        hl.reach = Some(BoundaryReach {
            sigma,
            step,
            prefix_min,
            prefix_arg,
        });
        Ok(hl)
    }

    /// Whole-line problem: interior paths only.
    pub fn whole_line(u0: Profile, v0: Profile) -> Result<Self> {
        check_integrable(&v0, true)?;
        Ok(HopfLax {
            potential: InitialPotential::whole_line(u0),
            q0: v0,
            boundary: None,
            reach: None,
        })
    }

    pub fn potential_data(&self) -> &InitialPotential {
        &self.potential
    }

    pub fn boundary_action(&self) -> Option<&BoundaryAction> {
        self.boundary.as_ref().map(|b| &b.0)
    }

    pub fn q_boundary(&self) -> Option<&Profile> {
        self.boundary.as_ref().map(|b| &b.1)
    }

    pub fn p_boundary(&self) -> Option<&Profile> {
        self.boundary.as_ref().map(|b| b.0.p_boundary())
    }

    fn cumulative(&self, s: f64) -> f64 {
        self.boundary.as_ref().map_or(0.0, |b| b.0.cumulative(s))
    }

    /// `K(σ) + W(σ)`.
    fn reach_value(&self, sigma: f64) -> f64 {
        let w = if sigma > 0.0 {
            self.potential.minimize_interior(0.0, sigma).value
        } else {
            0.0
        };
        self.cumulative(sigma) + w
    }

    /// `min_{τ₁ ≤ s} K(τ₁) + W(τ₁)` with the tabulated prefix minimum and a
    /// direct evaluation at `s`.
    fn reach_prefix(&self, reach: &BoundaryReach, s: f64) -> (f64, f64) {
        let k = ((s / reach.step).floor() as usize).min(reach.sigma.len() - 1);
        let tab = (reach.prefix_min[k], reach.sigma[reach.prefix_arg[k]]);
        let here = self.reach_value(s);
        if here <= tab.0 {
            (here, s)
        } else {
            tab
        }
    }

    /// Minimal boundary-path value at `(x, τ)` over entry point, contact
    /// times and exit; returns `(value, τ₁, τ₂)`.
    fn boundary_min(&self, x: f64, tau: f64) -> (f64, f64, f64) {
        let Some(reach) = &self.reach else {
            return (f64::INFINITY, 0.0, 0.0);
        };
        let exit = |s: f64| -self.cumulative(s) + exit_term(x, tau, s);
        let mut best = (f64::INFINITY, 0usize);
        for (k, &s) in reach.sigma.iter().enumerate() {
            if s > tau {
                break;
            }
            let v = reach.prefix_min[k] + exit(s);
            if v <= best.0 {
                best = (v, k);
            }
        }
        if !best.0.is_finite() {
            return (f64::INFINITY, 0.0, tau);
        }
        let k = best.1;
        let lo = reach.sigma[k.saturating_sub(1)];
        let hi = reach.sigma.get(k + 1).copied().unwrap_or(tau).min(tau);
        let (t2, _) = golden_min(|s| self.reach_prefix(reach, s).0 + exit(s), lo, hi, 90);
        let t2 = if self.reach_prefix(reach, t2).0 + exit(t2) <= best.0 {
            t2
        } else {
            reach.sigma[k]
        };

        // entry time: refine around the tabulated argmin, also allow τ₁ = τ₂
        let (_, t1_tab) = self.reach_prefix(reach, t2);
        let lo = (t1_tab - reach.step).max(0.0);
        let hi = (t1_tab + reach.step).min(t2);
        let (t1_ref, v1_ref) = golden_min(|s| self.reach_value(s), lo, hi, 90);
        let mut t1 = t1_tab;
        let mut v1 = self.reach_value(t1_tab);
        for (t, v) in [(t1_ref, v1_ref), (t2, self.reach_value(t2))] {
            if v < v1 {
                t1 = t;
                v1 = v;
            }
        }
        (v1 + exit(t2), t1, t2)
    }

    /// Value function and minimiser record at `(x, τ)`.
    pub fn potential(&self, x: f64, tau: f64) -> MinimizerRecord {
        let interior = self.potential.minimize_interior(x, tau);
        let (bval, t1, t2) = self.boundary_min(x, tau);
        let branch = if co_minimal(interior.value, bval) {
            Branch::Tie
        } else if interior.value < bval {
            Branch::Interior
        } else {
            Branch::Boundary
        };
        let (y_minus, y_plus) = match branch {
            Branch::Interior => (interior.y_minus, interior.y_plus),
            _ => {
                let entry = if t1 > 0.0 {
                    let m = self.potential.minimize_interior(0.0, t1);
                    (m.y_minus, m.y_plus)
                } else {
                    (0.0, 0.0)
                };
                if branch == Branch::Tie {
                    (entry.0.min(interior.y_minus), entry.1.max(interior.y_plus))
                } else {
                    entry
                }
            }
        };
        let on_boundary = branch != Branch::Interior;
        MinimizerRecord {
            x,
            tau,
            y_minus,
            y_plus,
            branch,
            tau1: on_boundary.then_some(t1),
            tau2: on_boundary.then_some(t2),
            action: interior.value.min(bval),
            interior_value: interior.value,
            boundary_value: bval,
            interior_y: (interior.y_minus, interior.y_plus),
        }
    }

    fn tail_mass(&self, y: f64) -> f64 {
        -self.q0.tail_integral(y)
    }

    /// Exact one-sided traces `(p(0+, τ), V(0+, τ))` at the boundary.
    ///
    /// Boundary paths leaving the corner at `x → 0+` exit with speed
    /// `p_B⁺(τ-)`; interior paths with `-y/τ`. For `x > 0` the branch with the
    /// smaller speed wins a tie, since `P` grows like `p x` along each branch.
    pub fn boundary_traces(&self, tau: f64) -> Result<(f64, f64)> {
        let (pb, qb) = match &self.boundary {
            Some((a, q)) => (a.p_boundary(), q),
            None => return Err(DropletError::invalid("boundary traces need a quarter-plane problem")),
        };
        // a point close enough to the corner to fix the branch and exit time
        let delta = 1e-9 * (1.0 + tau);
        let r = self.potential(delta, tau);
        let mut c: Vec<(f64, f64)> = Vec::with_capacity(2);
        if r.branch != Branch::Boundary {
            let y = r.interior_y.0;
            c.push(((delta - y) / tau, self.tail_mass(y)));
        }
        if r.branch != Branch::Interior {
            let exit = pb.eval_left(tau).max(0.0);
            let t2 = if exit > 0.0 { tau } else { r.tau2.unwrap_or(0.0) };
            c.push((exit, -qb.eval_left(t2)));
        }
        Ok(c.into_iter().min_by(|a, b| a.0.total_cmp(&b.0)).unwrap())
    }

    /// Candidate `(p, V)` pairs of a record, one per attaining path.
    fn candidates(&self, r: &MinimizerRecord) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::with_capacity(3);
        if r.branch != Branch::Boundary {
            let (ym, yp) = r.interior_y;
            out.push(((r.x - ym) / r.tau, self.tail_mass(ym)));
            out.push(((r.x - yp) / r.tau, self.tail_mass(yp)));
        }
        if r.branch != Branch::Interior {
            let t2 = r.tau2.unwrap_or(0.0);
            if t2 >= r.tau {
                return Err(DropletError::Consistency(format!(
                    "boundary branch at x={} exits at τ₂={t2} ≥ τ={}",
                    r.x, r.tau
                )));
            }
            let qb = self.q_boundary().map_or(0.0, |q| q.eval(t2));
            out.push((r.x / (r.tau - t2), -qb));
        }
        Ok(out)
    }

    /// One-sided `(p, V)` traces at the record point, ordered so that the
    /// left velocity is the larger one.
    pub fn traces(&self, r: &MinimizerRecord) -> Result<(Traces, Traces)> {
        let c = self.candidates(r)?;
        let left = c
            .iter()
            .copied()
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap();
        let right = c
            .iter()
            .copied()
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap();
        Ok((
            Traces {
                left: left.0,
                right: right.0,
            },
            Traces {
                left: left.1,
                right: right.1,
            },
        ))
    }
}

/// Velocity from a minimiser record: `(x - y)/τ` on the interior branch,
/// `x/(τ - τ₂)` on the boundary branch, both candidates on a tie.
pub fn velocity(record: &MinimizerRecord) -> Result<Traces> {
    let mut c = Vec::with_capacity(3);
    if record.branch != Branch::Boundary {
        c.push((record.x - record.interior_y.0) / record.tau);
        c.push((record.x - record.interior_y.1) / record.tau);
    }
    if record.branch != Branch::Interior {
        let t2 = record.tau2.unwrap_or(0.0);
        if t2 >= record.tau {
            return Err(DropletError::Consistency(format!(
                "boundary branch exits at τ₂={t2} ≥ τ={}",
                record.tau
            )));
        }
        c.push(record.x / (record.tau - t2));
    }
    let left = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let right = c.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(Traces { left, right })
}

/// `V = -∫_y^∞ q₀` on the interior branch, `-q_B(τ₂)` on the boundary
/// branch; the left value belongs to the path with the larger velocity.
pub fn cumulative_mass(
    record: &MinimizerRecord,
    q0: &Profile,
    q_boundary: Option<&Profile>,
) -> Result<Traces> {
    let mut c = Vec::with_capacity(3);
    if record.branch != Branch::Boundary {
        for y in [record.interior_y.0, record.interior_y.1] {
            c.push(((record.x - y) / record.tau, -q0.tail_integral(y)));
        }
    }
    if record.branch != Branch::Interior {
        let t2 = record.tau2.unwrap_or(0.0);
        if t2 >= record.tau {
            return Err(DropletError::Consistency("τ₂ ≥ τ on boundary branch".into()));
        }
        let qb = q_boundary.map_or(0.0, |q| q.eval(t2));
        c.push((record.x / (record.tau - t2), -qb));
    }
    let left = c.iter().max_by(|a, b| a.0.total_cmp(&b.0)).unwrap().1;
    let right = c.iter().min_by(|a, b| a.0.total_cmp(&b.0)).unwrap().1;
    Ok(Traces { left, right })
}
