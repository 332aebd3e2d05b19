//! Path actions: straight interior paths, three-piece boundary paths, and the
//! minimal boundary action over contact times.

use crate::error::{DropletError, Result};
use crate::profile::Profile;

/// Boundary velocity `p_B(τ)` together with `K(τ) = ∫₀^τ (p_B⁺)²/2`, which is
/// integrated exactly piece by piece.
#[derive(Debug, Clone)]
pub struct BoundaryAction {
    p_boundary: Profile,
    prefix: Vec<f64>,
}

/// `∫ (f⁺)²/2` over one linear piece of length `h`.
fn positive_square_half(h: f64, f0: f64, f1: f64) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    let full = |h: f64, a: f64, b: f64| h * (a * a + a * b + b * b) / 6.0;
    match (f0 > 0.0, f1 > 0.0) {
        (true, true) => full(h, f0, f1),
        (false, false) => 0.0,
        (true, false) => {
            let z = h * f0 / (f0 - f1);
            full(z, f0, 0.0)
        }
        (false, true) => {
            let z = h * f1 / (f1 - f0);
            full(z, 0.0, f1)
        }
    }
}

impl BoundaryAction {
    pub fn new(p_boundary: Profile) -> Self {
        let mut prefix = vec![0.0];
        for (a, b, fa, fb) in p_boundary.pieces() {
            let last = *prefix.last().unwrap();
            prefix.push(last + positive_square_half(b - a, fa, fb));
        }
        BoundaryAction { p_boundary, prefix }
    }

    pub fn p_boundary(&self) -> &Profile {
        &self.p_boundary
    }

    /// Primitive from the first breakpoint.
    fn primitive(&self, s: f64) -> f64 {
        let p = &self.p_boundary;
        if s <= p.start() {
            let c = p.first_value().max(0.0);
            return 0.5 * c * c * (s - p.start());
        }
        if s >= p.end() {
            let c = p.last_value().max(0.0);
            return self.prefix.last().unwrap() + 0.5 * c * c * (s - p.end());
        }
        let breaks = p.breaks();
        let k = breaks.partition_point(|&b| b <= s) - 1;
        let a = breaks[k];
        positive_square_half(s - a, p.eval(a), p.eval(s)) + self.prefix[k]
    }

    /// `K(τ)`; non-decreasing with `K(0) = 0`.
    pub fn cumulative(&self, tau: f64) -> f64 {
        self.primitive(tau) - self.primitive(0.0)
    }
}

/// Action of the straight path from `(y, 0)` to `(x, τ)`.
pub fn interior_action(x: f64, y: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(DropletError::invalid(format!("interior action needs τ > 0, got {tau}")));
    }
    Ok((x - y) * (x - y) / (2.0 * tau))
}

/// `y²/(2τ₁)` with the corner convention at `τ₁ = 0`.
pub(crate) fn entry_term(y: f64, tau1: f64) -> f64 {
    if tau1 > 0.0 {
        y * y / (2.0 * tau1)
    } else if y == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// `x²/(2(τ-τ₂))` with the corner convention at `τ₂ = τ`.
pub(crate) fn exit_term(x: f64, tau: f64, tau2: f64) -> f64 {
    let gap = tau - tau2;
    if gap > 0.0 {
        x * x / (2.0 * gap)
    } else if x == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Action of the three-piece path `(y,0) → (0,τ₁) → (0,τ₂) → (x,τ)`.
pub fn boundary_path_action(
    x: f64,
    y: f64,
    tau: f64,
    tau1: f64,
    tau2: f64,
    action: &BoundaryAction,
) -> Result<f64> {
    if !(tau1 >= 0.0 && tau1 <= tau2 && tau2 <= tau) {
        return Err(DropletError::invalid(format!(
            "contact times must satisfy 0 ≤ τ₁ ≤ τ₂ ≤ τ, got τ₁={tau1}, τ₂={tau2}, τ={tau}"
        )));
    }
    Ok(action.cumulative(tau1) - action.cumulative(tau2)
        + entry_term(y, tau1)
        + exit_term(x, tau, tau2))
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimisation of `f` on `[a, b]`; returns `(argmin, min)`
/// including the bracket ends as candidates.
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, a: f64, b: f64, iters: usize) -> (f64, f64) {
    let fa = f(a);
    let fb = f(b);
    let mut best = if fb <= fa { (b, fb) } else { (a, fa) };
    if b <= a {
        return best;
    }
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
        if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
            break;
        }
    }
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

/// Number of coarse nodes per contact-time axis.
pub const COARSE_CONTACT_NODES: usize = 64;
/// Alternating refinement rounds after the coarse scan.
pub const REFINEMENT_ROUNDS: usize = 3;

/// Minimal three-piece action over `0 ≤ τ₁ ≤ τ₂ ≤ τ` for fixed endpoints.
///
/// Coarse scan over the simplex grid (prefix minimum over `τ₁`), ties toward
/// the largest `τ₂`, then alternating golden-section refinement of `τ₂` and
/// `τ₁` in the neighbouring coarse cells. Returns `(value, τ₁, τ₂)`; the value
/// is `+∞` when `τ ≤ 0`.
pub fn min_boundary_action(x: f64, y: f64, tau: f64, action: &BoundaryAction) -> (f64, f64, f64) {
    if !(tau > 0.0) {
        return (f64::INFINITY, 0.0, 0.0);
    }
    let n = COARSE_CONTACT_NODES;
    let nodes: Vec<f64> = (0..=n).map(|k| tau * k as f64 / n as f64).collect();
    let entry = |s: f64| action.cumulative(s) + entry_term(y, s);
    let exit = |s: f64| -action.cumulative(s) + exit_term(x, tau, s);

    let mut prefix_val = f64::INFINITY;
    let mut prefix_arg = 0usize;
    let mut best = (f64::INFINITY, 0usize, 0usize);
    for (k, &s) in nodes.iter().enumerate() {
        let e = entry(s);
        if e < prefix_val {
            prefix_val = e;
            prefix_arg = k;
        }
        let total = prefix_val + exit(s);
        if total <= best.0 {
            best = (total, prefix_arg, k);
        }
    }
    if !best.0.is_finite() {
        return (f64::INFINITY, 0.0, tau);
    }
    let (mut t1, mut t2) = (nodes[best.1], nodes[best.2]);
    let cell = tau / n as f64;
    for _ in 0..REFINEMENT_ROUNDS {
        let lo = (t2 - cell).max(t1);
        let hi = (t2 + cell).min(tau);
        let (a2, _) = golden_min(exit, lo, hi, 80);
        if entry(t1) + exit(a2) <= entry(t1) + exit(t2) {
            t2 = a2;
        }
        let lo = (t1 - cell).max(0.0);
        let hi = (t1 + cell).min(t2);
        let (a1, _) = golden_min(entry, lo, hi, 80);
        if entry(a1) <= entry(t1) {
            t1 = a1;
        }
        if t2 - t1 <= cell {
            // constraint τ₁ ≤ τ₂ active: move both along the diagonal
            let lo = (t1 - cell).max(0.0);
            let hi = (t2 + cell).min(tau);
            let (s, v) = golden_min(|s| entry(s) + exit(s), lo, hi, 80);
            if v <= entry(t1) + exit(t2) {
                t1 = s;
                t2 = s;
            }
        }
    }
    (entry(t1) + exit(t2), t1, t2)
}
