//! Damping coefficient, warped clock and the conjugation between the damped
//! system and the undamped one.
//!
//! With `A(t) = exp(∫₀ᵗ α)` and `τ(t) = ∫₀ᵗ ds / A(s)`, a solution `(p, q)` of
//! the undamped system in `(x, τ)` maps to `u = p(x, τ(t)) / A(t)`,
//! `v = q(x, τ(t))`.

use serde::{Deserialize, Serialize};

use crate::error::{DropletError, Result};
use crate::field::FieldSlice;
use crate::profile::Profile;

pub const DEFAULT_WARP_RESOLUTION: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AlphaKind {
    Constant(f64),
    /// Linear interpolation between `(t, α)` samples.
    PiecewiseLinear(Vec<(f64, f64)>),
    /// Sample-and-hold: `α = α_k` on `[t_k, t_{k+1})`.
    Tabulated(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DampingSpec {
    pub kind: AlphaKind,
    pub horizon: f64,
}

impl DampingSpec {
    pub fn constant(alpha: f64, horizon: f64) -> Self {
        DampingSpec {
            kind: AlphaKind::Constant(alpha),
            horizon,
        }
    }

    pub fn none(horizon: f64) -> Self {
        Self::constant(0.0, horizon)
    }

    fn alpha_profile(&self) -> Result<Profile> {
        let check = |s: &[(f64, f64)]| -> Result<()> {
            if s.is_empty() {
                return Err(DropletError::invalid("alpha samples are empty"));
            }
            if s.iter().any(|(t, a)| !t.is_finite() || !a.is_finite()) {
                return Err(DropletError::invalid("alpha samples contain NaN or infinity"));
            }
            if s.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(DropletError::invalid("alpha sample times must increase strictly"));
            }
            Ok(())
        };
        match &self.kind {
            AlphaKind::Constant(a) => {
                if !a.is_finite() {
                    return Err(DropletError::invalid("alpha is not finite"));
                }
                Profile::constant(*a, 0.0, self.horizon.max(1.0))
            }
            AlphaKind::PiecewiseLinear(s) => {
                check(s)?;
                if s.len() == 1 {
                    return Profile::constant(s[0].1, s[0].0, s[0].0 + 1.0);
                }
                Profile::piecewise_linear(
                    s.iter().map(|p| p.0).collect(),
                    s.iter().map(|p| p.1).collect(),
                )
            }
            AlphaKind::Tabulated(s) => {
                check(s)?;
                let mut breaks: Vec<f64> = s.iter().map(|p| p.0).collect();
                let last = *breaks.last().unwrap();
                breaks.push(last.max(self.horizon).max(last) + 1.0);
                Profile::piecewise_constant(breaks, s.iter().map(|p| p.1).collect())
            }
        }
    }
}

/// Tabulated amplitude `A(t)` and clock `τ(t)` with inverse `t(τ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeWarp {
    spec: DampingSpec,
    alpha: Profile,
    times: Vec<f64>,
    log_amplitude: Vec<f64>,
    clock: Vec<f64>,
    tau_max: f64,
    alpha_l1: f64,
}

pub fn build_warp(spec: &DampingSpec, resolution: usize) -> Result<TimeWarp> {
    if resolution < 2 {
        return Err(DropletError::invalid("warp resolution must be at least 2"));
    }
    if !(spec.horizon > 0.0) || !spec.horizon.is_finite() {
        return Err(DropletError::invalid("horizon must be positive and finite"));
    }
    let alpha = spec.alpha_profile()?;
    let t_end = spec.horizon;

    let mut times: Vec<f64> = (0..resolution)
        .map(|i| t_end * i as f64 / (resolution - 1) as f64)
        .collect();
    times.extend(alpha.breaks().iter().copied().filter(|&b| b > 0.0 && b < t_end));
    times.sort_by(f64::total_cmp);
    times.dedup();

    let log_amplitude: Vec<f64> = times.iter().map(|&t| alpha.integral(0.0, t)).collect();
    let mut clock = Vec::with_capacity(times.len());
    match spec.kind {
        AlphaKind::Constant(a) => clock.extend(times.iter().map(|&t| constant_clock(a, t))),
        _ => {
            clock.push(0.0);
            for k in 1..times.len() {
                let h = times[k] - times[k - 1];
                let inc = 0.5 * h * ((-log_amplitude[k]).exp() + (-log_amplitude[k - 1]).exp());
                clock.push(clock[k - 1] + inc);
            }
        }
    }
    if log_amplitude.iter().chain(&clock).any(|v| !v.is_finite()) {
        return Err(DropletError::invalid("damping coefficient is not integrable on the horizon"));
    }
    if clock.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DropletError::Numeric {
            message: "warped clock is not strictly increasing at table resolution".into(),
            residual: 0.0,
        });
    }
    let tau_max = *clock.last().unwrap();
    let alpha_l1 = alpha.abs_integral(0.0, t_end);
    Ok(TimeWarp {
        spec: spec.clone(),
        alpha,
        times,
        log_amplitude,
        clock,
        tau_max,
        alpha_l1,
    })
}

fn constant_clock(a: f64, t: f64) -> f64 {
    if a == 0.0 {
        t
    } else {
        -(-a * t).exp_m1() / a
    }
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let k = xs.partition_point(|&v| v <= x) - 1;
    ys[k] + (ys[k + 1] - ys[k]) * (x - xs[k]) / (xs[k + 1] - xs[k])
}

impl TimeWarp {
    pub fn spec(&self) -> &DampingSpec {
        &self.spec
    }

    pub fn horizon(&self) -> f64 {
        self.spec.horizon
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    /// `‖α‖_{L¹[0,T]}`.
    pub fn alpha_l1(&self) -> f64 {
        self.alpha_l1
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.spec.kind, AlphaKind::Constant(a) if a == 0.0)
    }

    pub fn alpha(&self, t: f64) -> f64 {
        self.alpha.eval(t)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn clock_table(&self) -> &[f64] {
        &self.clock
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        self.log_amplitude_at(t).exp()
    }

    pub fn log_amplitude_at(&self, t: f64) -> f64 {
        match self.spec.kind {
            AlphaKind::Constant(a) => a * t,
            _ => self.alpha.integral(0.0, t),
        }
    }

    pub fn tau(&self, t: f64) -> f64 {
        match self.spec.kind {
            AlphaKind::Constant(a) => constant_clock(a, t),
            _ => interp(&self.times, &self.clock, t),
        }
    }

    /// Inverse clock.
    pub fn t_of_tau(&self, tau: f64) -> f64 {
        match self.spec.kind {
            AlphaKind::Constant(a) if a == 0.0 => tau,
            AlphaKind::Constant(a) => -(-a * tau).ln_1p() / a,
            _ => interp(&self.clock, &self.times, tau),
        }
    }

    /// Checked physical time to warped time.
    pub fn warp_time(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || t > self.horizon() * (1.0 + 1e-12) {
            return Err(DropletError::OutOfRange {
                what: "t",
                value: t,
                lo: 0.0,
                hi: self.horizon(),
            });
        }
        Ok(self.tau(t))
    }
}

/// Data of the undamped problem in warped time.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedData {
    pub p0: Profile,
    pub q0: Profile,
    pub p_boundary: Profile,
    pub q_boundary: Profile,
}

/// Transport initial and boundary data to the undamped problem:
/// `p₀ = u₀`, `q₀ = v₀`, `p_B(τ) = A(t(τ)) u_B(t(τ))`, `q_B(τ) = v_B(t(τ))`.
pub fn push_data(
    u0: &Profile,
    v0: &Profile,
    u_boundary: &Profile,
    v_boundary: &Profile,
    warp: &TimeWarp,
) -> Result<WarpedData> {
    let t_end = warp.horizon();
    for (name, table) in [("u_B", u_boundary), ("v_B", v_boundary)] {
        if table.start() > 0.0 || table.end() < t_end {
            return Err(DropletError::invalid(format!(
                "{name} table covers [{}, {}] but the horizon is [0, {t_end}]",
                table.start(),
                table.end()
            )));
        }
    }
    if warp.is_identity() {
        return Ok(WarpedData {
            p0: u0.clone(),
            q0: v0.clone(),
            p_boundary: u_boundary.clone(),
            q_boundary: v_boundary.clone(),
        });
    }
    let mut taus = Vec::with_capacity(warp.times.len());
    let mut p_vals = Vec::with_capacity(warp.times.len());
    let mut q_vals = Vec::with_capacity(warp.times.len());
    for (&t, &tau) in warp.times.iter().zip(&warp.clock) {
        taus.push(tau);
        p_vals.push(warp.amplitude(t) * u_boundary.eval(t));
        q_vals.push(v_boundary.eval(t));
    }
    Ok(WarpedData {
        p0: u0.clone(),
        q0: v0.clone(),
        p_boundary: Profile::piecewise_linear(taus.clone(), p_vals)?,
        q_boundary: Profile::piecewise_linear(taus, q_vals)?,
    })
}

/// Inverse of [`push_data`] on boundary tables: `u_B(t) = p_B(τ(t)) / A(t)`.
pub fn pull_boundary(warped: &WarpedData, warp: &TimeWarp, t: f64) -> (f64, f64) {
    let tau = warp.tau(t);
    (
        warped.p_boundary.eval(tau) / warp.amplitude(t),
        warped.q_boundary.eval(tau),
    )
}

/// Relabel one warped slice at physical time `t`: `u = p / A(t)`, `V` and the
/// atoms of `v` unchanged.
pub fn pull_back_slice(slice: &FieldSlice, t: f64, warp: &TimeWarp) -> FieldSlice {
    let inv = 1.0 / warp.amplitude(t);
    FieldSlice {
        time: t,
        velocity: slice.velocity.map_values(|p| p * inv),
        cumulative: slice.cumulative.clone(),
        measure: slice.measure.clone(),
    }
}

/// Pull back the slices whose warped time matches `τ(t)` for each requested
/// physical time.
pub fn pull_back_solution(
    slices: &[FieldSlice],
    times: &[f64],
    warp: &TimeWarp,
) -> Result<Vec<FieldSlice>> {
    times
        .iter()
        .map(|&t| {
            let tau = warp.warp_time(t)?;
            let slice = slices
                .iter()
                .find(|s| (s.time - tau).abs() <= 1e-12 * (1.0 + tau))
                .ok_or(DropletError::OutOfRange {
                    what: "tau",
                    value: tau,
                    lo: slices.first().map_or(0.0, |s| s.time),
                    hi: slices.last().map_or(0.0, |s| s.time),
                })?;
            Ok(pull_back_slice(slice, t, warp))
        })
        .collect()
}

/// Weak-form residual of the damped system for pulled-back fields; the sup
/// over test functions and interior slices.
pub fn conjugation_residual(
    slices: &[FieldSlice],
    warp: &TimeWarp,
    phis: &[crate::verify::TestFunction],
) -> Result<f64> {
    let report = crate::verify::interior_residual(slices, |t| warp.alpha(t), phis)?;
    Ok(report.sup())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_damping_is_identity() {
        let w = build_warp(&DampingSpec::none(2.0), 64).unwrap();
        for &t in w.times() {
            assert_eq!(w.amplitude(t), 1.0);
            assert_eq!(w.tau(t), t);
        }
        assert_eq!(w.tau_max(), 2.0);
    }

    #[test]
    fn unit_damping_matches_closed_form() {
        let w = build_warp(&DampingSpec::constant(1.0, 1.0), 512).unwrap();
        for &t in w.times() {
            assert!((w.amplitude(t) - t.exp()).abs() < 1e-8);
            assert!((w.tau(t) - (1.0 - (-t).exp())).abs() < 1e-8);
        }
        assert!((w.tau_max() - (1.0 - (-1f64).exp())).abs() < 1e-8);
    }

    #[test]
    fn negative_damping_matches_closed_form() {
        let w = build_warp(&DampingSpec::constant(-1.0, 1.5), 512).unwrap();
        for &t in w.times() {
            assert!((w.amplitude(t) - (-t).exp()).abs() < 1e-8);
            assert!((w.tau(t) - t.exp_m1()).abs() < 1e-8);
        }
    }

    #[test]
    fn tabulated_quadrature_matches_constant_closed_form() {
        // same α ≡ 1 through the generic trapezoid path
        let spec = DampingSpec {
            kind: AlphaKind::PiecewiseLinear(vec![(0.0, 1.0), (1.0, 1.0)]),
            horizon: 1.0,
        };
        let w = build_warp(&spec, 4096).unwrap();
        for &t in w.times().iter().step_by(97) {
            assert!((w.amplitude(t) - t.exp()).abs() < 1e-12);
            assert!((w.tau(t) - (1.0 - (-t).exp())).abs() < 1e-8);
        }
    }

    #[test]
    fn round_trip_on_table() {
        let spec = DampingSpec {
            kind: AlphaKind::PiecewiseLinear(vec![(0.0, 0.5), (0.7, -0.3), (2.0, 1.2)]),
            horizon: 2.0,
        };
        let w = build_warp(&spec, 1000).unwrap();
        for (&t, &tau) in w.times().iter().zip(w.clock_table()) {
            assert!((w.t_of_tau(tau) - t).abs() < 1e-10);
        }
        assert!(w.clock_table().windows(2).all(|p| p[1] > p[0]));
        // exact |α| area, split at the two sign changes
        assert!((w.alpha_l1() - 0.81175).abs() < 1e-12);
    }

    #[test]
    fn nonnegative_damping_shrinks_the_clock() {
        let spec = DampingSpec {
            kind: AlphaKind::Tabulated(vec![(0.0, 0.2), (0.5, 2.0)]),
            horizon: 1.0,
        };
        let w = build_warp(&spec, 256).unwrap();
        assert!(w.tau_max() <= 1.0);
        assert!(w.amplitude(0.0) == 1.0);
        assert!((w.alpha_l1() - (0.1 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn nan_alpha_is_rejected() {
        let spec = DampingSpec {
            kind: AlphaKind::PiecewiseLinear(vec![(0.0, f64::NAN), (1.0, 0.0)]),
            horizon: 1.0,
        };
        assert!(build_warp(&spec, 16).is_err());
        assert!(build_warp(&DampingSpec::none(1.0), 1).is_err());
    }

    #[test]
    fn push_under_unit_damping() {
        let w = build_warp(&DampingSpec::constant(1.0, 2.0), 2048).unwrap();
        let one = Profile::constant(1.0, 0.0, 2.0).unwrap();
        let c = Profile::constant(0.4, 0.0, 2.0).unwrap();
        let d = push_data(&one, &one, &one, &c, &w).unwrap();
        for k in 0..50 {
            let tau = w.tau_max() * k as f64 / 50.0;
            // oracle: A(t(τ)) = e^t with t = -ln(1 - τ)
            let exact = 1.0 / (1.0 - tau);
            assert!((d.p_boundary.eval(tau) - exact).abs() < 1e-5 * exact);
            assert!((d.q_boundary.eval(tau) - 0.4).abs() < 1e-15);
        }
    }

    #[test]
    fn push_then_pull_is_identity() {
        let spec = DampingSpec {
            kind: AlphaKind::PiecewiseLinear(vec![(0.0, 0.3), (1.0, -0.2)]),
            horizon: 1.0,
        };
        let w = build_warp(&spec, 4096).unwrap();
        let ub = Profile::piecewise_linear(vec![0.0, 0.5, 1.0], vec![1.0, -0.5, 0.25]).unwrap();
        let vb = Profile::piecewise_linear(vec![0.0, 1.0], vec![0.0, 2.0]).unwrap();
        let z = Profile::constant(0.0, 0.0, 1.0).unwrap();
        let d = push_data(&z, &z, &ub, &vb, &w).unwrap();
        for &t in w.times() {
            let (u, v) = pull_boundary(&d, &w, t);
            assert!((u - ub.eval(t)).abs() < 1e-8, "t={t}");
            assert!((v - vb.eval(t)).abs() < 1e-8);
        }
    }

    #[test]
    fn short_boundary_table_is_rejected() {
        let w = build_warp(&DampingSpec::none(2.0), 16).unwrap();
        let short = Profile::constant(1.0, 0.0, 1.0).unwrap();
        assert!(push_data(&short, &short, &short, &short, &w).is_err());
    }

    #[test]
    fn out_of_horizon_time_is_rejected() {
        let w = build_warp(&DampingSpec::none(1.0), 16).unwrap();
        assert!(matches!(w.warp_time(1.5), Err(DropletError::OutOfRange { .. })));
    }
}
