//! Vanishing-viscosity approximation through the Hopf–Cole transform.
//!
//! With `P = -2ε log S` and `V = C/S` the regularised undamped system becomes
//! two heat equations `S_τ = ε S_xx`, `C_τ = ε C_xx` on the half line.

use serde::{Deserialize, Serialize};

use crate::bv::SampledBV;
use crate::damping::{build_warp, push_data, DampingSpec, TimeWarp, WarpedData, DEFAULT_WARP_RESOLUTION};
use crate::error::{DropletError, Result};
use crate::field::FieldSlice;
use crate::profile::Profile;
use crate::quadrature::GaussLegendre;

/// Largest admissible `|P₀|/(2ε)` for the initial exponentials.
pub const EXPONENT_BUDGET: f64 = 600.0;

/// Default viscosity ladder.
pub const EPSILON_LADDER: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

/// Unit-mass bump `(35/32)(1 - r²)³/ε`, `r = s/ε`, supported in `[-ε, ε]`.
/// Being polynomial, its products with piecewise-linear data are integrated
/// exactly by the Gauss rule below, so the cut-off convolution never exceeds
/// the sup norm of its input.
pub fn mollifier(s: f64, eps: f64) -> f64 {
    let r = s / eps;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let q = 1.0 - r * r;
    35.0 / 32.0 * q * q * q / eps
}

/// `((f χ_{[2ε,∞)}) * η_ε)(x)`.
pub fn mollify_at(f: &Profile, eps: f64, x: f64) -> f64 {
    // s ranges over [-ε, ε] with x - s ≥ 2ε
    let hi = eps.min(x - 2.0 * eps);
    let lo = -eps;
    if hi <= lo {
        return 0.0;
    }
    let mut cuts = vec![lo, hi];
    for &b in f.breaks() {
        let s = x - b;
        if s > lo && s < hi {
            cuts.push(s);
        }
    }
    cuts.sort_by(f64::total_cmp);
    let gl = GaussLegendre::cached(8);
    cuts.windows(2)
        .map(|c| gl.integrate(c[0], c[1], |s| f.eval(x - s) * mollifier(s, eps)))
        .sum()
}

/// Cut off near 0, mollify, and sample on a uniform grid of spacing at most
/// `eps/8` covering `[0, max(f.end(), cover)] + 2ε`.
pub fn mollify_profile(f: &Profile, eps: f64, cover: f64) -> Result<Profile> {
    if !(eps > 0.0) {
        return Err(DropletError::InvalidParameter("ε must be positive".into()));
    }
    let end = f.end().max(cover) + 2.0 * eps;
    let cells = ((end / (eps / 8.0)).ceil() as usize).max(16);
    let nodes = SampledBV::uniform_grid(0.0, end, cells);
    let values = nodes.iter().map(|&x| mollify_at(f, eps, x)).collect();
    Profile::piecewise_linear(nodes, values)
}

/// The four data functions after cut-off and mollification.
#[derive(Debug, Clone, PartialEq)]
pub struct MollifiedData {
    pub u0: Profile,
    pub v0: Profile,
    pub u_boundary: Profile,
    pub v_boundary: Profile,
}

/// Mollify the space data on their own extent and the boundary data over
/// `[0, horizon]`.
pub fn mollify_data(
    u0: &Profile,
    v0: &Profile,
    u_boundary: &Profile,
    v_boundary: &Profile,
    eps: f64,
    horizon: f64,
) -> Result<MollifiedData> {
    let v0m = mollify_profile(v0, eps, 0.0)?;
    // the tail of v₀ must stay zero so that its tail integral is finite
    let v0m = if v0.last_value() == 0.0 {
        let b = v0m.breaks().to_vec();
        let mut vals = v0m.sample(&b);
        *vals.last_mut().unwrap() = 0.0;
        Profile::piecewise_linear(b, vals)?
    } else {
        v0m
    };
    Ok(MollifiedData {
        u0: mollify_profile(u0, eps, 0.0)?,
        v0: v0m,
        u_boundary: mollify_profile(u_boundary, eps, horizon)?,
        v_boundary: mollify_profile(v_boundary, eps, horizon)?,
    })
}

/// Which condition closes the `C` equation at `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryMode {
    /// Prescribed mass `∫₀^∞ v = v_B`.
    Mass,
    /// Prescribed value `v(0) = v_B`.
    Dirichlet,
}

/// Heat-equation state on a uniform grid over `[0, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatField {
    pub grid: Vec<f64>,
    pub s: Vec<f64>,
    pub c: Vec<f64>,
    pub tau: f64,
    pub epsilon: f64,
}

impl HeatField {
    fn spacing(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }
}

/// `S = exp(-P₀/(2ε))`, `C = -(∫ₓ^∞ q₀) S` at the grid nodes.
pub fn initial_heat_data(p0: &Profile, q0: &Profile, eps: f64, grid: Vec<f64>) -> Result<HeatField> {
    if !(eps > 0.0) {
        return Err(DropletError::InvalidParameter("ε must be positive".into()));
    }
    let potentials: Vec<f64> = grid.iter().map(|&x| p0.integral(0.0, x)).collect();
    let worst = potentials.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    if worst / (2.0 * eps) > EXPONENT_BUDGET {
        return Err(DropletError::InvalidParameter(format!(
            "|P₀|/(2ε) = {:.1} exceeds {EXPONENT_BUDGET}; ε must be at least {:.3e}",
            worst / (2.0 * eps),
            worst / (2.0 * EXPONENT_BUDGET)
        )));
    }
    let s: Vec<f64> = potentials.iter().map(|p| (-p / (2.0 * eps)).exp()).collect();
    let c = grid
        .iter()
        .zip(&s)
        .map(|(&x, &sv)| -q0.tail_integral(x) * sv)
        .collect();
    Ok(HeatField {
        grid,
        s,
        c,
        tau: 0.0,
        epsilon: eps,
    })
}

/// Thomas algorithm for `a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i`.
fn solve_tridiagonal(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut m = b[0];
    if m == 0.0 {
        return Err(DropletError::Numeric {
            message: "zero pivot in tridiagonal solve".into(),
            residual: 0.0,
        });
    }
    cp[0] = c[0] / m;
    dp[0] = d[0] / m;
    for i in 1..n {
        m = b[i] - a[i] * cp[i - 1];
        if m == 0.0 || !m.is_finite() {
            return Err(DropletError::Numeric {
                message: format!("zero pivot in tridiagonal solve at row {i}"),
                residual: 0.0,
            });
        }
        cp[i] = c[i] / m;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / m;
    }
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    Ok(x)
}

/// Interior and far-end rows of the θ-scheme for `w_τ = ε w_xx` with a
/// reflecting far end. Row 0 is left for the caller.
fn theta_system(w: &[f64], r: f64, theta: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = w.len();
    let (mut a, mut b, mut c, mut d) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let ri = r * theta;
    let re = r * (1.0 - theta);
    for i in 1..n - 1 {
        a[i] = -ri;
        b[i] = 1.0 + 2.0 * ri;
        c[i] = -ri;
        d[i] = (1.0 - 2.0 * re) * w[i] + re * (w[i - 1] + w[i + 1]);
    }
    let l = n - 1;
    a[l] = -2.0 * ri;
    b[l] = 1.0 + 2.0 * ri;
    d[l] = (1.0 - 2.0 * re) * w[l] + 2.0 * re * w[l - 1];
    (a, b, c, d)
}

/// One implicit step of both heat equations from `τ` to `τ + dt`.
///
/// `theta = 1` is backward Euler, `0.5` Crank–Nicolson. At `x = 0` the
/// conditions `2ε S_x + p_B S = 0` and either `C = -q_B S` (mass mode) or
/// `V_x = q_B` (Dirichlet mode, equivalent to `2ε C_x + p_B C = 2ε q_B S`) are
/// imposed in exponentially fitted form, `S₁ = S₀ e^{-p_B h/(2ε)}` and
/// `C₁/S₁ - C₀/S₀ = h q_B`, which is exact for the boundary-layer profile.
/// After the step both fields are rescaled by `max S`, which leaves `u` and
/// `V` unchanged.
pub fn heat_step(
    field: &HeatField,
    p_boundary: &Profile,
    q_boundary: &Profile,
    dt: f64,
    theta: f64,
    mode: BoundaryMode,
) -> Result<HeatField> {
    if !(dt > 0.0) {
        return Err(DropletError::invalid("time step must be positive"));
    }
    let eps = field.epsilon;
    let h = field.spacing();
    let r = eps * dt / (h * h);
    let tau = field.tau + dt;
    let pb = p_boundary.eval(tau);
    let qb = q_boundary.eval(tau);

    let (a, mut b, mut c, mut d) = theta_system(&field.s, r, theta);
    b[0] = (-pb * h / (2.0 * eps)).exp();
    c[0] = -1.0;
    d[0] = 0.0;
    let s = solve_tridiagonal(&a, &b, &c, &d)?;
    if let Some((i, v)) = s.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
        return Err(DropletError::Breakdown(format!(
            "S = {v:e} at node {i} (τ = {tau}); ε = {eps} is too small for h = {h}"
        )));
    }

    let (a, mut b, mut c, mut d) = theta_system(&field.c, r, theta);
    match mode {
        BoundaryMode::Mass => {
            b[0] = 1.0;
            c[0] = 0.0;
            d[0] = -qb * s[0];
        }
        BoundaryMode::Dirichlet => {
            b[0] = -1.0 / s[0];
            c[0] = 1.0 / s[1];
            d[0] = h * qb;
        }
    }
    let cv = solve_tridiagonal(&a, &b, &c, &d)?;

    let scale = s.iter().cloned().fold(0.0, f64::max);
    let s_min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if s_min / scale < 1e-290 {
        return Err(DropletError::Breakdown(format!(
            "dynamic range of S exceeded at τ = {tau}"
        )));
    }
    Ok(HeatField {
        grid: field.grid.clone(),
        s: s.iter().map(|v| v / scale).collect(),
        c: cv.iter().map(|v| v / scale).collect(),
        tau,
        epsilon: eps,
    })
}

/// One recovered slice on physical time.
#[derive(Debug, Clone, PartialEq)]
pub struct ViscousSlice {
    pub field: FieldSlice,
    /// Node values of `v = V_x`.
    pub density: Vec<f64>,
}

/// `u = -2ε (log S)_x / A`, `V = C/S`, `v = V_x`. Interior nodes use centred
/// differences of `log S`, which are exact for exponential profiles; the end
/// nodes use one-sided differences.
pub fn hopf_cole_recover(field: &HeatField, amplitude: f64, time: f64) -> Result<ViscousSlice> {
    if let Some(i) = field.s.iter().position(|v| !(*v > 0.0)) {
        return Err(DropletError::Breakdown(format!("S ≤ 0 at node {i}")));
    }
    let n = field.grid.len();
    let h = field.spacing();
    let eps = field.epsilon;
    let logs: Vec<f64> = field.s.iter().map(|v| v.ln()).collect();
    let scale = -2.0 * eps / amplitude;
    let mut u = vec![0.0; n];
    for i in 1..n - 1 {
        u[i] = scale * (logs[i + 1] - logs[i - 1]) / (2.0 * h);
    }
    u[0] = scale * (logs[1] - logs[0]) / h;
    u[n - 1] = scale * (logs[n - 1] - logs[n - 2]) / h;
    let vv: Vec<f64> = field.c.iter().zip(&field.s).map(|(c, s)| c / s).collect();
    let mut density = vec![0.0; n];
    for i in 1..n - 1 {
        density[i] = (vv[i + 1] - vv[i - 1]) / (2.0 * h);
    }
    density[0] = (vv[1] - vv[0]) / h;
    density[n - 1] = (vv[n - 1] - vv[n - 2]) / h;
    let velocity = SampledBV::new(field.grid.clone(), u)?;
    let cumulative = SampledBV::new(field.grid.clone(), vv)?;
    Ok(ViscousSlice {
        field: FieldSlice::assemble(time, velocity, cumulative),
        density,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsEntry {
    pub t: f64,
    pub tau: f64,
    pub u_sup: f64,
    pub u_bound: f64,
    pub cumulative_sup: f64,
    pub cumulative_bound: f64,
}

impl BoundsEntry {
    pub fn holds(&self) -> bool {
        self.u_sup <= self.u_bound && self.cumulative_sup <= self.cumulative_bound
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViscousOptions {
    /// Grid spacing as a fraction of ε.
    pub h_over_eps: f64,
    /// Time step as a multiple of the grid spacing.
    pub dt_over_h: f64,
    /// Backward Euler steps before switching to Crank–Nicolson.
    pub startup_steps: usize,
    /// Spatial extent of the heat grid; `None` picks data support plus six
    /// diffusion lengths.
    pub length: Option<f64>,
    pub warp_resolution: usize,
}

impl Default for ViscousOptions {
    fn default() -> Self {
        ViscousOptions {
            h_over_eps: 0.25,
            dt_over_h: 1.0,
            startup_steps: 2,
            length: None,
            warp_resolution: DEFAULT_WARP_RESOLUTION,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViscousSolution {
    pub epsilon: f64,
    pub slices: Vec<ViscousSlice>,
    pub bounds_log: Vec<BoundsEntry>,
    pub mollified: MollifiedData,
    pub warp: TimeWarp,
}

impl ViscousSolution {
    pub fn bound_violations(&self) -> usize {
        self.bounds_log.iter().filter(|b| !b.holds()).count()
    }

    pub fn field_slices(&self) -> Vec<FieldSlice> {
        self.slices.iter().map(|s| s.field.clone()).collect()
    }
}

fn sup_of(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Solve the regularised problem and return slices at the requested
/// physical times (which must lie in `(0, horizon]`, increasing; `0` is
/// allowed and yields the mollified initial state).
///
/// The bounds `‖u‖ ≤ e^{‖α‖₁}(‖u₀‖_∞ + ‖u_B‖_∞)` and
/// `‖V‖ ≤ ‖v₀‖₁ + ‖v_B‖_∞` are checked after every step and logged.
#[allow(clippy::too_many_arguments)]
pub fn run_viscous(
    u0: &Profile,
    v0: &Profile,
    u_boundary: &Profile,
    v_boundary: &Profile,
    spec: &DampingSpec,
    eps: f64,
    times: &[f64],
    mode: BoundaryMode,
    opts: &ViscousOptions,
) -> Result<ViscousSolution> {
    if !(eps > 0.0) {
        return Err(DropletError::InvalidParameter("ε must be positive".into()));
    }
    if times.iter().any(|t| !(*t >= 0.0) || *t > spec.horizon)
        || times.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(DropletError::invalid(
            "output times must increase within [0, horizon]",
        ));
    }
    let warp = build_warp(spec, opts.warp_resolution)?;
    let mollified = mollify_data(u0, v0, u_boundary, v_boundary, eps, spec.horizon)?;
    let WarpedData {
        p0,
        q0,
        p_boundary,
        q_boundary,
    } = push_data(
        &mollified.u0,
        &mollified.v0,
        &mollified.u_boundary,
        &mollified.v_boundary,
        &warp,
    )?;

    let h = opts.h_over_eps * eps;
    let tau_top = warp.tau_max();
    let support = p0.end().max(q0.end());
    let length = opts
        .length
        .unwrap_or(support + 1.0 + 6.0 * (eps * tau_top).sqrt() + tau_top * (p0.sup_norm() + p_boundary.sup_norm()));
    let cells = (length / h).ceil() as usize;
    let grid = SampledBV::uniform_grid(0.0, cells as f64 * h, cells);
    let mut field = initial_heat_data(&p0, &q0, eps, grid)?;

    let u_bound = warp.alpha_l1().exp() * (u0.sup_norm() + u_boundary.sup_norm());
    let cumulative_bound = v0.l1_norm() + v_boundary.sup_norm();
    let bound_slack = 1e-12;
    let mut bounds_log = Vec::new();
    let mut slices = Vec::with_capacity(times.len());
    let dt_nominal = opts.dt_over_h * h;
    let mut steps = 0usize;
    for &t in times {
        let target = warp.warp_time(t)?;
        while field.tau < target {
            let remaining = target - field.tau;
            let dt = if remaining <= dt_nominal * (1.0 + 1e-9) {
                remaining
            } else {
                dt_nominal
            };
            let theta = if steps < opts.startup_steps { 1.0 } else { 0.5 };
            field = heat_step(&field, &p_boundary, &q_boundary, dt, theta, mode)?;
            if (field.tau - target).abs() <= 1e-12 * (1.0 + target) {
                field.tau = target;
            }
            steps += 1;
            let t_now = warp.t_of_tau(field.tau);
            let slice = hopf_cole_recover(&field, warp.amplitude(t_now), t_now)?;
            bounds_log.push(BoundsEntry {
                t: t_now,
                tau: field.tau,
                u_sup: sup_of(slice.field.velocity.values()),
                u_bound: u_bound * (1.0 + bound_slack) + bound_slack,
                cumulative_sup: sup_of(slice.field.cumulative.values()),
                cumulative_bound: cumulative_bound * (1.0 + bound_slack) + bound_slack,
            });
        }
        slices.push(hopf_cole_recover(&field, warp.amplitude(t), t)?);
    }
    Ok(ViscousSolution {
        epsilon: eps,
        slices,
        bounds_log,
        mollified,
        warp,
    })
}
