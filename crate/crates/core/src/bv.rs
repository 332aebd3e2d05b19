//! Discrete bounded-variation calculus on a one-dimensional grid.
//!
//! A [`SampledBV`] is a node-sampled function together with the cells in which
//! it jumps. Traces at a jump are the adjacent node values. Measures generated
//! by such functions ([`HalfLineMeasure`]) split into atoms at the jumps and an
//! absolutely continuous remainder carried cell by cell, so total masses
//! telescope exactly.

use serde::{Deserialize, Serialize};

use crate::error::{DropletError, Result};
use crate::quadrature::GaussLegendre;

/// Default jump-detection threshold, relative to the total variation.
pub const DEFAULT_JUMP_THRESHOLD: f64 = 0.1;

/// A cell increment is a jump only if it also dominates its smaller neighbour
/// increment by this factor.
const NEIGHBOUR_RATIO: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub location: f64,
    pub left: f64,
    pub right: f64,
    /// First and last grid cell covered by the jump.
    pub first_cell: usize,
    pub last_cell: usize,
}

impl Jump {
    pub fn magnitude(&self) -> f64 {
        (self.right - self.left).abs()
    }

    pub fn covers_cell(&self, i: usize) -> bool {
        i >= self.first_cell && i <= self.last_cell
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledBV {
    grid: Vec<f64>,
    values: Vec<f64>,
    jumps: Vec<Jump>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(DropletError::invalid("grid needs at least two nodes"));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(DropletError::invalid("grid contains non-finite coordinates"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DropletError::invalid("grid must be strictly increasing"));
    }
    Ok(())
}

impl SampledBV {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_grid(&grid)?;
        if values.len() != grid.len() {
            return Err(DropletError::invalid(format!(
                "{} values for {} grid nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DropletError::invalid("non-finite sample"));
        }
        Ok(SampledBV {
            grid,
            values,
            jumps: Vec::new(),
        })
    }

    pub fn from_fn(grid: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub fn uniform_grid(lo: f64, hi: f64, cells: usize) -> Vec<f64> {
        let h = (hi - lo) / cells as f64;
        (0..=cells).map(|i| lo + h * i as f64).collect()
    }

    /// Attach an explicit jump list. Traces must match the adjacent nodes of
    /// the covered cells.
    pub fn with_jumps(mut self, jumps: Vec<Jump>) -> Result<Self> {
        let n = self.grid.len();
        let mut last_end: Option<usize> = None;
        for j in &jumps {
            if j.first_cell > j.last_cell || j.last_cell + 1 >= n {
                return Err(DropletError::invalid("jump cell range out of grid"));
            }
            if let Some(e) = last_end {
                if j.first_cell <= e {
                    return Err(DropletError::invalid("jumps overlap or are unordered"));
                }
            }
            let (a, b) = (self.grid[j.first_cell], self.grid[j.last_cell + 1]);
            if !(j.location >= a && j.location <= b) {
                return Err(DropletError::invalid(format!(
                    "jump at {} lies outside its cells [{a}, {b}]",
                    j.location
                )));
            }
            if j.location <= self.grid[0] || j.location >= self.grid[n - 1] {
                return Err(DropletError::invalid("jump must lie strictly inside the grid"));
            }
            if j.left == j.right {
                return Err(DropletError::invalid("jump with equal traces"));
            }
            last_end = Some(j.last_cell);
        }
        self.jumps = jumps;
        Ok(self)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn jumps_mut(&mut self) -> &mut Vec<Jump> {
        &mut self.jumps
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    /// Jump covering cell `i`, if any.
    pub fn jump_in_cell(&self, i: usize) -> Option<&Jump> {
        self.jumps.iter().find(|j| j.covers_cell(i))
    }

    /// Piecewise-linear interpolation (jump cells read as steps at the jump).
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.grid.len();
        if x <= self.grid[0] {
            return self.values[0];
        }
        if x >= self.grid[n - 1] {
            return self.values[n - 1];
        }
        let i = self.grid.partition_point(|&g| g <= x) - 1;
        if let Some(j) = self.jump_in_cell(i) {
            return if x < j.location {
                self.values[j.first_cell]
            } else {
                self.values[j.last_cell + 1]
            };
        }
        let (a, b) = (self.grid[i], self.grid[i + 1]);
        self.values[i] + (self.values[i + 1] - self.values[i]) * (x - a) / (b - a)
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> SampledBV {
        SampledBV {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            jumps: self
                .jumps
                .iter()
                .map(|j| Jump {
                    left: f(j.left),
                    right: f(j.right),
                    ..*j
                })
                .collect(),
        }
    }
}

/// Populate the jump list of `f`.
///
/// A cell is flagged when its increment exceeds `threshold` times the total
/// variation and dominates the smaller of its neighbouring increments. Runs of
/// flagged cells with the same sign merge into one jump located at the middle
/// of the run; traces are the node values bounding the run.
pub fn detect_jumps(f: &SampledBV, threshold: f64) -> Result<SampledBV> {
    check_grid(&f.grid)?;
    if !(threshold > 0.0) {
        return Err(DropletError::invalid("jump threshold must be positive"));
    }
    let inc: Vec<f64> = f.values.windows(2).map(|w| w[1] - w[0]).collect();
    let tv: f64 = inc.iter().map(|d| d.abs()).sum();
    let mut out = SampledBV {
        grid: f.grid.clone(),
        values: f.values.clone(),
        jumps: Vec::new(),
    };
    if tv == 0.0 {
        return Ok(out);
    }
    let cells = inc.len();
    let flagged: Vec<bool> = (0..cells)
        .map(|i| {
            let d = inc[i].abs();
            if d <= threshold * tv {
                return false;
            }
            let left = (i > 0).then(|| inc[i - 1].abs());
            let right = (i + 1 < cells).then(|| inc[i + 1].abs());
            let nb = match (left, right) {
                (Some(a), Some(b)) => a.min(b),
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => 0.0,
            };
            d > NEIGHBOUR_RATIO * nb
        })
        .collect();

    let mut i = 0;
    while i < cells {
        if !flagged[i] {
            i += 1;
            continue;
        }
        let first = i;
        let sign = inc[i].signum();
        while i + 1 < cells && flagged[i + 1] && inc[i + 1].signum() == sign {
            i += 1;
        }
        let last = i;
        out.jumps.push(Jump {
            location: 0.5 * (f.grid[first] + f.grid[last + 1]),
            left: f.values[first],
            right: f.values[last + 1],
            first_cell: first,
            last_cell: last,
        });
        i += 1;
    }
    Ok(out)
}

/// `∫₀¹ g((1-a) left + a right) da`, by Gauss–Legendre quadrature starting at
/// 16 nodes and doubling until two successive orders agree.
pub fn averaged_superposition(g: impl Fn(f64) -> f64, left: f64, right: f64) -> Result<f64> {
    if left == right {
        return Ok(g(left));
    }
    let eval = |n: usize| {
        let rule = GaussLegendre::cached(n);
        let mut num = 0.0;
        let mut den = 0.0;
        for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
            let a = 0.5 * (z + 1.0);
            num += w * g((1.0 - a) * left + a * right);
            den += w;
        }
        num / den
    };
    let mut n = 16;
    let mut prev = eval(n);
    while n < 1024 {
        n *= 2;
        let next = eval(n);
        let residual = (next - prev).abs();
        if residual <= 1e-13 * (1.0 + next.abs()) {
            return Ok(next);
        }
        prev = next;
        if n >= 1024 {
            return Err(DropletError::Numeric {
                message: format!("averaged superposition on [{left}, {right}] did not converge"),
                residual,
            });
        }
    }
    unreachable!()
}

/// Rankine–Hugoniot speed for the Burgers flux.
pub fn shock_speed(p_left: f64, p_right: f64) -> f64 {
    0.5 * (p_left + p_right)
}

/// Mass carried by `V_τ + p V_x` at a jump moving with `speed`.
pub fn jump_point_measure(p_left: f64, p_right: f64, v_left: f64, v_right: f64, speed: f64) -> f64 {
    let dv = v_right - v_left;
    -speed * dv + shock_speed(p_left, p_right) * dv
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointKind {
    Continuity,
    Jump,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolpertWeight {
    pub point: f64,
    pub kind: PointKind,
    pub weight: f64,
}

/// Averaged superposition of `g(p)` at every continuity node and every jump.
pub fn volpert_weights(g: impl Fn(f64) -> f64, p: &SampledBV) -> Result<Vec<VolpertWeight>> {
    let mut out = Vec::with_capacity(p.len() + p.jumps.len());
    for (i, (&x, &v)) in p.grid.iter().zip(&p.values).enumerate() {
        let inside_jump = p
            .jumps
            .iter()
            .any(|j| i > j.first_cell && i <= j.last_cell);
        if !inside_jump {
            out.push(VolpertWeight {
                point: x,
                kind: PointKind::Continuity,
                weight: g(v),
            });
        }
    }
    for j in &p.jumps {
        out.push(VolpertWeight {
            point: j.location,
            kind: PointKind::Jump,
            weight: averaged_superposition(&g, j.left, j.right)?,
        });
    }
    out.sort_by(|a, b| a.point.total_cmp(&b.point));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// Signed measure on a grid: atoms plus an absolutely continuous part.
///
/// `density` holds node values of the continuous density (for output);
/// `cell_mass[i]` is the continuous mass on cell `i`, zero on cells absorbed
/// by an atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfLineMeasure {
    pub atoms: Vec<Atom>,
    pub density: SampledBV,
    pub cell_mass: Vec<f64>,
}

impl HalfLineMeasure {
    pub fn atom_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    pub fn continuous_mass(&self) -> f64 {
        self.cell_mass.iter().sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.atom_mass() + self.continuous_mass()
    }

    /// `∫ φ dμ`; the continuous part uses two-point Gauss per cell.
    pub fn integrate(&self, phi: impl Fn(f64) -> f64) -> f64 {
        let g = self.density.grid();
        let c = 0.5 / 3f64.sqrt();
        let cont: f64 = self
            .cell_mass
            .iter()
            .enumerate()
            .filter(|(_, m)| **m != 0.0)
            .map(|(i, m)| {
                let (a, b) = (g[i], g[i + 1]);
                let mid = 0.5 * (a + b);
                let h = b - a;
                m * 0.5 * (phi(mid - c * h) + phi(mid + c * h))
            })
            .sum();
        cont + self.atoms.iter().map(|a| a.mass * phi(a.location)).sum::<f64>()
    }

    /// The atom nearest to `x` within `tol`.
    pub fn atom_near(&self, x: f64, tol: f64) -> Option<&Atom> {
        self.atoms
            .iter()
            .filter(|a| (a.location - x).abs() <= tol)
            .min_by(|a, b| (a.location - x).abs().total_cmp(&(b.location - x).abs()))
    }
}

fn continuous_density(v: &SampledBV, cell_slope: &[Option<f64>]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let l = if i > 0 { cell_slope[i - 1] } else { None };
            let r = if i + 1 < n { cell_slope[i] } else { None };
            match (l, r) {
                (Some(_), Some(_)) => {
                    (v.values[i + 1] - v.values[i - 1]) / (v.grid[i + 1] - v.grid[i - 1])
                }
                (Some(s), None) | (None, Some(s)) => s,
                (None, None) => 0.0,
            }
        })
        .collect()
}

fn cell_slopes(v: &SampledBV) -> Vec<Option<f64>> {
    (0..v.len() - 1)
        .map(|i| {
            if v.jump_in_cell(i).is_some() {
                None
            } else {
                Some((v.values[i + 1] - v.values[i]) / (v.grid[i + 1] - v.grid[i]))
            }
        })
        .collect()
}

/// `∂ₓV` as a measure: one atom per jump of `V`, continuous part from the
/// remaining cells.
pub fn distributional_derivative(v: &SampledBV) -> HalfLineMeasure {
    let slopes = cell_slopes(v);
    let cell_mass = (0..v.len() - 1)
        .map(|i| match slopes[i] {
            Some(_) => v.values[i + 1] - v.values[i],
            None => 0.0,
        })
        .collect();
    let density = SampledBV {
        grid: v.grid.clone(),
        values: continuous_density(v, &slopes),
        jumps: Vec::new(),
    };
    HalfLineMeasure {
        atoms: v
            .jumps
            .iter()
            .map(|j| Atom {
                location: j.location,
                mass: j.right - j.left,
            })
            .collect(),
        density,
        cell_mass,
    }
}

/// Non-conservative product `g(p) Vₓ` as a measure.
///
/// Atoms sit at the jumps of `V` and carry the averaged superposition of `g`
/// over the traces of `p` bounding the same cells, times the jump of `V`.
pub fn volpert_product(
    g: impl Fn(f64) -> f64,
    p: &SampledBV,
    v: &SampledBV,
) -> Result<HalfLineMeasure> {
    if p.grid != v.grid {
        return Err(DropletError::invalid("volpert product needs a shared grid"));
    }
    let slopes = cell_slopes(v);
    let mut cell_mass = Vec::with_capacity(v.len() - 1);
    for i in 0..v.len() - 1 {
        cell_mass.push(match slopes[i] {
            Some(_) => {
                averaged_superposition(&g, p.values[i], p.values[i + 1])?
                    * (v.values[i + 1] - v.values[i])
            }
            None => 0.0,
        });
    }
    let base = continuous_density(v, &slopes);
    let density = SampledBV {
        grid: v.grid.clone(),
        values: base
            .iter()
            .zip(&p.values)
            .map(|(&d, &pv)| g(pv) * d)
            .collect(),
        jumps: Vec::new(),
    };
    let mut atoms = Vec::with_capacity(v.jumps.len());
    for j in &v.jumps {
        let pl = p.values[j.first_cell];
        let pr = p.values[j.last_cell + 1];
        atoms.push(Atom {
            location: j.location,
            mass: averaged_superposition(&g, pl, pr)? * (j.right - j.left),
        });
    }
    Ok(HalfLineMeasure {
        atoms,
        density,
        cell_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uniform(n: usize) -> Vec<f64> {
        SampledBV::uniform_grid(0.0, 1.0, n)
    }

    #[test]
    fn step_has_one_jump() {
        let f = SampledBV::from_fn(uniform(100), |x| if x < 0.5 { 1.0 } else { 0.0 }).unwrap();
        let d = detect_jumps(&f, DEFAULT_JUMP_THRESHOLD).unwrap();
        assert_eq!(d.jumps().len(), 1);
        let j = d.jumps()[0];
        assert!((j.location - 0.5).abs() <= 0.01);
        assert_eq!((j.left, j.right), (1.0, 0.0));
    }

    #[test]
    fn constant_has_no_jumps() {
        let f = SampledBV::from_fn(uniform(50), |_| 3.0).unwrap();
        assert!(detect_jumps(&f, 0.1).unwrap().jumps().is_empty());
    }

    #[test]
    fn ramp_has_no_jumps_and_unit_variation() {
        let f = SampledBV::from_fn(uniform(64), |x| x).unwrap();
        // brute force over increments: every increment is 1/64, well below 0.1 * TV
        let inc_max = f
            .values()
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max);
        assert!(inc_max < 0.1 * f.total_variation());
        assert!((f.total_variation() - 1.0).abs() < 1e-12);
        assert!(detect_jumps(&f, 0.1).unwrap().jumps().is_empty());
    }

    #[test]
    fn two_node_grid_reports_at_most_one_jump() {
        let f = SampledBV::new(vec![0.0, 1.0], vec![0.0, 2.0]).unwrap();
        assert_eq!(detect_jumps(&f, 0.1).unwrap().jumps().len(), 1);
    }

    #[test]
    fn non_monotone_grid_is_rejected() {
        assert!(SampledBV::new(vec![0.0, 0.5, 0.4], vec![0.0; 3]).is_err());
    }

    #[test]
    fn smeared_step_merges_into_one_jump() {
        let f = SampledBV::new(
            vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            vec![1.0, 1.0, 0.5, 0.0, 0.0, 0.0],
        )
        .unwrap();
        let d = detect_jumps(&f, 0.1).unwrap();
        assert_eq!(d.jumps().len(), 1);
        assert_eq!((d.jumps()[0].left, d.jumps()[0].right), (1.0, 0.0));
        assert!((d.jumps()[0].location - 0.2).abs() < 1e-12);
    }

    #[test]
    fn averaged_superposition_examples() {
        assert!((averaged_superposition(|s| s, 0.0, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(averaged_superposition(|s| s, 3.0, 3.0).unwrap(), 3.0);
        let v = averaged_superposition(|s| s * s, 0.0, 1.0).unwrap();
        // exact: ∫₀¹ a² da
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn volpert_atom_examples() {
        let grid = vec![0.0, 1.0, 2.0, 3.0];
        let p = SampledBV::new(grid.clone(), vec![2.0, 2.0, 0.0, 0.0]).unwrap();
        let v = SampledBV::new(grid.clone(), vec![0.0, 0.0, -1.0, -1.0]).unwrap();
        let (p, v) = (detect_jumps(&p, 0.1).unwrap(), detect_jumps(&v, 0.1).unwrap());
        let m = volpert_product(|s| s, &p, &v).unwrap();
        assert_eq!(m.atoms.len(), 1);
        assert!((m.atoms[0].mass + 1.0).abs() < 1e-15);

        let p = SampledBV::new(grid.clone(), vec![1.0, 1.0, -1.0, -1.0]).unwrap();
        let v = SampledBV::new(grid, vec![-2.0, -2.0, 0.0, 0.0]).unwrap();
        let (p, v) = (detect_jumps(&p, 0.1).unwrap(), detect_jumps(&v, 0.1).unwrap());
        let m = volpert_product(|s| s * s, &p, &v).unwrap();
        // quadrature oracle: ∫₀¹ (1 - 2a)² da = 1/3, times jump +2
        let oracle = {
            let n = 20_000;
            (0..n)
                .map(|k| {
                    let a = (k as f64 + 0.5) / n as f64;
                    (1.0 - 2.0 * a).powi(2)
                })
                .sum::<f64>()
                / n as f64
                * 2.0
        };
        assert!((m.atoms[0].mass - oracle).abs() < 1e-8);
        assert!((m.atoms[0].mass - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn volpert_with_constant_p_is_scaled_density() {
        let grid = uniform(40);
        let p = SampledBV::from_fn(grid.clone(), |_| 0.7).unwrap();
        let v = SampledBV::from_fn(grid, |x| x * x).unwrap();
        let m = volpert_product(|s| s, &p, &v).unwrap();
        let d = distributional_derivative(&v);
        assert!(m.atoms.is_empty());
        for (a, b) in m.density.values().iter().zip(d.density.values()) {
            assert!((a - 0.7 * b).abs() < 1e-14);
        }
    }

    #[test]
    fn heaviside_derivative_is_one_atom() {
        let f = SampledBV::from_fn(uniform(20), |x| if x < 0.3 { 0.0 } else { 2.5 }).unwrap();
        let d = distributional_derivative(&detect_jumps(&f, 0.1).unwrap());
        assert_eq!(d.atoms.len(), 1);
        assert_eq!(d.atoms[0].mass, 2.5);
        assert!(d.density.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ramp_derivative_is_unit_density() {
        let f = SampledBV::from_fn(uniform(20), |x| x).unwrap();
        let d = distributional_derivative(&detect_jumps(&f, 0.1).unwrap());
        assert!(d.atoms.is_empty());
        assert!(d.density.values().iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn ramp_plus_step_mass_telescopes() {
        let f = SampledBV::from_fn(uniform(50), |x| x + if x < 0.41 { 0.0 } else { 1.0 }).unwrap();
        let f = detect_jumps(&f, 0.1).unwrap();
        let d = distributional_derivative(&f);
        assert_eq!(d.atoms.len(), 1);
        // telescoping oracle
        let oracle: f64 = f.values().windows(2).map(|w| w[1] - w[0]).sum();
        assert!((d.total_mass() - oracle).abs() < 1e-12);
        assert!((d.total_mass() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn shock_speed_examples() {
        assert_eq!(shock_speed(1.0, -1.0), 0.0);
        assert_eq!(shock_speed(2.0, 0.0), 1.0);
        assert!((shock_speed(0.4, 0.2) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn volpert_weights_split_points() {
        let f = SampledBV::from_fn(uniform(10), |x| if x < 0.5 { 1.0 } else { 0.0 }).unwrap();
        let f = detect_jumps(&f, 0.1).unwrap();
        let w = volpert_weights(|s| s, &f).unwrap();
        let jumps: Vec<_> = w.iter().filter(|w| w.kind == PointKind::Jump).collect();
        assert_eq!(jumps.len(), 1);
        assert!((jumps[0].weight - 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn continuity_point_consistency(a in -10.0f64..10.0) {
            let g = |s: f64| s.sin() + s * s;
            prop_assert_eq!(averaged_superposition(g, a, a).unwrap(), g(a));
        }

        #[test]
        fn jump_weight_between_extremes(a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let g = |s: f64| s * s * s - s;
            let w = averaged_superposition(g, a, b).unwrap();
            let (lo, hi) = (a.min(b), a.max(b));
            let samples: Vec<f64> = (0..=1000).map(|k| g(lo + (hi - lo) * k as f64 / 1000.0)).collect();
            let mn = samples.iter().cloned().fold(f64::INFINITY, f64::min);
            let mx = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(w >= mn - 1e-9 && w <= mx + 1e-9);
        }

        #[test]
        fn moving_jump_at_shock_speed_has_no_measure(pl in -5.0f64..5.0, pr in -5.0f64..5.0,
                                                     vl in -5.0f64..5.0, vr in -5.0f64..5.0) {
            let s = shock_speed(pl, pr);
            prop_assert!(jump_point_measure(pl, pr, vl, vr, s).abs() <= 1e-12);
        }

        #[test]
        fn unit_volpert_matches_derivative(steps in proptest::collection::vec((0.05f64..0.95, -2.0f64..2.0), 1..5)) {
            let grid = uniform(80);
            let f = |x: f64| steps.iter().map(|&(s, h)| if x >= s { h } else { 0.0 }).sum::<f64>() + 0.3 * x;
            let v = detect_jumps(&SampledBV::from_fn(grid.clone(), f).unwrap(), 0.1).unwrap();
            let p = detect_jumps(&SampledBV::from_fn(grid, |x| 1.0 - x).unwrap(), 0.1).unwrap();
            let m = volpert_product(|_| 1.0, &p, &v).unwrap();
            prop_assert_eq!(m, distributional_derivative(&v));
        }
    }
}
