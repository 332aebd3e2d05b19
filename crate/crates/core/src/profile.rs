//! Piecewise-linear data profiles with possible jumps at breakpoints.
//!
//! Initial and boundary data enter every solver through this type: a finite
//! list of linear pieces, extended outside its breakpoints by the end values.
//! All integrals are exact.

use serde::{Deserialize, Serialize};

use crate::bv::SampledBV;
use crate::error::{DropletError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    breaks: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
    prefix: Vec<f64>,
}

impl Profile {
    fn build(breaks: Vec<f64>, left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        if breaks.len() < 2 || left.len() != breaks.len() - 1 || right.len() != left.len() {
            return Err(DropletError::invalid(
                "profile needs n+1 breakpoints for n pieces",
            ));
        }
        if breaks.iter().chain(&left).chain(&right).any(|v| !v.is_finite()) {
            return Err(DropletError::invalid("profile contains non-finite values"));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DropletError::invalid("profile breakpoints must be strictly increasing"));
        }
        let mut prefix = Vec::with_capacity(breaks.len());
        prefix.push(0.0);
        for k in 0..left.len() {
            let h = breaks[k + 1] - breaks[k];
            prefix.push(prefix[k] + 0.5 * h * (left[k] + right[k]));
        }
        Ok(Profile {
            breaks,
            left,
            right,
            prefix,
        })
    }

    /// `values[k]` holds on `[breaks[k], breaks[k+1])`.
    pub fn piecewise_constant(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::build(breaks, values.clone(), values)
    }

    /// Continuous linear interpolation through `(nodes[i], values[i])`.
    pub fn piecewise_linear(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() || nodes.len() < 2 {
            return Err(DropletError::invalid(
                "piecewise-linear profile needs matching nodes/values, at least two",
            ));
        }
        let left = values[..values.len() - 1].to_vec();
        let right = values[1..].to_vec();
        Self::build(nodes, left, right)
    }

    pub fn constant(value: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::piecewise_constant(vec![lo, hi], vec![value])
    }

    /// Linear between nodes; a jump cell of `f` becomes a step at the jump
    /// location with the recorded traces.
    pub fn from_sampled(f: &SampledBV) -> Result<Self> {
        let grid = f.grid();
        let vals = f.values();
        let mut breaks = vec![grid[0]];
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut i = 0;
        while i + 1 < grid.len() {
            match f.jump_in_cell(i) {
                Some(j) => {
                    let (a, b) = (grid[j.first_cell], grid[j.last_cell + 1]);
                    if j.location > a {
                        breaks.push(j.location);
                        left.push(j.left);
                        right.push(j.left);
                    }
                    if j.location < b {
                        breaks.push(b);
                        left.push(j.right);
                        right.push(j.right);
                    }
                    i = j.last_cell + 1;
                }
                None => {
                    breaks.push(grid[i + 1]);
                    left.push(vals[i]);
                    right.push(vals[i + 1]);
                    i += 1;
                }
            }
        }
        Self::build(breaks, left, right)
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        (0..self.left.len()).map(move |k| {
            (
                self.breaks[k],
                self.breaks[k + 1],
                self.left[k],
                self.right[k],
            )
        })
    }

    pub fn start(&self) -> f64 {
        self.breaks[0]
    }

    pub fn end(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn first_value(&self) -> f64 {
        self.left[0]
    }

    pub fn last_value(&self) -> f64 {
        *self.right.last().unwrap()
    }

    fn piece_index(&self, x: f64) -> Option<usize> {
        if x < self.start() || x >= self.end() {
            return None;
        }
        let k = self.breaks.partition_point(|&b| b <= x);
        Some(k - 1)
    }

    /// Right-continuous evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        match self.piece_index(x) {
            Some(k) => {
                let (a, b) = (self.breaks[k], self.breaks[k + 1]);
                self.left[k] + (self.right[k] - self.left[k]) * (x - a) / (b - a)
            }
            None if x < self.start() => self.first_value(),
            None => self.last_value(),
        }
    }

    /// Left limit at `x`.
    pub fn eval_left(&self, x: f64) -> f64 {
        if x <= self.start() {
            return self.first_value();
        }
        if x > self.end() {
            return self.last_value();
        }
        let k = self.breaks.partition_point(|&b| b < x) - 1;
        let (a, b) = (self.breaks[k], self.breaks[k + 1]);
        self.left[k] + (self.right[k] - self.left[k]) * (x - a) / (b - a)
    }

    /// `∫_{start}^{x} f`, with constant extension outside the breakpoints.
    fn primitive(&self, x: f64) -> f64 {
        if x <= self.start() {
            return self.first_value() * (x - self.start());
        }
        if x >= self.end() {
            return self.prefix.last().unwrap() + self.last_value() * (x - self.end());
        }
        let k = self.piece_index(x).unwrap();
        let a = self.breaks[k];
        let fx = self.eval(x);
        self.prefix[k] + 0.5 * (x - a) * (self.left[k] + fx)
    }

    /// Exact `∫_a^b f`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.primitive(b) - self.primitive(a)
    }

    /// `∫_y^∞ f`; requires the profile to vanish beyond its last breakpoint.
    pub fn tail_integral(&self, y: f64) -> f64 {
        self.integral(y, self.end().max(y))
    }

    pub fn sup_norm(&self) -> f64 {
        self.left
            .iter()
            .chain(&self.right)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Exact `∫|f|` over the breakpoints (extensions excluded).
    pub fn l1_norm(&self) -> f64 {
        self.pieces()
            .map(|(a, b, va, vb)| {
                let h = b - a;
                if va * vb >= 0.0 {
                    0.5 * h * (va.abs() + vb.abs())
                } else {
                    let z = h * va.abs() / (va.abs() + vb.abs());
                    0.5 * z * va.abs() + 0.5 * (h - z) * vb.abs()
                }
            })
            .sum()
    }

    /// Exact `∫_a^b |f|` including the constant extensions.
    pub fn abs_integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut total = 0.0;
        let lin_abs = |x0: f64, x1: f64, f0: f64, f1: f64| {
            let h = x1 - x0;
            if h <= 0.0 {
                0.0
            } else if f0 * f1 >= 0.0 {
                0.5 * h * (f0.abs() + f1.abs())
            } else {
                let z = h * f0.abs() / (f0.abs() + f1.abs());
                0.5 * z * f0.abs() + 0.5 * (h - z) * f1.abs()
            }
        };
        if a < self.start() {
            total += self.first_value().abs() * (b.min(self.start()) - a);
        }
        if b > self.end() {
            total += self.last_value().abs() * (b - a.max(self.end()));
        }
        for (x0, x1, f0, f1) in self.pieces() {
            let lo = x0.max(a);
            let hi = x1.min(b);
            if hi > lo {
                let at = |x: f64| f0 + (f1 - f0) * (x - x0) / (x1 - x0);
                total += lin_abs(lo, hi, at(lo), at(hi));
            }
        }
        total
    }

    pub fn sample(&self, grid: &[f64]) -> Vec<f64> {
        grid.iter().map(|&x| self.eval(x)).collect()
    }

    /// New profile `g(f(x))` for affine `g(s) = scale * s`.
    pub fn scaled(&self, scale: f64) -> Profile {
        Profile::build(
            self.breaks.clone(),
            self.left.iter().map(|v| v * scale).collect(),
            self.right.iter().map(|v| v * scale).collect(),
        )
        .expect("scaling preserves validity")
    }
}
