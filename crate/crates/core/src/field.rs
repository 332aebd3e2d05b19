use serde::{Deserialize, Serialize};

use crate::bv::{distributional_derivative, HalfLineMeasure, SampledBV};

/// One time slice of a solution: velocity, cumulative mass `V = -∫ₓ^∞ v`, and
/// the volume-fraction measure `v = ∂ₓV`.
///
/// `time` is the clock the slice lives on: warped time for undamped fields,
/// physical time once pulled back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSlice {
    pub time: f64,
    pub velocity: SampledBV,
    pub cumulative: SampledBV,
    pub measure: HalfLineMeasure,
}

impl FieldSlice {
    pub fn assemble(time: f64, velocity: SampledBV, cumulative: SampledBV) -> Self {
        let measure = distributional_derivative(&cumulative);
        FieldSlice {
            time,
            velocity,
            cumulative,
            measure,
        }
    }

    pub fn grid(&self) -> &[f64] {
        self.velocity.grid()
    }

    /// Boundary trace by linear extrapolation from the two innermost nodes
    /// right of `x0`.
    pub fn velocity_trace(&self, x0: f64) -> f64 {
        extrapolate_trace(&self.velocity, x0)
    }

    pub fn cumulative_trace(&self, x0: f64) -> f64 {
        extrapolate_trace(&self.cumulative, x0)
    }
}

pub(crate) fn extrapolate_trace(f: &SampledBV, x0: f64) -> f64 {
    let g = f.grid();
    let v = f.values();
    let i = g.partition_point(|&x| x <= x0);
    if i + 1 >= g.len() {
        return v[g.len() - 1];
    }
    let (x1, x2) = (g[i], g[i + 1]);
    v[i] + (v[i + 1] - v[i]) * (x0 - x1) / (x2 - x1)
}
