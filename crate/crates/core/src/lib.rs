//! Damped pressureless particle system on the half line: exact entropy
//! solutions through the Hopf–Lax formula, the damping time warp, a vanishing
//! viscosity solver, and weak-form verification.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bv;
pub mod damping;
pub mod error;
pub mod field;
pub mod hopf_lax;
pub mod profile;
pub mod quadrature;
pub mod scenario;
pub mod verify;
pub mod viscous;

pub use error::{DropletError, Result};
