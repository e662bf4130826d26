//! Dispersive estimates for multi-dimensional Burgers and monomial-flux
//! scalar conservation laws: exponent algebra, entropy moment tensors, a
//! monotone finite-volume solver, observables, and an experiment harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod error;
pub mod exponents;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod observables;
pub mod solver;
pub mod tensors;

pub use error::{Error, Result};
