//! Numerical laboratory for a two-species chemotaxis system with local and
//! nonlocal Lotka–Volterra kinetics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod diagnostics;
pub mod grid;
pub mod integrator;
pub mod params;

pub use params::{Params, ParamsError};
