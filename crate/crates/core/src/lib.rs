//! Desk-scale laboratory for square-difference-free sets.
//!
//! Modules mirror the pieces of the density-increment argument:
//! [`sets`] builds and optimizes the sets themselves, [`fourier`] implements the operator calculus
//! on products of cyclic groups, [`circle`] evaluates the smooth square weight and its arcs,
//! [`increment`] extracts density increments, and [`lower_bound`] builds the periodic
//! counterexample functions.

pub mod arith;
pub mod error;
pub mod sets;

pub use error::{Error, Result};
pub mod circle;
pub mod fourier;
pub mod increment;
pub mod lower_bound;
