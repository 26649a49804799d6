//! Semiclassical two-level avoided-crossing model: coupling integrals, stationary phase and scattering solvers.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cutoff;
pub mod error;
pub mod model;
pub mod oscquad;
pub mod poly;
pub mod quad;
pub mod series;
pub mod special;
pub mod statphase;
pub mod grid;
pub mod matrix;
pub mod presets;
pub mod solver;
pub mod harness;
