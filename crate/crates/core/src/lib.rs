//! Numerical laboratory for fast diffusion equations with Dirichlet data on balls.

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bubbles;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod ode;
pub mod quadrature;
pub mod reproduce;
pub mod spectral;
pub mod stationary;

pub use error::{Error, Result};
pub use grid::{Field, FieldKind, RadialGrid};
