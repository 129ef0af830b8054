//! Exact computations with truncated complete differential graded Lie
//! algebras over ℚ: Maurer–Cartan and gauge calculus, derivation complexes,
//! convolution algebras, twisted products and relative fibration models.
//!
//! Completions are modelled by quotients L/L^{N+1} by bracket length, and
//! every complex lives in a finite degree window. All arithmetic is exact.

pub mod cell;
pub mod convolution;
pub mod derivations;
pub mod dsl;
pub mod error;
pub mod fixtures;
pub mod free_lie;
pub mod graded;
pub mod mc_gauge;
pub mod models;
pub mod report;
pub mod suite;

pub use error::{Error, Result};
