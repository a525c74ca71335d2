//! Exact-arithmetic toolkit for flat Lie algebras and coboundary Lie
//! bialgebras over ℚ.

pub mod bialgebra;
pub mod cli;
pub mod cocycle;
pub mod exterior;
pub mod flat;
pub mod format;
pub mod geometry;
pub mod harness;
pub mod lie;
pub mod linalg;
pub mod scalar;
