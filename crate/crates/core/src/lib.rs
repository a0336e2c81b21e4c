//! Gaussian integrals over finite-dimensional *-algebras with trace, and
//! their expansion as weighted sums over ribbon and Möbius graphs.

pub mod algebra;
pub mod characters;
pub mod cli;
pub mod groups;
pub mod linalg;
pub mod maps;
pub mod scalar;
pub mod series;
pub mod wick;
