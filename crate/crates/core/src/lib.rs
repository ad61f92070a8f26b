//! Core numerics for toric metrics on real tori `R^d / Lambda`:
//! lattices and fundamental domains, quasi-periodic Green functions,
//! rational piecewise-linear convex approximation with the induced
//! periodic polytopal decomposition, discrete Chambert-Loir measures
//! via exact dual-polytope volumes, and a damped-Newton solver for the
//! periodic real Monge-Ampere equation.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats and the
//! CLI live in the companion `tropma` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod clmeasure;
pub mod green;
pub mod lattice;
pub mod linalg;
pub mod masolver;
pub mod math;
pub mod periodic;
pub mod plapprox;
pub mod polytope;
pub mod rat;

pub use lattice::{FundamentalDomain, Lattice};
pub use rat::Rat;
