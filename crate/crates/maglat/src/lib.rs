//! Numerical design toolkit for solid-state magnetic traps and lattices.
//!
//! The crate evaluates AC-Stark trapping potentials for electron and hole
//! spins, their validity and loss diagnostics, the driving fields of a
//! meandering superconducting wire and of a magnetoelastic film driven by
//! surface acoustic waves, Hubbard parameters of the resulting lattice and
//! the parametric stability of hybrid acoustic traps.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod digamma;
pub mod error;
pub mod lattice;
pub mod ode;
pub mod saw;
pub mod scenario;
pub mod spin;
pub mod stability;
pub mod trap;
pub mod units;
pub mod wire;

pub use error::{Error, Result};
