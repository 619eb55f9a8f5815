//! Higher-order supersymmetric (SUSY) partner potentials of the harmonic
//! oscillator on a discretized line.
//!
//! The crate builds the m-step superpotential chain from the closed-form
//! solution of the oscillator Riccati equation, assembles the partner
//! potentials, their bound states and the natural ladder operators
//! D = B†aB, D† = B†a†B, and verifies the resulting polynomial Heisenberg
//! algebra of order 2m against an independent finite-difference eigensolver.
//!
//! Layering, bottom up:
//!
//! * [`specfun`] — log-gamma, the gamma ratio, Kummer's 1F1 and its derivative.
//! * [`numerics`] — grids, banded operators, Hamiltonians, the tridiagonal
//!   eigensolver oracle.
//! * [`chain`] — superpotential chain construction, Riccati diagnostics,
//!   singularity scanning, an independent Riccati ODE oracle.
//! * [`states`] — oscillator, transformed and missing eigenstates, spectrum
//!   assembly.
//! * [`algebra`] — intertwiners, ladder operators, number polynomial, algebra
//!   and SUSY-block verification, ladder-structure classification.
//! * [`report`] — batch runner: JSON config in, CSV tables and a JSON
//!   verification report out.
//!
//! Most capabilities have a runnable demo under `examples/`.

pub mod algebra;
pub mod chain;
pub mod error;
pub mod numerics;
pub mod report;
pub mod specfun;
pub mod states;

pub use error::{Error, Result};
