//! Grid discretization, quadrature, banded differential operators,
//! finite-difference Hamiltonians, and the tridiagonal eigensolver — the
//! independent brute-force oracle layer everything else is checked against.

pub mod eigen;
pub mod grid;
pub mod operator;

pub use eigen::{tridiagonal_eigensolve, EigenDecomposition};
pub use grid::{inner_product, norm, Grid, GridFunction};
pub use operator::{
    build_hamiltonian, compose, derivative_matrix, first_order_operator, BandedOperator,
    LadderSign,
};
