//! Sparse storage, a profile Cholesky for the interior solves, and the dense
//! symmetric-definite generalized eigensolver.

mod csr;
mod pencil;
mod skyline;

pub use csr::{CsrMatrix, TripletBuilder};
pub use pencil::{cholesky_pivots, solve_definite_pencil, symmetric_eigen, PencilSolution};
pub use skyline::{reverse_cuthill_mckee, SkylineCholesky};

/// Euclidean dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
