//! Dense complex linear algebra kernels.

mod dot;
mod eig;
mod lu;
mod matrix;
mod svd;
mod tridiag;

pub use dot::{compensated_dot, CompensatedDot};
pub use eig::{eig, eig_with, eigenvalues, EigOptions, EigenDecomposition};
pub use lu::{inverse, Lu};
pub use matrix::{dot, normalize, vec_norm, DenseMatrix};
pub use svd::{smallest_singular, smallest_singular_tol, SmallestSingular};
pub use tridiag::symmetric_tridiagonal_eig;

use num_complex::Complex64 as C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is singular")]
    Singular,
    #[error("QR iteration did not converge after {sweeps} sweeps ({unconverged} eigenvalues left)")]
    NoConvergence { sweeps: usize, unconverged: usize },
}

/// Greedy nearest matching of two eigenvalue lists: for each value of `a`
/// (in order) the closest unused value of `b`. Returns `(index_in_b, distance)`.
pub fn match_eigenvalues(a: &[C64], b: &[C64]) -> Vec<(usize, f64)> {
    let mut used = vec![false; b.len()];
    a.iter()
        .map(|&x| {
            let (j, d) = b
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(j, &y)| (j, (x - y).norm()))
                .fold((usize::MAX, f64::INFINITY), |acc, c| if c.1 < acc.1 { c } else { acc });
            if j != usize::MAX {
                used[j] = true;
            }
            (j, d)
        })
        .collect()
}
