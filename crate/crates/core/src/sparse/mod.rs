//! Complex sparse matrix kernel.
//!
//! Compressed sparse row storage, Kronecker products, dense Padé matrix
//! exponentials, Krylov/Taylor matrix-exponential actions and shifted linear
//! solves.

mod csr;
mod dense;
mod expm;
mod expmv;
mod gmres;
mod lu;
mod solve;
mod vector;

pub use csr::CSparse;
pub use dense::CDense;
pub use expm::{expm, expm_dense, expm_with};
pub use expmv::{expmv, expmv_krylov, expmv_taylor, expmv_with, ExpmvMethod};
pub use gmres::{gmres, Ilu0};
pub use lu::SparseLu;
pub use solve::{shifted_solve, shifted_solve_with, SolveStrategy};
pub use vector::CVector;

/// Tunables of the sparse kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseConfig {
    /// Largest dimension for which a dense exponential may be formed.
    pub dense_expm_cap: usize,
    /// Largest dimension handled by the direct sparse factorisation.
    pub direct_solve_cap: usize,
    /// Relative 2-norm tolerance of matrix-exponential actions.
    pub expmv_tol: f64,
    /// Krylov subspace dimension.
    pub krylov_dim: usize,
    /// Upper bound on internal sub-steps of one matrix-exponential action.
    pub max_substeps: usize,
    /// Relative residual required from shifted solves.
    pub solve_tol: f64,
    /// GMRES restart length.
    pub gmres_restart: usize,
    /// GMRES iteration budget (summed over restarts).
    pub gmres_max_iter: usize,
}

impl Default for SparseConfig {
    fn default() -> Self {
        Self {
            dense_expm_cap: 4096,
            direct_solve_cap: 20_000,
            expmv_tol: 1e-10,
            krylov_dim: 30,
            max_substeps: 2_000_000,
            solve_tol: 1e-8,
            gmres_restart: 60,
            gmres_max_iter: 6000,
        }
    }
}

/// Hermitian inner product `<a|b> = sum conj(a_i) b_i`.
pub fn dot(a: &[crate::C64], b: &[crate::C64]) -> crate::C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Euclidean norm of a complex slice.
pub fn norm2(a: &[crate::C64]) -> f64 {
    crate::math::sqrt(a.iter().map(|x| x.norm_sqr()).sum())
}
