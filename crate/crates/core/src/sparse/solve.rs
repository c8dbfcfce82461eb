//! Shifted linear solves `(F + omega I) x = b`.

use alloc::vec::Vec;

use super::{gmres, norm2, CSparse, CVector, Ilu0, SparseConfig, SparseLu};
use crate::{Error, Result, C64};

/// Solver selection for [`shifted_solve_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveStrategy {
    /// Direct factorisation up to `direct_solve_cap`, GMRES above it.
    #[default]
    Auto,
    Direct,
    Iterative,
}

/// Solves `(f + omega I) x = b` with default configuration.
pub fn shifted_solve(f: &CSparse, omega: f64, b: &[C64]) -> Result<CVector> {
    shifted_solve_with(f, omega, b, &SparseConfig::default(), SolveStrategy::Auto)
}

/// Solves `(f + omega I) x = b`. Every returned solution has been checked
/// against `cfg.solve_tol` in relative residual.
pub fn shifted_solve_with(
    f: &CSparse,
    omega: f64,
    b: &[C64],
    cfg: &SparseConfig,
    strategy: SolveStrategy,
) -> Result<CVector> {
    let n = f.ensure_square()?;
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            context: "shifted_solve",
            expected: n,
            found: b.len(),
        });
    }
    let a = f.shifted(C64::new(omega, 0.0))?;
    let direct = match strategy {
        SolveStrategy::Auto => n <= cfg.direct_solve_cap,
        SolveStrategy::Direct => true,
        SolveStrategy::Iterative => false,
    };
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(CVector::zeros(n));
    }
    let x = if direct {
        let lu = SparseLu::factor(&a, 0.1)?;
        let cond = lu.condition_estimate();
        if !(cond < 1e14) {
            return Err(Error::Singular { condition: cond });
        }
        let mut x = lu.solve(b);
        // Two rounds of iterative refinement.
        for _ in 0..2 {
            let r = residual(&a, &x, b);
            if norm2(&r) <= 1e-15 * bnorm {
                break;
            }
            let dx = lu.solve(&r);
            for (xi, d) in x.iter_mut().zip(&dx) {
                *xi += d;
            }
        }
        let rel = norm2(&residual(&a, &x, b)) / bnorm;
        if !(rel <= cfg.solve_tol) {
            return Err(Error::Singular { condition: cond });
        }
        x
    } else {
        let ilu = Ilu0::new(&a)?;
        let (x, rel) = gmres(
            &a,
            b,
            Some(&ilu),
            cfg.solve_tol * 0.1,
            cfg.gmres_restart,
            cfg.gmres_max_iter,
        )?;
        if !(rel <= cfg.solve_tol) {
            return Err(Error::SolverNoConvergence { residual: rel });
        }
        x
    };
    CVector::new(x)
}

fn residual(a: &CSparse, x: &[C64], b: &[C64]) -> Vec<C64> {
    let ax = a.matvec(x);
    b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
}
