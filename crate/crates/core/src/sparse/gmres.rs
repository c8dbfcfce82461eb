//! Restarted GMRES with an ILU(0) right preconditioner.

use alloc::vec;
use alloc::vec::Vec;

use super::{dot, norm2, CSparse};
use crate::{math, Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Incomplete LU factorisation restricted to the sparsity pattern of `A`
/// (plus the diagonal).
#[derive(Debug, Clone)]
pub struct Ilu0 {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CSparse) -> Result<Self> {
        let n = a.ensure_square()?;
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        // Make sure every diagonal slot exists in the pattern.
        let mut trips = a.triplets();
        trips.extend((0..n).map(|i| (i, i, C64::new(0.0, 0.0))));
        let mut indptr = vec![0usize; n + 1];
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); n];
        for (r, c, v) in trips {
            rows[r].push((c, v));
        }
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|e| e.0);
            let mut last = usize::MAX;
            for &(c, v) in row.iter() {
                if c == last {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    values.push(v);
                    last = c;
                }
            }
            indptr[i + 1] = indices.len();
        }
        let mut diag = vec![0usize; n];
        for i in 0..n {
            diag[i] = (indptr[i]..indptr[i + 1])
                .find(|&p| indices[p] == i)
                .expect("diagonal inserted");
        }
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            for p in indptr[i]..indptr[i + 1] {
                pos[indices[p]] = p;
            }
            for p in indptr[i]..diag[i] {
                let k = indices[p];
                let pivot = values[diag[k]];
                let lik = values[p] / pivot;
                values[p] = lik;
                for q in diag[k] + 1..indptr[k + 1] {
                    let j = indices[q];
                    let slot = pos[j];
                    if slot != usize::MAX {
                        let ukj = values[q];
                        values[slot] -= lik * ukj;
                    }
                }
            }
            if values[diag[i]].norm() <= scale * 1e-14 {
                values[diag[i]] = C64::new(scale * 1e-8, 0.0);
            }
            for p in indptr[i]..indptr[i + 1] {
                pos[indices[p]] = usize::MAX;
            }
        }
        Ok(Self {
            n,
            indptr,
            indices,
            values,
            diag,
        })
    }

    /// Solves `L U z = r`.
    pub fn apply(&self, r: &[C64]) -> Vec<C64> {
        let mut z = r.to_vec();
        for i in 0..self.n {
            let mut acc = z[i];
            for p in self.indptr[i]..self.diag[i] {
                acc -= self.values[p] * z[self.indices[p]];
            }
            z[i] = acc;
        }
        for i in (0..self.n).rev() {
            let mut acc = z[i];
            for p in self.diag[i] + 1..self.indptr[i + 1] {
                acc -= self.values[p] * z[self.indices[p]];
            }
            z[i] = acc / self.values[self.diag[i]];
        }
        z
    }
}

fn givens(a: C64, b: C64) -> (f64, C64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, C64::new(1.0, 0.0));
    }
    let r = math::hypot(na, nb);
    (na / r, (a / na) * b.conj() / r)
}

/// Restarted GMRES for `A x = b` with optional right preconditioner. Returns
/// the solution and its true relative residual.
pub fn gmres(
    a: &CSparse,
    b: &[C64],
    precond: Option<&Ilu0>,
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<(Vec<C64>, f64)> {
    let n = a.ensure_square()?;
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            context: "gmres",
            expected: n,
            found: b.len(),
        });
    }
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok((vec![ZERO; n], 0.0));
    }
    let m = restart.max(1).min(n);
    let apply_m = |v: &[C64]| match precond {
        Some(p) => p.apply(v),
        None => v.to_vec(),
    };
    let mut x = vec![ZERO; n];
    let mut iters = 0;
    while iters < max_iter {
        let ax = a.matvec(&x);
        let r: Vec<C64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm2(&r);
        let resid = beta / bnorm;
        if resid <= tol {
            return Ok((x, resid));
        }
        let mut basis: Vec<Vec<C64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![ZERO; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![ZERO; m];
        let mut g = vec![ZERO; m + 1];
        g[0] = C64::new(beta, 0.0);
        let mut used = 0;
        for j in 0..m {
            iters += 1;
            let z = apply_m(&basis[j]);
            let mut w = a.matvec(&z);
            for (i, vi) in basis.iter().enumerate() {
                let hij = dot(vi, &w);
                h[i][j] = hij;
                for (wk, vk) in w.iter_mut().zip(vi) {
                    *wk -= hij * vk;
                }
            }
            let hn = norm2(&w);
            h[j + 1][j] = C64::new(hn, 0.0);
            for i in 0..j {
                let (x0, y0) = (h[i][j], h[i + 1][j]);
                h[i][j] = x0 * cs[i] + sn[i] * y0;
                h[i + 1][j] = -sn[i].conj() * x0 + y0 * cs[i];
            }
            let (c, s) = givens(h[j][j], h[j + 1][j]);
            cs[j] = c;
            sn[j] = s;
            h[j][j] = h[j][j] * c + s * h[j + 1][j];
            h[j + 1][j] = ZERO;
            g[j + 1] = -s.conj() * g[j];
            g[j] *= c;
            used = j + 1;
            let est = g[j + 1].norm() / bnorm;
            if est <= tol * 0.5 || hn == 0.0 || iters >= max_iter {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        let mut y = vec![ZERO; used];
        for i in (0..used).rev() {
            let mut acc = g[i];
            for k in i + 1..used {
                acc -= h[i][k] * y[k];
            }
            y[i] = acc / h[i][i];
        }
        let mut update = vec![ZERO; n];
        for (k, yk) in y.iter().enumerate() {
            for (u, v) in update.iter_mut().zip(&basis[k]) {
                *u += yk * v;
            }
        }
        let dx = apply_m(&update);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
    }
    let ax = a.matvec(&x);
    let r: Vec<C64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let final_resid = norm2(&r) / bnorm;
    if final_resid <= tol {
        return Ok((x, final_resid));
    }
    Err(Error::SolverNoConvergence {
        residual: final_resid,
    })
}
