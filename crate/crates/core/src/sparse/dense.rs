use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major dense complex matrix, used for small exponentials, Krylov
/// projections and test oracles.
#[derive(Debug, Clone, PartialEq)]
pub struct CDense {
    nrows: usize,
    ncols: usize,
    data: Vec<C64>,
}

impl CDense {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![ZERO; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                data.push(f(i, j));
            }
        }
        Self { nrows, ncols, data }
    }

    pub fn from_row_major(nrows: usize, ncols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != nrows * ncols {
            return Err(Error::DimensionMismatch {
                context: "dense from_row_major",
                expected: nrows * ncols,
                found: data.len(),
            });
        }
        Ok(Self { nrows, ncols, data })
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.nrows).map(|i| self[(i, j)]).collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "dense matmul: inner dimension");
        let mut out = Self::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            let out_row = &mut out.data[i * other.ncols..(i + 1) * other.ncols];
            for k in 0..self.ncols {
                let a = self.data[i * self.ncols + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * other.ncols..(k + 1) * other.ncols];
                for (o, &b) in out_row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(self.ncols, x.len(), "dense matvec: input dimension");
        (0..self.nrows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add_scaled(&self, other: &Self, c: C64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + c * b)
            .collect();
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            data,
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)])
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.ncols)
            .map(|j| (0..self.nrows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.nrows.min(self.ncols)).map(|i| self[(i, i)]).sum()
    }

    /// Solves `self * X = rhs` by LU factorisation with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        let n = self.nrows;
        if n != self.ncols {
            return Err(Error::NotSquare {
                nrows: self.nrows,
                ncols: self.ncols,
            });
        }
        if rhs.nrows != n {
            return Err(Error::DimensionMismatch {
                context: "dense solve",
                expected: n,
                found: rhs.nrows,
            });
        }
        let mut a = self.clone();
        let mut b = rhs.clone();
        let m = b.ncols;
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        let mut min_piv = f64::INFINITY;
        let mut max_piv: f64 = 0.0;
        for k in 0..n {
            let (p, pmag) = (k..n)
                .map(|i| (i, a[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmag <= scale * 1e-300 || pmag == 0.0 {
                return Err(Error::Singular {
                    condition: f64::INFINITY,
                });
            }
            min_piv = min_piv.min(pmag);
            max_piv = max_piv.max(pmag);
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                for j in 0..m {
                    b.data.swap(k * m + j, p * m + j);
                }
            }
            let inv = ONE / a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] * inv;
                if f == ZERO {
                    continue;
                }
                a[(i, k)] = f;
                for j in k + 1..n {
                    let akj = a.data[k * n + j];
                    a.data[i * n + j] -= f * akj;
                }
                for j in 0..m {
                    let bkj = b.data[k * m + j];
                    b.data[i * m + j] -= f * bkj;
                }
            }
        }
        if max_piv / min_piv > 1e15 {
            return Err(Error::Singular {
                condition: max_piv / min_piv,
            });
        }
        for k in (0..n).rev() {
            let inv = ONE / a[(k, k)];
            for j in 0..m {
                let mut acc = b.data[k * m + j];
                for l in k + 1..n {
                    acc -= a.data[k * n + l] * b.data[l * m + j];
                }
                b.data[k * m + j] = acc * inv;
            }
        }
        Ok(b)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve(&Self::identity(self.nrows))
    }
}

impl Index<(usize, usize)> for CDense {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.ncols + j]
    }
}

impl IndexMut<(usize, usize)> for CDense {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.ncols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_recovers_identity_inverse() {
        let a = CDense::from_fn(3, 3, |i, j| {
            C64::new((i * 3 + j) as f64 + if i == j { 5.0 } else { 0.0 }, (i as f64) - (j as f64))
        });
        let inv = a.inverse().unwrap();
        assert!(a.matmul(&inv).max_abs_diff(&CDense::identity(3)) < 1e-13);
    }

    #[test]
    fn singular_matrix_reported() {
        let a = CDense::from_fn(2, 2, |_, _| ONE);
        assert!(matches!(a.inverse(), Err(Error::Singular { .. })));
    }
}
