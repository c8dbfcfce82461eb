use alloc::vec;
use alloc::vec::Vec;

use super::CDense;
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Complex sparse matrix in compressed row storage.
///
/// Column indices are strictly increasing within each row and no explicit
/// zeros are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CSparse {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl CSparse {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for (i, &d) in diag.iter().enumerate() {
            if d != ZERO {
                indices.push(i);
                values.push(d);
            }
            indptr.push(indices.len());
        }
        Self {
            nrows: n,
            ncols: n,
            indptr,
            indices,
            values,
        }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    /// Builds a matrix from coordinate triplets, summing duplicates and
    /// dropping entries that end up exactly zero.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, C64)>,
    ) -> Result<Self> {
        for &(r, c, _) in &triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::IndexOutOfRange {
                    row: r,
                    col: c,
                    nrows,
                    ncols,
                });
            }
        }
        triplets.sort_unstable_by_key(|a| (a.0, a.1));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut rows: Vec<usize> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            match (rows.last(), indices.last()) {
                (Some(&lr), Some(&lc)) if lr == r && lc == c => {
                    *values.last_mut().unwrap() += v;
                }
                _ => {
                    rows.push(r);
                    indices.push(c);
                    values.push(v);
                }
            }
        }
        let mut k = 0;
        for i in 0..rows.len() {
            if values[i] != ZERO {
                rows[k] = rows[i];
                indices[k] = indices[i];
                values[k] = values[i];
                k += 1;
            }
        }
        rows.truncate(k);
        indices.truncate(k);
        values.truncate(k);
        for &r in &rows {
            indptr[r + 1] += 1;
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        Ok(Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        })
    }

    pub fn from_dense(d: &CDense) -> Self {
        let mut indptr = Vec::with_capacity(d.nrows() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for i in 0..d.nrows() {
            for j in 0..d.ncols() {
                let v = d[(i, j)];
                if v != ZERO {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            nrows: d.nrows(),
            ncols: d.ncols(),
            indptr,
            indices,
            values,
        }
    }

    pub fn to_dense(&self) -> CDense {
        let mut d = CDense::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.iter() {
            d[(r, c)] = v;
        }
        d
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn ensure_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.nrows)
        } else {
            Err(Error::NotSquare {
                nrows: self.nrows,
                ncols: self.ncols,
            })
        }
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[C64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => ZERO,
        }
    }

    /// Iterates `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        self.iter().collect()
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.ncols, "matvec: input dimension");
        assert_eq!(y.len(), self.nrows, "matvec: output dimension");
        for (i, yi) in y.iter_mut().enumerate() {
            let (a, b) = (self.indptr[i], self.indptr[i + 1]);
            let mut acc = ZERO;
            for k in a..b {
                acc += self.values[k] * x[self.indices[k]];
            }
            *yi = acc;
        }
    }

    /// `y = A^H x`.
    pub fn adjoint_matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.nrows, "adjoint matvec: input dimension");
        let mut y = vec![ZERO; self.ncols];
        for (r, c, v) in self.iter() {
            y[c] += v.conj() * x[r];
        }
        y
    }

    pub fn scale(&self, c: C64) -> Self {
        if c == ZERO {
            return Self::zeros(self.nrows, self.ncols);
        }
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &Self, c: C64) -> Result<Self> {
        self.check_same_shape(other, "add")?;
        let mut out_indptr = Vec::with_capacity(self.nrows + 1);
        let mut out_idx = Vec::with_capacity(self.nnz() + other.nnz());
        let mut out_val = Vec::with_capacity(self.nnz() + other.nnz());
        out_indptr.push(0);
        for i in 0..self.nrows {
            let (ca, va) = self.row(i);
            let (cb, vb) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let (col, val) = if q >= cb.len() || (p < ca.len() && ca[p] < cb[q]) {
                    p += 1;
                    (ca[p - 1], va[p - 1])
                } else if p >= ca.len() || cb[q] < ca[p] {
                    q += 1;
                    (cb[q - 1], c * vb[q - 1])
                } else {
                    p += 1;
                    q += 1;
                    (ca[p - 1], va[p - 1] + c * vb[q - 1])
                };
                if val != ZERO {
                    out_idx.push(col);
                    out_val.push(val);
                }
            }
            out_indptr.push(out_idx.len());
        }
        Ok(Self {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr: out_indptr,
            indices: out_idx,
            values: out_val,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, C64::new(-1.0, 0.0))
    }

    /// `A + omega * I`.
    pub fn shifted(&self, omega: C64) -> Result<Self> {
        let n = self.ensure_square()?;
        self.add_scaled(&Self::identity(n), omega)
    }

    /// Sparse-sparse product.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::DimensionMismatch {
                context: "matmul",
                expected: self.ncols,
                found: other.nrows,
            });
        }
        let mut acc = vec![ZERO; other.ncols];
        let mut mark = vec![usize::MAX; other.ncols];
        let mut touched = Vec::new();
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for i in 0..self.nrows {
            touched.clear();
            let (ca, va) = self.row(i);
            for (&k, &a) in ca.iter().zip(va) {
                let (cb, vb) = other.row(k);
                for (&j, &b) in cb.iter().zip(vb) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = ZERO;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                if acc[j] != ZERO {
                    indices.push(j);
                    values.push(acc[j]);
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self {
            nrows: self.nrows,
            ncols: other.ncols,
            indptr,
            indices,
            values,
        })
    }

    pub fn transpose(&self) -> Self {
        self.transpose_map(|v| v)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        self.transpose_map(|v| v.conj())
    }

    fn transpose_map(&self, f: impl Fn(C64) -> C64) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0usize; self.nnz()];
        let mut values = vec![ZERO; self.nnz()];
        for (r, c, v) in self.iter() {
            let k = next[c];
            indices[k] = r;
            values[k] = f(v);
            next[c] += 1;
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            indptr,
            indices,
            values,
        }
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = v.conj());
        out
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        let mut sums = vec![0.0; self.ncols];
        for (_, c, v) in self.iter() {
            sums[c] += v.norm();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|i| self.row(i).1.iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// Entry-wise maximum distance to another matrix of the same shape.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        match self.sub(other) {
            Ok(d) => d.max_abs(),
            Err(_) => f64::INFINITY,
        }
    }

    /// Drops stored entries with magnitude at or below `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        let trip = self.iter().filter(|t| t.2.norm() > tol).collect();
        Self::from_triplets(self.nrows, self.ncols, trip).expect("indices already valid")
    }

    /// Kronecker product with the spatial-first convention:
    /// entry `(i*b.nrows + k, j*b.ncols + l) = a(i,j) * b(k,l)`.
    pub fn kron(a: &Self, b: &Self) -> Result<Self> {
        let nrows = checked_dim(a.nrows, b.nrows)?;
        let ncols = checked_dim(a.ncols, b.ncols)?;
        checked_dim(a.nnz(), b.nnz())?;
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(a.nnz() * b.nnz());
        let mut values = Vec::with_capacity(a.nnz() * b.nnz());
        indptr.push(0);
        for i in 0..a.nrows {
            let (ca, va) = a.row(i);
            for k in 0..b.nrows {
                let (cb, vb) = b.row(k);
                for (&j, &x) in ca.iter().zip(va) {
                    for (&l, &y) in cb.iter().zip(vb) {
                        let v = x * y;
                        if v != ZERO {
                            indices.push(j * b.ncols + l);
                            values.push(v);
                        }
                    }
                }
                indptr.push(indices.len());
            }
        }
        Ok(Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        })
    }

    /// Block-diagonal concatenation.
    pub fn block_diag(blocks: &[Self]) -> Self {
        let nrows = blocks.iter().map(|b| b.nrows).sum();
        let ncols = blocks.iter().map(|b| b.ncols).sum();
        let nnz = blocks.iter().map(|b| b.nnz()).sum();
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        indptr.push(0);
        let mut col0 = 0;
        for b in blocks {
            for i in 0..b.nrows {
                let (cb, vb) = b.row(i);
                indices.extend(cb.iter().map(|&c| c + col0));
                values.extend_from_slice(vb);
                indptr.push(indices.len());
            }
            col0 += b.ncols;
        }
        Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    /// Extracts the square diagonal block `[start, start + size)`.
    pub fn diagonal_block(&self, start: usize, size: usize) -> Self {
        let mut trip = Vec::new();
        for i in start..start + size {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                if c >= start && c < start + size {
                    trip.push((i - start, c - start, v));
                }
            }
        }
        Self::from_triplets(size, size, trip).expect("indices in range")
    }

    fn check_same_shape(&self, other: &Self, context: &'static str) -> Result<()> {
        if self.nrows != other.nrows {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.nrows,
                found: other.nrows,
            });
        }
        if self.ncols != other.ncols {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.ncols,
                found: other.ncols,
            });
        }
        Ok(())
    }
}

fn checked_dim(a: usize, b: usize) -> Result<usize> {
    a.checked_mul(b).ok_or(Error::Overflow {
        dim: a as u128 * b as u128,
    })
}
