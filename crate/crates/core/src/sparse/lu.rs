//! Left-looking sparse LU factorisation with threshold partial pivoting
//! (Gilbert–Peierls). Each column is obtained from a sparse triangular solve
//! whose nonzero pattern is found by a depth-first reach in the graph of `L`.

use alloc::vec;
use alloc::vec::Vec;

use super::CSparse;
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// `P A = L U` with unit lower `L` and upper `U`, both stored by column.
#[derive(Debug, Clone)]
pub struct SparseLu {
    n: usize,
    /// Original row index -> pivot position.
    pinv: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<C64>,
    up: Vec<usize>,
    ui: Vec<usize>,
    ux: Vec<C64>,
    min_pivot: f64,
    max_pivot: f64,
}

/// Column-compressed view of a CSR matrix (the CSR storage of `A^T`).
struct Csc {
    p: Vec<usize>,
    i: Vec<usize>,
    x: Vec<C64>,
}

fn to_csc(a: &CSparse) -> Csc {
    let n = a.ncols();
    let mut counts = vec![0usize; n + 1];
    for (_, c, _) in a.iter() {
        counts[c + 1] += 1;
    }
    for k in 0..n {
        counts[k + 1] += counts[k];
    }
    let mut next = counts.clone();
    let mut i = vec![0; a.nnz()];
    let mut x = vec![ZERO; a.nnz()];
    for (r, c, v) in a.iter() {
        let slot = next[c];
        i[slot] = r;
        x[slot] = v;
        next[c] += 1;
    }
    Csc { p: counts, i, x }
}

const UNSET: usize = usize::MAX;

impl SparseLu {
    /// Factorises `a`. `pivot_threshold` in (0, 1] is the fraction of the
    /// column maximum the diagonal entry must reach to be kept as pivot.
    pub fn factor(a: &CSparse, pivot_threshold: f64) -> Result<Self> {
        let n = a.ensure_square()?;
        let csc = to_csc(a);
        let scale = a.max_abs();
        if scale == 0.0 {
            return Err(Error::Singular {
                condition: f64::INFINITY,
            });
        }
        let mut pinv = vec![UNSET; n];
        let mut lp = Vec::with_capacity(n + 1);
        let mut li: Vec<usize> = Vec::new();
        let mut lx = Vec::new();
        let mut up = Vec::with_capacity(n + 1);
        let mut ui = Vec::new();
        let mut ux = Vec::new();
        let mut x = vec![ZERO; n];
        let mut xi = vec![0usize; n];
        let mut marked = vec![false; n];
        let mut stack: Vec<(usize, usize)> = Vec::new();
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot: f64 = 0.0;

        for k in 0..n {
            lp.push(li.len());
            up.push(ui.len());

            // Reach: topological order of the rows touched by L \ A(:,k).
            let mut top = n;
            for p in csc.p[k]..csc.p[k + 1] {
                let start = csc.i[p];
                if marked[start] {
                    continue;
                }
                stack.push((start, UNSET));
                marked[start] = true;
                while let Some(&(j, cursor)) = stack.last() {
                    let col = pinv[j];
                    let (lo, hi) = if col == UNSET {
                        (0, 0)
                    } else {
                        (lp[col] + 1, lp[col + 1])
                    };
                    let mut c = if cursor == UNSET { lo } else { cursor };
                    let mut child = UNSET;
                    while c < hi {
                        let r: usize = li[c];
                        c += 1;
                        if !marked[r] {
                            child = r;
                            break;
                        }
                    }
                    if child == UNSET {
                        stack.pop();
                        top -= 1;
                        xi[top] = j;
                    } else {
                        stack.last_mut().unwrap().1 = c;
                        marked[child] = true;
                        stack.push((child, UNSET));
                    }
                }
            }
            for &j in &xi[top..n] {
                marked[j] = false;
                x[j] = ZERO;
            }
            for p in csc.p[k]..csc.p[k + 1] {
                x[csc.i[p]] = csc.x[p];
            }
            // Numeric sparse triangular solve.
            for px in top..n {
                let j = xi[px];
                let col = pinv[j];
                if col == UNSET {
                    continue;
                }
                let xj = x[j];
                if xj == ZERO {
                    continue;
                }
                for p in lp[col] + 1..lp[col + 1] {
                    x[li[p]] -= lx[p] * xj;
                }
            }
            // Pivot selection.
            let mut ipiv = UNSET;
            let mut best = -1.0;
            for &i in &xi[top..n] {
                if pinv[i] == UNSET {
                    let t = x[i].norm();
                    if t > best {
                        best = t;
                        ipiv = i;
                    }
                } else {
                    ui.push(pinv[i]);
                    ux.push(x[i]);
                }
            }
            if ipiv == UNSET || best <= scale * 1e-15 {
                return Err(Error::Singular {
                    condition: f64::INFINITY,
                });
            }
            if pinv[k] == UNSET && x[k].norm() >= best * pivot_threshold {
                ipiv = k;
            }
            let pivot = x[ipiv];
            let pmag = pivot.norm();
            min_pivot = min_pivot.min(pmag);
            max_pivot = max_pivot.max(pmag);
            ui.push(k);
            ux.push(pivot);
            pinv[ipiv] = k;
            li.push(ipiv);
            lx.push(ONE);
            let inv = ONE / pivot;
            for &i in &xi[top..n] {
                if pinv[i] == UNSET && x[i] != ZERO {
                    li.push(i);
                    lx.push(x[i] * inv);
                }
                x[i] = ZERO;
            }
        }
        lp.push(li.len());
        up.push(ui.len());
        for r in li.iter_mut() {
            *r = pinv[*r];
        }
        Ok(Self {
            n,
            pinv,
            lp,
            li,
            lx,
            up,
            ui,
            ux,
            min_pivot,
            max_pivot,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Ratio of largest to smallest pivot magnitude; a cheap lower bound on
    /// the condition number.
    pub fn condition_estimate(&self) -> f64 {
        self.max_pivot / self.min_pivot
    }

    /// Stored entries of both factors.
    pub fn fill(&self) -> usize {
        self.li.len() + self.ui.len()
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        assert_eq!(b.len(), self.n, "lu solve: rhs dimension");
        let mut x = vec![ZERO; self.n];
        for (i, &bi) in b.iter().enumerate() {
            x[self.pinv[i]] = bi;
        }
        for j in 0..self.n {
            let xj = x[j];
            if xj == ZERO {
                continue;
            }
            for p in self.lp[j] + 1..self.lp[j + 1] {
                x[self.li[p]] -= self.lx[p] * xj;
            }
        }
        for j in (0..self.n).rev() {
            let last = self.up[j + 1] - 1;
            x[j] /= self.ux[last];
            let xj = x[j];
            if xj == ZERO {
                continue;
            }
            for p in self.up[j]..last {
                x[self.ui[p]] -= self.ux[p] * xj;
            }
        }
        x
    }
}
