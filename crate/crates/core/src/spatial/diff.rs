use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::grids::{Boundary, CoordinateGrid};
use crate::error::invalid;
use crate::sparse::CSparse;
use crate::{math, Result, C64};

pub const DEFAULT_STENCIL: usize = 5;

/// Spectral first-derivative matrix on the uniform periodic grid of `n`
/// points: the cot kernel for even `n`, the csc kernel for odd `n`. Both are
/// exact for every Fourier mode the grid resolves (the Nyquist mode of an
/// even grid is mapped to zero).
pub fn fourier_diff(n: usize) -> Result<CSparse> {
    if n < 2 {
        return Err(invalid("Fourier differentiation needs at least 2 points"));
    }
    let mut trips = Vec::with_capacity(n * (n - 1));
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            let d = j as i64 - k as i64;
            let sign = if d.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let x = d as f64 * PI / n as f64;
            let v = if n.is_multiple_of(2) {
                0.5 * sign / math::tan(x)
            } else {
                0.5 * sign / math::sin(x)
            };
            // Exact zeros (cot of pi/2 on even grids) are dropped.
            if v.abs() > 1e-15 {
                trips.push((j, k, C64::new(v, 0.0)));
            }
        }
    }
    CSparse::from_triplets(n, n, trips)
}

/// Fornberg's recursion: weights of the `m`-th derivative at `z` from values
/// at `x`.
pub fn fornberg_weights(z: f64, x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Finite-difference derivative matrix of order `deriv_order` with a
/// `stencil`-point window.
pub fn fd_matrix(grid: &CoordinateGrid, deriv_order: usize, stencil: usize) -> Result<CSparse> {
    let n = grid.len();
    if stencil < deriv_order + 1 {
        return Err(invalid("stencil too small for the derivative order"));
    }
    if stencil > n {
        return Err(invalid("grid has fewer points than the stencil"));
    }
    let p = grid.points();
    let left = (stencil - 1) / 2;
    let mut trips = Vec::with_capacity(n * stencil);
    for i in 0..n {
        match grid.boundary() {
            Boundary::Periodic { period } => {
                let mut nodes = Vec::with_capacity(stencil);
                let mut cols = Vec::with_capacity(stencil);
                for o in 0..stencil {
                    let idx = i as i64 - left as i64 + o as i64;
                    let wraps = idx.div_euclid(n as i64);
                    let col = idx.rem_euclid(n as i64) as usize;
                    nodes.push(p[col] + wraps as f64 * period);
                    cols.push(col);
                }
                let w = fornberg_weights(p[i], &nodes, deriv_order);
                trips.extend(cols.into_iter().zip(w).map(|(c, w)| (i, c, C64::new(w, 0.0))));
            }
            Boundary::Reflective => {
                let start = i.saturating_sub(left).min(n - stencil);
                let nodes = &p[start..start + stencil];
                let w = fornberg_weights(p[i], nodes, deriv_order);
                trips.extend(w.into_iter().enumerate().map(|(o, w)| (i, start + o, C64::new(w, 0.0))));
            }
            Boundary::Absorptive => {
                // Ghost nodes continue the edge spacing and carry zero values.
                let h_lo = p[1] - p[0];
                let h_hi = p[n - 1] - p[n - 2];
                let mut nodes = Vec::with_capacity(stencil);
                let mut cols = Vec::with_capacity(stencil);
                for o in 0..stencil {
                    let idx = i as i64 - left as i64 + o as i64;
                    if idx < 0 {
                        nodes.push(p[0] + idx as f64 * h_lo);
                        cols.push(None);
                    } else if idx >= n as i64 {
                        nodes.push(p[n - 1] + (idx - n as i64 + 1) as f64 * h_hi);
                        cols.push(None);
                    } else {
                        nodes.push(p[idx as usize]);
                        cols.push(Some(idx as usize));
                    }
                }
                let w = fornberg_weights(p[i], &nodes, deriv_order);
                trips.extend(
                    cols.into_iter()
                        .zip(w)
                        .filter_map(|(c, w)| c.map(|c| (i, c, C64::new(w, 0.0)))),
                );
            }
        }
    }
    Ok(CSparse::from_triplets(n, n, trips)?.pruned(0.0))
}
