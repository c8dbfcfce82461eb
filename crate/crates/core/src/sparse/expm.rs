//! Dense matrix exponential by scaling and squaring with diagonal Padé
//! approximants (degrees 3, 5, 7, 9, 13; Higham's 2005 parameter choice).

use super::{CDense, CSparse, SparseConfig};
use crate::{math, Error, Result, C64};

#[allow(clippy::excessive_precision)]
const THETA: [(usize, f64); 5] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_230e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068e0),
    (13, 5.371_920_351_148_152e0),
];

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Dense exponential of a sparse matrix with the default dimension cap.
pub fn expm(a: &CSparse) -> Result<CDense> {
    expm_with(a, &SparseConfig::default())
}

/// Dense exponential of a sparse matrix; refuses dimensions above
/// `cfg.dense_expm_cap` (use [`super::expmv`] for those).
pub fn expm_with(a: &CSparse, cfg: &SparseConfig) -> Result<CDense> {
    let n = a.ensure_square()?;
    if n > cfg.dense_expm_cap {
        return Err(Error::DenseCapExceeded {
            dim: n,
            cap: cfg.dense_expm_cap,
        });
    }
    expm_dense(&a.to_dense())
}

/// Dense exponential of a dense matrix.
pub fn expm_dense(a: &CDense) -> Result<CDense> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::NotSquare {
            nrows: a.nrows(),
            ncols: a.ncols(),
        });
    }
    if n == 0 {
        return Ok(CDense::zeros(0, 0));
    }
    let norm = a.norm1();
    if norm == 0.0 {
        return Ok(CDense::identity(n));
    }
    for &(m, theta) in &THETA[..4] {
        if norm <= theta {
            return pade_low(a, m);
        }
    }
    let theta13 = THETA[4].1;
    let s = math::ceil(math::log2(norm / theta13)).max(0.0) as i32;
    let scaled = a.scale(C64::new(math::pow(2.0, -(s as f64)), 0.0));
    let mut x = pade13(&scaled)?;
    for _ in 0..s {
        x = x.matmul(&x);
    }
    Ok(x)
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn pade_low(a: &CDense, m: usize) -> Result<CDense> {
    let b: &[f64] = match m {
        3 => &B3,
        5 => &B5,
        7 => &B7,
        _ => &B9,
    };
    let n = a.nrows();
    let id = CDense::identity(n);
    let a2 = a.matmul(a);
    // Powers A^0, A^2, A^4, ... up to A^(m-1).
    let mut pows = alloc::vec![id.clone(), a2.clone()];
    while pows.len() < m.div_ceil(2) {
        let next = pows.last().unwrap().matmul(&a2);
        pows.push(next);
    }
    let mut u = CDense::zeros(n, n);
    let mut v = CDense::zeros(n, n);
    for (k, p) in pows.iter().enumerate() {
        u = u.add_scaled(p, real(b[2 * k + 1]));
        v = v.add_scaled(p, real(b[2 * k]));
    }
    let u = a.matmul(&u);
    solve_pade(&u, &v)
}

fn pade13(a: &CDense) -> Result<CDense> {
    let b = &B13;
    let n = a.nrows();
    let id = CDense::identity(n);
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let inner_u = a6
        .scale(real(b[13]))
        .add_scaled(&a4, real(b[11]))
        .add_scaled(&a2, real(b[9]));
    let u = a6
        .matmul(&inner_u)
        .add_scaled(&a6, real(b[7]))
        .add_scaled(&a4, real(b[5]))
        .add_scaled(&a2, real(b[3]))
        .add_scaled(&id, real(b[1]));
    let u = a.matmul(&u);
    let inner_v = a6
        .scale(real(b[12]))
        .add_scaled(&a4, real(b[10]))
        .add_scaled(&a2, real(b[8]));
    let v = a6
        .matmul(&inner_v)
        .add_scaled(&a6, real(b[6]))
        .add_scaled(&a4, real(b[4]))
        .add_scaled(&a2, real(b[2]))
        .add_scaled(&id, real(b[0]));
    solve_pade(&u, &v)
}

fn solve_pade(u: &CDense, v: &CDense) -> Result<CDense> {
    let p = v.add_scaled(u, real(1.0));
    let q = v.add_scaled(u, real(-1.0));
    q.solve(&p)
}
