use alloc::vec::Vec;

use super::system::SpinSystem;
use crate::error::invalid;
use crate::sparse::CSparse;
use crate::{Error, Result, C64};

/// Relaxation and kinetics superoperators, both in 1/s and added to the
/// generator with a plus sign (`d rho/dt = (-iH + R + K) rho`).
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxKin {
    pub r: CSparse,
    pub k: CSparse,
}

impl RelaxKin {
    pub fn zero(liouville_dim: usize) -> Self {
        Self {
            r: CSparse::zeros(liouville_dim, liouville_dim),
            k: CSparse::zeros(liouville_dim, liouville_dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.r.nrows()
    }

    /// `R + K`.
    pub fn total(&self) -> Result<CSparse> {
        self.r.add(&self.k)
    }

    pub fn is_zero(&self) -> bool {
        self.r.nnz() == 0 && self.k.nnz() == 0
    }
}

/// How to obtain [`RelaxKin`].
#[derive(Debug, Clone, PartialEq)]
pub enum RelaxSpec {
    None,
    /// User-supplied matrices, passed through after validation.
    Matrices { r: CSparse, k: CSparse },
    /// `(T1, T2)` in seconds per spin; `f64::INFINITY` disables a channel.
    Phenomenological(Vec<(f64, f64)>),
}

pub fn relax_kin(sys: &SpinSystem, spec: &RelaxSpec) -> Result<RelaxKin> {
    let dim = sys.liouville_dim();
    match spec {
        RelaxSpec::None => Ok(RelaxKin::zero(dim)),
        RelaxSpec::Matrices { r, k } => {
            for m in [r, k] {
                if m.nrows() != dim || m.ncols() != dim {
                    return Err(Error::DimensionMismatch {
                        context: "relaxation/kinetics matrix",
                        expected: dim,
                        found: m.nrows(),
                    });
                }
            }
            Ok(RelaxKin {
                r: r.clone(),
                k: k.clone(),
            })
        }
        RelaxSpec::Phenomenological(rates) => {
            if rates.len() != sys.spins.len() {
                return Err(Error::DimensionMismatch {
                    context: "relaxation times per spin",
                    expected: sys.spins.len(),
                    found: rates.len(),
                });
            }
            for &(t1, t2) in rates {
                if !(t1 > 0.0) || !(t2 > 0.0) {
                    return Err(invalid("relaxation times must be positive"));
                }
            }
            Ok(RelaxKin {
                r: phenomenological(sys, rates)?,
                k: CSparse::zeros(dim, dim),
            })
        }
    }
}

/// Per spin: coherences decay at `1/T2`, populations relax at `1/T1`
/// towards the level average, which keeps the trace and annihilates the
/// identity.
fn phenomenological(sys: &SpinSystem, rates: &[(f64, f64)]) -> Result<CSparse> {
    let dims = sys.dims();
    let n = sys.hilbert_dim();
    // Stride of each spin in the product index.
    let mut strides = alloc::vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let level = |state: usize, k: usize| (state / strides[k]) % dims[k];
    let mut trips = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let col = i * n + j;
            for (k, &(t1, t2)) in rates.iter().enumerate() {
                let (li, lj) = (level(i, k), level(j, k));
                if li != lj {
                    if t2.is_finite() {
                        trips.push((col, col, C64::new(-1.0 / t2, 0.0)));
                    }
                } else if t1.is_finite() {
                    let d = dims[k] as f64;
                    for a in 0..dims[k] {
                        let i2 = i - li * strides[k] + a * strides[k];
                        let j2 = j - lj * strides[k] + a * strides[k];
                        let delta = if a == li { 1.0 } else { 0.0 };
                        trips.push((i2 * n + j2, col, C64::new(-(delta - 1.0 / d) / t1, 0.0)));
                    }
                }
            }
        }
    }
    CSparse::from_triplets(n * n, n * n, trips)
}
