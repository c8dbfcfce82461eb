//! Fokker-Planck magnetic resonance kernel.
//!
//! Spatial degrees of freedom (rotor phases, RF/microwave phases, sample
//! coordinates) are discretised on grids and combined with the spin Liouville
//! space through Kronecker products. The resulting evolution generators are
//! time-independent sparse matrices, so spinning, diffusion, flow and
//! phase-cycled irradiation are propagated with a single matrix-exponential
//! action and detected either in the time domain or directly in the frequency
//! domain through shifted linear solves.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, experiment
//! runners and the command line front end live in the `fpmr` crate.
//!
//! Layout of the state vector: spatial factors come first in the Kronecker
//! product (periodic phases, then coordinates) and the spin Liouville space is
//! the last, fastest-varying factor. Liouville vectors use row-major
//! vectorisation, `vec(rho)[i * n + j] = rho[i][j]`.

// `!(x > 0.0)` rejects NaN on purpose; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod assembly;
pub mod error;
pub mod math;
pub mod propagation;
pub mod sparse;
pub mod spatial;
pub mod spin;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use sparse::{CDense, CSparse, CVector, SparseConfig};
