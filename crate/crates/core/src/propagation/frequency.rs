use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::assembly::{FPLayout, FPState, Generator};
use crate::error::invalid;
use crate::sparse::{dot, shifted_solve_with, CSparse, CVector, SolveStrategy, SparseConfig};
use crate::spatial::SphericalGrid;
use crate::{Error, Result, C64};

/// Complex spectrum on an angular-frequency axis (rad/s); `hz()` divides by
/// `2 pi`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    pub values: Vec<C64>,
}

impl Spectrum {
    pub const HZ_PER_RAD_S: f64 = 1.0 / (2.0 * PI);

    pub fn new(omega: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        if omega.len() != values.len() {
            return Err(Error::DimensionMismatch {
                context: "spectrum axis",
                expected: omega.len(),
                found: values.len(),
            });
        }
        if omega.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("spectrum axis must be strictly increasing"));
        }
        Ok(Self { omega, values })
    }

    pub fn hz(&self) -> Vec<f64> {
        self.omega.iter().map(|w| w * Self::HZ_PER_RAD_S).collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Coil replicated over the spatial blocks, the adjoint of spatial
/// averaging. `quadrature` optionally weights each block (e.g. cell widths
/// of a non-uniform coordinate grid); the default is 1 everywhere.
pub fn lift_coil(coil: &[C64], layout: &FPLayout, quadrature: Option<&[f64]>) -> Result<CVector> {
    let s = layout.spin_dim();
    if coil.len() != s {
        return Err(Error::DimensionMismatch {
            context: "coil vector",
            expected: s,
            found: coil.len(),
        });
    }
    let nb = layout.spatial_dim();
    let w = match quadrature {
        Some(q) if q.len() != nb => {
            return Err(Error::DimensionMismatch {
                context: "coil quadrature weights",
                expected: nb,
                found: q.len(),
            })
        }
        Some(q) => q.to_vec(),
        None => vec![1.0; nb],
    };
    let mut v = Vec::with_capacity(layout.total_dim());
    for wj in w {
        v.extend(coil.iter().map(|c| c * wj));
    }
    CVector::new(v)
}

/// `-i <lifted, (F + omega)^-1 rho>` with `F = i G`.
pub fn resolvent_at(
    f: &CSparse,
    omega: f64,
    rho: &[C64],
    lifted: &[C64],
    cfg: &SparseConfig,
    strategy: SolveStrategy,
) -> Result<C64> {
    let x = shifted_solve_with(f, omega, rho, cfg, strategy)?;
    Ok(C64::new(0.0, -1.0) * dot(lifted, &x))
}

pub fn detect_fd(gen: &Generator, state: &FPState, coil: &[C64], omegas: &[f64]) -> Result<Spectrum> {
    detect_fd_with(gen, state, coil, omegas, None, &SparseConfig::default(), SolveStrategy::Auto)
}

/// Frequency-domain detection `f(omega) = -i <coil|(F + omega)^-1|rho>`.
/// A signal `exp(-i w0 t)` produces a line at `omega = -w0`. The generator
/// must be strictly damping; an undamped shift fails as singular.
pub fn detect_fd_with(
    gen: &Generator,
    state: &FPState,
    coil: &[C64],
    omegas: &[f64],
    quadrature: Option<&[f64]>,
    cfg: &SparseConfig,
    strategy: SolveStrategy,
) -> Result<Spectrum> {
    if !gen.is_time_independent() {
        return Err(invalid("frequency-domain detection needs a generator without channels"));
    }
    if state.layout != gen.layout {
        return Err(Error::DimensionMismatch {
            context: "state layout versus generator layout",
            expected: gen.dim(),
            found: state.vector.dim(),
        });
    }
    let lifted = lift_coil(coil, &gen.layout, quadrature)?;
    let f = gen.constant.scale(C64::new(0.0, 1.0));
    let values = omegas
        .iter()
        .map(|&w| resolvent_at(&f, w, &state.vector, &lifted, cfg, strategy))
        .collect::<Result<Vec<_>>>()?;
    Spectrum::new(omegas.to_vec(), values)
}

/// Weighted sum of spectra sharing one axis.
pub fn weighted_sum(spectra: &[Spectrum], weights: &[f64]) -> Result<Spectrum> {
    if spectra.len() != weights.len() || spectra.is_empty() {
        return Err(invalid("need one weight per spectrum and at least one spectrum"));
    }
    let axis = &spectra[0].omega;
    let mut values = vec![C64::new(0.0, 0.0); axis.len()];
    for (s, &w) in spectra.iter().zip(weights) {
        if &s.omega != axis {
            return Err(invalid("spectra on different axes cannot be averaged"));
        }
        for (o, v) in values.iter_mut().zip(&s.values) {
            *o += v * w;
        }
    }
    Spectrum::new(axis.clone(), values)
}

/// Runs `runner` at every grid orientation `(alpha, beta, gamma)` and
/// returns the weighted average.
pub fn powder_average<F>(mut runner: F, grid: &SphericalGrid) -> Result<Spectrum>
where
    F: FnMut((f64, f64, f64)) -> Result<Spectrum>,
{
    let spectra = grid
        .orientations
        .iter()
        .map(|&o| runner(o))
        .collect::<Result<Vec<_>>>()?;
    weighted_sum(&spectra, &grid.weights)
}
