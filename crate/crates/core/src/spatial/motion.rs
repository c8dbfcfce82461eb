use alloc::vec::Vec;

use super::diff::{fd_matrix, fourier_diff, DEFAULT_STENCIL};
use super::grids::{CoordinateGrid, PhaseGrid};
use crate::error::invalid;
use crate::sparse::CSparse;
use crate::{Error, Result, C64};

/// Classical motion along a coordinate grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Motion {
    /// Uniform flow velocity, m/s.
    Flow(f64),
    /// Translational diffusion coefficient, m^2/s.
    Diffusion(f64),
    /// Stationary velocity samples at the grid points, m/s.
    VelocityField(Vec<f64>),
}

/// Spatial generator with the default 5-point stencil (capped at the grid
/// size).
pub fn motion_generator(grid: &CoordinateGrid, kind: &Motion) -> Result<CSparse> {
    let stencil = DEFAULT_STENCIL.min(grid.len());
    match kind {
        Motion::Flow(v) => Ok(fd_matrix(grid, 1, stencil)?.scale_real(*v)),
        Motion::Diffusion(d) => {
            if !(*d >= 0.0) {
                return Err(invalid("diffusion coefficient must be non-negative"));
            }
            Ok(fd_matrix(grid, 2, stencil)?.scale_real(*d))
        }
        Motion::VelocityField(v) => {
            if v.len() != grid.len() {
                return Err(Error::DimensionMismatch {
                    context: "velocity field samples",
                    expected: grid.len(),
                    found: v.len(),
                });
            }
            let d1 = fd_matrix(grid, 1, stencil)?;
            let vc: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
            let div = d1.matvec(&vc);
            let advect = CSparse::from_diag(&vc).matmul(&d1)?;
            CSparse::from_diag(&div).add(&advect).map(|m| m.pruned(0.0))
        }
    }
}

/// Phase-increment generator `omega * D_phi`.
pub fn rotor_generator(grid: &PhaseGrid, omega: f64) -> Result<CSparse> {
    if grid.len() == 1 || omega == 0.0 {
        return Ok(CSparse::zeros(grid.len(), grid.len()));
    }
    Ok(fourier_diff(grid.len())?.scale_real(omega))
}
