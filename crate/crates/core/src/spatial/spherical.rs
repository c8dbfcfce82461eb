use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::invalid;
use crate::spin::Rotation;
use crate::{math, Result};

/// Crystal rotation for grid angles `(alpha, beta, gamma)`.
///
/// The angles give the lab frame as seen from the molecule, so the rotation
/// applied to the interaction tensors is the inverse of `R(alpha, beta, gamma)`.
/// Static lineshapes then depend on `(alpha, beta)` only, and a rotor phase
/// applied afterwards shifts `gamma`, which is why two-angle grids suffice
/// when the rotor phase is averaged.
pub fn crystal_rotation(angles: (f64, f64, f64)) -> Rotation {
    Rotation::euler(angles.0, angles.1, angles.2).inverse()
}

/// Orientation grid for powder averaging.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalGrid {
    /// Euler triples `(alpha, beta, gamma)`, rad.
    pub orientations: Vec<(f64, f64, f64)>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SphericalScheme {
    /// Golden-ratio spiral over `(alpha, beta)` with `gamma = 0`.
    TwoAngleSpiral,
    /// Externally generated orientations and (unnormalised) weights.
    UserList {
        orientations: Vec<(f64, f64, f64)>,
        weights: Vec<f64>,
    },
}

pub fn spherical_grid(scheme: &SphericalScheme, n_points: usize) -> Result<SphericalGrid> {
    match scheme {
        SphericalScheme::TwoAngleSpiral => {
            if n_points == 0 {
                return Err(invalid("spherical grid needs at least one point"));
            }
            if n_points == 1 {
                return Ok(SphericalGrid {
                    orientations: alloc::vec![(0.0, 0.0, 0.0)],
                    weights: alloc::vec![1.0],
                });
            }
            let golden = (1.0 + math::sqrt(5.0)) / 2.0;
            let orientations = (0..n_points)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / n_points as f64;
                    let alpha = math::wrap_angle(2.0 * PI * k as f64 / golden);
                    (alpha, math::acos(z), 0.0)
                })
                .collect();
            let w = 1.0 / n_points as f64;
            Ok(SphericalGrid {
                orientations,
                weights: alloc::vec![w; n_points],
            })
        }
        SphericalScheme::UserList {
            orientations,
            weights,
        } => {
            if orientations.is_empty() || orientations.len() != weights.len() {
                return Err(invalid("orientation and weight lists must be non-empty and equally long"));
            }
            if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
                return Err(invalid("spherical grid weights must be positive"));
            }
            let total: f64 = weights.iter().sum();
            Ok(SphericalGrid {
                orientations: orientations.clone(),
                weights: weights.iter().map(|w| w / total).collect(),
            })
        }
    }
}

impl SphericalGrid {
    pub fn rotations(&self) -> Vec<Rotation> {
        self.orientations.iter().map(|&o| crystal_rotation(o)).collect()
    }

    pub fn len(&self) -> usize {
        self.orientations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orientations.is_empty()
    }
}
