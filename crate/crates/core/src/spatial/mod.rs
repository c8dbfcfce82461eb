//! Grids and matrix representations of classical spatial dynamics.
//!
//! Generators carry the sign with which they enter `d rho/dt = [... + M] rho`:
//! `omega * D_phi` shifts a phase distribution as `f(phi) -> f(phi + omega t)`,
//! and the flow term `v * D_z` likewise translates a profile towards lower `z`.

mod diff;
mod grids;
mod motion;
mod spherical;

pub use diff::{fd_matrix, fornberg_weights, fourier_diff, DEFAULT_STENCIL};
pub use grids::{Boundary, CoordinateGrid, PhaseGrid};
pub use motion::{motion_generator, rotor_generator, Motion};
pub use spherical::{crystal_rotation, spherical_grid, SphericalGrid, SphericalScheme};
