//! Coordinate-space motion and phase-grid irradiation.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::controls::{phase_modulated, RfOperators};
use super::layout::{lift, FPLayout, Factor};
use super::{check_rk, spin_block, too_small, Generator};
use crate::sparse::CSparse;
use crate::spatial::{motion_generator, rotor_generator, CoordinateGrid, Motion, PhaseGrid};
use crate::spin::{wigner_d2, IrreducibleComponents, RelaxKin, Rotation};
use crate::{Error, Result, C64};

/// Flow along the coordinate grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Velocity {
    /// Uniform velocity, m/s.
    Uniform(f64),
    /// Stationary velocity samples at the grid points, m/s.
    Field(Vec<f64>),
}

/// Gradient, diffusion and flow on a coordinate grid, optionally with an RF
/// phase grid.
///
/// The constant part is `1 (x) (-i H0 + R + K) + D_T D_z^2 + v D_z`, with `H0`
/// the spin Hamiltonian at `orientation`. Channels, registered only when the
/// corresponding operators are supplied:
/// - `rf_amplitude_x`, `rf_amplitude_y`: `-i [cos(phi_n + p) S_X + sin(phi_n + p) S_Y]`
///   with `p = 0` and `p = pi/2`, so an amplitude `a` at initial phase `phi0`
///   is driven by coefficients `a cos(phi0)` and `a sin(phi0)`. Without a
///   phase grid these are plain `-i S_X` and `-i S_Y`.
/// - `rf_frequency`: `D_phi` on the phase slot (coefficient `omega(t)`).
/// - `gradient`: `-i Z (x) sum_n gamma_n S_Z^(n)` (coefficient `g_z(t)` in T/m).
#[allow(clippy::too_many_arguments)]
pub fn assemble_spatiotemporal(
    ic: &IrreducibleComponents,
    orientation: &Rotation,
    zgrid: &CoordinateGrid,
    phase_grid: Option<&PhaseGrid>,
    diffusion: f64,
    velocity: &Velocity,
    rk: &RelaxKin,
    rf: Option<&RfOperators>,
    gradient: Option<&CSparse>,
) -> Result<Generator> {
    let ns = ic.dim();
    let rkm = check_rk(ns, rk)?;
    let mut factors = Vec::new();
    if let Some(g) = phase_grid {
        if g.len() < 3 {
            return Err(too_small("RF phase grid", g.len()));
        }
        factors.push(Factor::phase("rf_phase", g.len()));
    }
    factors.push(Factor::coordinate("z", zgrid.len()));
    factors.push(Factor::spin(ns));
    let layout = FPLayout::new(factors)?;

    let block = spin_block(&ic.at(&wigner_d2(orientation))?, &rkm)?;
    let mut constant = CSparse::kron(&CSparse::identity(layout.spatial_dim()), &block)?;
    if diffusion != 0.0 {
        constant = constant.add(&lift(&motion_generator(zgrid, &Motion::Diffusion(diffusion))?, &layout, "z")?)?;
    }
    let flow = match velocity {
        Velocity::Uniform(v) if *v == 0.0 => None,
        Velocity::Uniform(v) => Some(motion_generator(zgrid, &Motion::Flow(*v))?),
        Velocity::Field(f) => Some(motion_generator(zgrid, &Motion::VelocityField(f.clone()))?),
    };
    if let Some(f) = flow {
        constant = constant.add(&lift(&f, &layout, "z")?)?;
    }

    let mi = C64::new(0.0, -1.0);
    let mut channels: Vec<(String, CSparse)> = Vec::new();
    if let Some(rf) = rf {
        check_dim(rf.dim(), ns, "RF operators")?;
        match phase_grid {
            Some(g) => {
                let x = phase_modulated(&layout, "rf_phase", rf, 0.0)?;
                let y = phase_modulated(&layout, "rf_phase", rf, core::f64::consts::FRAC_PI_2)?;
                channels.push(("rf_amplitude_x".into(), x.scale(mi)));
                channels.push(("rf_amplitude_y".into(), y.scale(mi)));
                channels.push(("rf_frequency".into(), lift(&rotor_generator(g, 1.0)?, &layout, "rf_phase")?));
            }
            None => {
                channels.push(("rf_amplitude_x".into(), lift(&rf.sx, &layout, "spin")?.scale(mi)));
                channels.push(("rf_amplitude_y".into(), lift(&rf.sy, &layout, "spin")?.scale(mi)));
            }
        }
    }
    if let Some(gz) = gradient {
        check_dim(gz.nrows(), ns, "gradient operator")?;
        let z = lift(&CSparse::from_real_diag(zgrid.points()), &layout, "z")?;
        let g = z.matmul(&lift(gz, &layout, "spin")?)?;
        channels.push(("gradient".into(), g.scale(mi).pruned(0.0)));
    }
    Generator::new(constant.pruned(0.0), channels, layout)
}

fn check_dim(found: usize, expected: usize, context: &'static str) -> Result<()> {
    if found != expected {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}

/// One soft microwave pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwPulse {
    /// Nutation amplitude, rad/s.
    pub amplitude: f64,
    /// Carrier minus the rotating-frame reference, rad/s.
    pub offset: f64,
    /// Initial phase, rad.
    pub phase: f64,
}

/// Soft-pulse generator on a microwave phase grid, time-independent.
///
/// Block `n` holds `-i (H0 + a [S_X cos(phi_n + phi0) + S_Y sin(phi_n + phi0)]) + R + K`.
/// The pulse phase must advance as `phi0 + offset * t`; since
/// `exp(w D t) f(phi) = f(phi + w t)` moves grid populations towards lower
/// phase, the phase-increment term is `-offset * D_phi`.
pub fn assemble_deer(
    ic: &IrreducibleComponents,
    orientation: &Rotation,
    pulse: &MwPulse,
    grid: &PhaseGrid,
    rk: &RelaxKin,
    rf: &RfOperators,
) -> Result<Generator> {
    if grid.len() < 3 {
        return Err(too_small("microwave phase grid", grid.len()));
    }
    let ns = ic.dim();
    check_dim(rf.dim(), ns, "microwave operators")?;
    let rkm = check_rk(ns, rk)?;
    let layout = FPLayout::new(vec![Factor::phase("mw", grid.len()), Factor::spin(ns)])?;
    let h0 = ic.at(&wigner_d2(orientation))?;
    let blocks = grid
        .points()
        .iter()
        .map(|&p| {
            let h = h0.add(&rf.transverse(p + pulse.phase)?.scale_real(pulse.amplitude))?;
            spin_block(&h, &rkm)
        })
        .collect::<Result<Vec<_>>>()?;
    let constant = CSparse::block_diag(&blocks).add(&lift(&rotor_generator(grid, -pulse.offset)?, &layout, "mw")?)?;
    Generator::new(constant.pruned(0.0), Vec::new(), layout)
}
