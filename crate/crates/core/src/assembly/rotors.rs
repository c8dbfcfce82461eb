//! Sample spinning: single rotor, double rotor and overtone cross-polarisation.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::controls::RfOperators;
use super::layout::{lift, FPLayout, Factor};
use super::{check_rk, spin_block, too_small, Generator};
use crate::error::invalid;
use crate::math;
use crate::sparse::CSparse;
use crate::spatial::{rotor_generator, PhaseGrid};
use crate::spin::{wigner_d2, IrreducibleComponents, RelaxKin, Rotation, SpinSystem, Wigner2};
use crate::{Result, C64};

/// Rotor axis used by the overtone assembler, `[sqrt(2/3), 0, sqrt(1/3)]`.
pub const R_MAS: [f64; 3] = [0.816_496_580_927_726, 0.0, 0.577_350_269_189_625_8];

/// `cos(theta)` at the magic angle.
pub const MAGIC_COS: f64 = 0.577_350_269_189_625_8;

fn z_wigner(phi: f64) -> Wigner2 {
    wigner_d2(&Rotation::about_z(phi))
}

fn rf_channels(layout: &FPLayout, rf: Option<&RfOperators>) -> Result<Vec<(String, CSparse)>> {
    let Some(rf) = rf else {
        return Ok(Vec::new());
    };
    let mi = C64::new(0.0, -1.0);
    Ok(vec![
        ("rf_amplitude_x".into(), lift(&rf.sx, layout, "spin")?.scale(mi)),
        ("rf_amplitude_y".into(), lift(&rf.sy, layout, "spin")?.scale(mi)),
    ])
}

/// Magic-angle (or any-angle) spinning generator on one rotor phase grid.
///
/// Block `j` holds `-i L(phi_j) + R + K` with the interaction tensors rotated
/// by the crystal orientation, then about z by `phi_j`, then onto the rotor
/// axis. The rotor term `rate * D_phi` advances the phase of each block.
/// Optional RF operators become the `rf_amplitude_x/y` channels, identical in
/// every block.
pub fn assemble_singlerot(
    ic: &IrreducibleComponents,
    axis: &Rotation,
    rate: f64,
    grid: &PhaseGrid,
    orientation: &Rotation,
    rk: &RelaxKin,
    rf: Option<&RfOperators>,
) -> Result<Generator> {
    if grid.len() < 3 {
        return Err(too_small("rotor phase grid", grid.len()));
    }
    let ns = ic.dim();
    let rkm = check_rk(ns, rk)?;
    let layout = FPLayout::new(vec![Factor::phase("rotor", grid.len()), Factor::spin(ns)])?;
    let d_crystal = wigner_d2(orientation);
    let d_axis = wigner_d2(axis);
    let blocks = grid
        .points()
        .iter()
        .map(|&phi| spin_block(&ic.at(&d_axis.mul(&z_wigner(phi)).mul(&d_crystal))?, &rkm))
        .collect::<Result<Vec<_>>>()?;
    let constant = CSparse::block_diag(&blocks).add(&lift(&rotor_generator(grid, rate)?, &layout, "rotor")?)?;
    let channels = rf_channels(&layout, rf)?;
    Generator::new(constant.pruned(0.0), channels, layout)
}

/// Double rotation: an inner rotor (`n1`, `rate1`) inside an outer rotor
/// (`n0`, `rate0`). Blocks run over the outer phase with the inner phase
/// varying fastest. A grid below 3 points is accepted only for a rotor with
/// zero rate.
#[allow(clippy::too_many_arguments)]
pub fn assemble_doublerot(
    ic: &IrreducibleComponents,
    n0: &Rotation,
    n1: &Rotation,
    rate0: f64,
    rate1: f64,
    grid0: &PhaseGrid,
    grid1: &PhaseGrid,
    orientation: &Rotation,
    rk: &RelaxKin,
) -> Result<Generator> {
    for (g, rate, what) in [(grid0, rate0, "outer rotor phase grid"), (grid1, rate1, "inner rotor phase grid")] {
        if g.len() < 3 && rate != 0.0 {
            return Err(too_small(what, g.len()));
        }
    }
    let ns = ic.dim();
    let rkm = check_rk(ns, rk)?;
    let layout = FPLayout::new(vec![
        Factor::phase("outer", grid0.len()),
        Factor::phase("inner", grid1.len()),
        Factor::spin(ns),
    ])?;
    let d_crystal = wigner_d2(orientation);
    let d_n0 = wigner_d2(n0);
    let d_n1 = wigner_d2(n1);
    let inner: Vec<Wigner2> = grid1
        .points()
        .iter()
        .map(|&p| d_n1.mul(&z_wigner(p)).mul(&d_crystal))
        .collect();
    let mut blocks = Vec::with_capacity(grid0.len() * grid1.len());
    for &p0 in &grid0.points() {
        let outer = d_n0.mul(&z_wigner(p0));
        for d in &inner {
            blocks.push(spin_block(&ic.at(&outer.mul(d))?, &rkm)?);
        }
    }
    let d0 = lift(&rotor_generator(grid0, rate0)?, &layout, "outer")?;
    let d1 = lift(&rotor_generator(grid1, rate1)?, &layout, "inner")?;
    let constant = CSparse::block_diag(&blocks).add(&d0)?.add(&d1)?;
    Generator::new(constant.pruned(0.0), Vec::new(), layout)
}

/// Spinning parameters for the overtone assembler.
#[derive(Debug, Clone, PartialEq)]
pub struct MasSpec {
    /// Rotor axis in the lab frame; normalised internally.
    pub axis: [f64; 3],
    /// Rotor phase advance rate, rad/s.
    pub rate: f64,
    pub grid: PhaseGrid,
}

/// Cross-polarisation irradiation for the overtone assembler.
#[derive(Debug, Clone, PartialEq)]
pub struct OvertoneRf {
    /// Operators of the quadrupolar (overtone) nucleus.
    pub nucleus: RfOperators,
    /// Overtone channel amplitude, rad/s.
    pub amplitude: f64,
    /// Overtone carrier frequency, rad/s. The RF phase advances as
    /// `phi(t) = phi_j + frequency * t`.
    pub frequency: f64,
    pub grid: PhaseGrid,
    /// Operators of the polarisation source, with its amplitude in rad/s.
    /// The source channel has a fixed phase.
    pub source: Option<(RfOperators, f64)>,
}

impl OvertoneRf {
    /// Checks that spin `nucleus` carries a quadrupolar tensor and collects
    /// its operators (and those of the spins labelled `source_label`).
    pub fn new(
        sys: &SpinSystem,
        nucleus: usize,
        amplitude: f64,
        frequency: f64,
        grid: PhaseGrid,
        source: Option<(&str, f64)>,
    ) -> Result<Self> {
        if sys.quadrupolar.get(nucleus).is_none_or(|q| q.is_none()) {
            return Err(invalid(alloc::format!(
                "overtone nucleus {nucleus} has no quadrupolar tensor"
            )));
        }
        let source = match source {
            Some((label, a)) => Some((RfOperators::for_label(sys, label)?, a)),
            None => None,
        };
        Ok(Self {
            nucleus: RfOperators::for_spin(sys, nucleus)?,
            amplitude,
            frequency,
            grid,
            source,
        })
    }
}

/// Overtone MAS generator. The rotor orientation at phase `phi` is the
/// rotation by `phi` about `mas.axis`, applied after the crystal orientation.
///
/// With `rf` present the layout is `rotor x rf x spin` and each block carries
/// `a_N [S_Z cos(theta) + (S_X cos(phi_rf) + S_Y sin(phi_rf)) sin(theta)]`
/// plus the fixed-phase source term `a_H [S_Z cos(theta) + S_X sin(theta)]`,
/// theta being the magic angle. Without `rf` this is the free-evolution
/// generator on the rotor grid alone. Neither form has channels.
pub fn assemble_overtone(
    ic: &IrreducibleComponents,
    mas: &MasSpec,
    orientation: &Rotation,
    rf: Option<&OvertoneRf>,
    rk: &RelaxKin,
) -> Result<Generator> {
    if mas.grid.len() < 3 {
        return Err(too_small("rotor phase grid", mas.grid.len()));
    }
    let ns = ic.dim();
    let rkm = check_rk(ns, rk)?;
    let d_crystal = wigner_d2(orientation);
    let rotor_h = mas
        .grid
        .points()
        .iter()
        .map(|&phi| ic.at(&wigner_d2(&Rotation::angle_axis(mas.axis, phi)?).mul(&d_crystal)))
        .collect::<Result<Vec<_>>>()?;
    let Some(rf) = rf else {
        let layout = FPLayout::new(vec![Factor::phase("rotor", mas.grid.len()), Factor::spin(ns)])?;
        let blocks = rotor_h.iter().map(|h| spin_block(h, &rkm)).collect::<Result<Vec<_>>>()?;
        let constant =
            CSparse::block_diag(&blocks).add(&lift(&rotor_generator(&mas.grid, mas.rate)?, &layout, "rotor")?)?;
        return Generator::new(constant.pruned(0.0), Vec::new(), layout);
    };
    if rf.grid.len() < 3 {
        return Err(too_small("RF phase grid", rf.grid.len()));
    }
    if rf.nucleus.dim() != ns {
        return Err(crate::Error::DimensionMismatch {
            context: "overtone RF operators",
            expected: ns,
            found: rf.nucleus.dim(),
        });
    }
    let layout = FPLayout::new(vec![
        Factor::phase("rotor", mas.grid.len()),
        Factor::phase("rf", rf.grid.len()),
        Factor::spin(ns),
    ])?;
    let (c, s) = (MAGIC_COS, math::sqrt(1.0 - MAGIC_COS * MAGIC_COS));
    let mut fixed = rf.nucleus.sz.scale_real(rf.amplitude * c);
    if let Some((src, a)) = &rf.source {
        fixed = fixed
            .add(&src.sz.scale_real(a * c))?
            .add(&src.sx.scale_real(a * s))?;
    }
    let rf_terms = rf
        .grid
        .points()
        .iter()
        .map(|&p| fixed.add(&rf.nucleus.transverse(p)?.scale_real(rf.amplitude * s)))
        .collect::<Result<Vec<_>>>()?;
    let mut blocks = Vec::with_capacity(rotor_h.len() * rf_terms.len());
    for h in &rotor_h {
        for t in &rf_terms {
            blocks.push(spin_block(&h.add(t)?, &rkm)?);
        }
    }
    let constant = CSparse::block_diag(&blocks)
        .add(&lift(&rotor_generator(&mas.grid, mas.rate)?, &layout, "rotor")?)?
        .add(&lift(&rotor_generator(&rf.grid, -rf.frequency)?, &layout, "rf")?)?;
    Generator::new(constant.pruned(0.0), Vec::new(), layout)
}
