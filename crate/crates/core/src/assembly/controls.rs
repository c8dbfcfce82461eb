use alloc::vec::Vec;

use super::layout::{lift, FPLayout, FactorKind};
use crate::error::invalid;
use crate::math;
use crate::sparse::CSparse;
use crate::spatial::{fourier_diff, PhaseGrid};
use crate::spin::{comm_superop, OpKind, SpinSystem};
use crate::{Error, Result, C64};

/// Commutation superoperators of the Cartesian spin operators driven by one
/// RF or microwave channel.
#[derive(Debug, Clone, PartialEq)]
pub struct RfOperators {
    pub sx: CSparse,
    pub sy: CSparse,
    pub sz: CSparse,
}

impl RfOperators {
    /// All spins carrying `label` (e.g. "1H", or "E" for every electron).
    pub fn for_label(sys: &SpinSystem, label: &str) -> Result<Self> {
        Ok(Self {
            sx: comm_superop(&sys.total_op(label, OpKind::X)?)?,
            sy: comm_superop(&sys.total_op(label, OpKind::Y)?)?,
            sz: comm_superop(&sys.total_op(label, OpKind::Z)?)?,
        })
    }

    pub fn for_spin(sys: &SpinSystem, n: usize) -> Result<Self> {
        Ok(Self {
            sx: comm_superop(&sys.op(n, OpKind::X)?)?,
            sy: comm_superop(&sys.op(n, OpKind::Y)?)?,
            sz: comm_superop(&sys.op(n, OpKind::Z)?)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.sx.nrows()
    }

    /// `cos(phi) S_X + sin(phi) S_Y`.
    pub fn transverse(&self, phi: f64) -> Result<CSparse> {
        self.sx
            .scale_real(math::cos(phi))
            .add(&self.sy.scale_real(math::sin(phi)))
    }
}

/// Commutation superoperator of `sum_n gamma_n S_Z^(n)`.
pub fn gradient_superop(sys: &SpinSystem) -> Result<CSparse> {
    let n = sys.hilbert_dim();
    let mut h = CSparse::zeros(n, n);
    for (k, s) in sys.spins.iter().enumerate() {
        h = h.add_scaled(&sys.op(k, OpKind::Z)?, C64::new(s.gamma, 0.0))?;
    }
    comm_superop(&h)
}

/// `cos(Phi + phi0) (x) S_X + sin(Phi + phi0) (x) S_Y` on the named phase slot.
pub(crate) fn phase_modulated(layout: &FPLayout, slot: &str, rf: &RfOperators, phi0: f64) -> Result<CSparse> {
    let f = layout.factor(slot)?;
    let grid = PhaseGrid::new(f.dim)?;
    let cos: Vec<f64> = grid.points().iter().map(|p| math::cos(p + phi0)).collect();
    let sin: Vec<f64> = grid.points().iter().map(|p| math::sin(p + phi0)).collect();
    let sx = lift(&rf.sx, layout, "spin")?;
    let sy = lift(&rf.sy, layout, "spin")?;
    let a = lift(&CSparse::from_real_diag(&cos), layout, slot)?.matmul(&sx)?;
    let b = lift(&CSparse::from_real_diag(&sin), layout, slot)?.matmul(&sy)?;
    Ok(a.add(&b)?.pruned(0.0))
}

/// Amplitude and frequency control operators for each `(phase slot, spin
/// operators)` channel. Both are Hamiltonian-side superoperators: the
/// amplitude operator enters a generator as `-i a(t) A`, the frequency
/// operator as `+omega(t) D`.
pub fn build_fa_controls(layout: &FPLayout, channels: &[(&str, &RfOperators)]) -> Result<Vec<(CSparse, CSparse)>> {
    let mut out = Vec::with_capacity(channels.len());
    for (i, (slot, rf)) in channels.iter().enumerate() {
        let f = layout.factor(slot)?;
        if f.kind != FactorKind::Phase {
            return Err(invalid(alloc::format!("control slot `{slot}` is not a phase factor")));
        }
        if channels[..i].iter().any(|(s, _)| s == slot) {
            return Err(invalid(alloc::format!("phase slot `{slot}` is used by two control channels")));
        }
        if rf.dim() != layout.spin_dim() {
            return Err(Error::DimensionMismatch {
                context: "control channel spin operators",
                expected: layout.spin_dim(),
                found: rf.dim(),
            });
        }
        let amp = phase_modulated(layout, slot, rf, 0.0)?;
        let d = if f.dim > 1 {
            fourier_diff(f.dim)?
        } else {
            CSparse::zeros(1, 1)
        };
        out.push((amp, lift(&d, layout, slot)?));
    }
    Ok(out)
}
