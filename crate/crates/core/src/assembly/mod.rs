//! Fokker-Planck generators on the joint spatial x spin space.
//!
//! A [`Generator`] stores `G = -iF` so that `rho(t) = exp(G t) rho(0)`:
//! spin parts enter as `-i H + R + K`, spatial parts (phase increments,
//! diffusion, flow) enter with a plus sign. Time-dependent experiments add
//! scalar multiples of fixed channel matrices, frozen per [`Waveform`] slice.

mod controls;
mod layout;
mod rotors;
mod transport;

use alloc::string::String;
use alloc::vec::Vec;

pub use controls::{build_fa_controls, gradient_superop, RfOperators};
pub use layout::{lift, Factor, FactorKind, FPLayout, MAX_TOTAL_DIM};
pub use rotors::{
    assemble_doublerot, assemble_overtone, assemble_singlerot, MasSpec, OvertoneRf, MAGIC_COS, R_MAS,
};
pub use transport::{assemble_deer, assemble_spatiotemporal, MwPulse, Velocity};

use crate::error::invalid;
use crate::sparse::{CSparse, CVector};
use crate::{Error, Result, C64};

/// Time-independent part plus labelled channels, all on `layout.total_dim()`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub constant: CSparse,
    pub channels: Vec<(String, CSparse)>,
    pub layout: FPLayout,
}

impl Generator {
    pub fn new(constant: CSparse, channels: Vec<(String, CSparse)>, layout: FPLayout) -> Result<Self> {
        let n = layout.total_dim();
        let check = |m: &CSparse| {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch {
                    context: "generator matrix",
                    expected: n,
                    found: m.nrows(),
                });
            }
            Ok(())
        };
        check(&constant)?;
        for (_, m) in &channels {
            check(m)?;
        }
        for (i, (a, _)) in channels.iter().enumerate() {
            if channels[..i].iter().any(|(b, _)| b == a) {
                return Err(invalid(alloc::format!("duplicate channel `{a}`")));
            }
        }
        Ok(Self {
            constant,
            channels,
            layout,
        })
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    pub fn is_time_independent(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn channel(&self, label: &str) -> Result<&CSparse> {
        self.channels
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, m)| m)
            .ok_or_else(|| Error::UnknownChannel(label.into()))
    }

    /// `constant + sum_j c_j G_j`; unknown labels are an error.
    pub fn frozen(&self, coefficients: &[(String, f64)]) -> Result<CSparse> {
        let mut g = self.constant.clone();
        for (label, c) in coefficients {
            let m = self.channel(label)?;
            if *c != 0.0 {
                g = g.add_scaled(m, C64::new(*c, 0.0))?;
            }
        }
        Ok(g)
    }

    /// Drops all channels, e.g. after a pulse when only free evolution remains.
    pub fn without_channels(&self) -> Self {
        Self {
            constant: self.constant.clone(),
            channels: Vec::new(),
            layout: self.layout.clone(),
        }
    }
}

/// One piecewise-constant interval of a waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    /// Seconds.
    pub duration: f64,
    pub coefficients: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Waveform {
    pub slices: Vec<Slice>,
}

impl Waveform {
    pub fn new(slices: Vec<Slice>) -> Result<Self> {
        for s in &slices {
            check_duration(s.duration)?;
        }
        Ok(Self { slices })
    }

    pub fn push(&mut self, duration: f64, coefficients: Vec<(String, f64)>) -> Result<()> {
        check_duration(duration)?;
        self.slices.push(Slice {
            duration,
            coefficients,
        });
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.slices.iter().map(|s| s.duration).sum()
    }
}

fn check_duration(d: f64) -> Result<()> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(invalid(alloc::format!("slice duration must be positive, got {d}")));
    }
    Ok(())
}

/// Stacked spatial-block state.
#[derive(Debug, Clone, PartialEq)]
pub struct FPState {
    pub vector: CVector,
    pub layout: FPLayout,
}

impl FPState {
    pub fn new(vector: CVector, layout: FPLayout) -> Result<Self> {
        if vector.dim() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                context: "Fokker-Planck state",
                expected: layout.total_dim(),
                found: vector.dim(),
            });
        }
        Ok(Self { vector, layout })
    }

    /// Spin-space vector stored in spatial block `j`.
    pub fn block(&self, j: usize) -> &[C64] {
        let s = self.layout.spin_dim();
        &self.vector[j * s..(j + 1) * s]
    }
}

/// Spin-space block `-iH + R + K` at one grid point.
pub(crate) fn spin_block(h: &CSparse, rk: &CSparse) -> Result<CSparse> {
    h.scale(C64::new(0.0, -1.0)).add(rk)
}

pub(crate) fn check_rk(dim: usize, rk: &crate::spin::RelaxKin) -> Result<CSparse> {
    if rk.dim() != dim {
        return Err(Error::DimensionMismatch {
            context: "relaxation/kinetics superoperator",
            expected: dim,
            found: rk.dim(),
        });
    }
    rk.total()
}

pub(crate) fn too_small(what: &str, n: usize) -> Error {
    invalid(alloc::format!(
        "{what} has {n} points; use at least 3 and increase the size until the output converges"
    ))
}
