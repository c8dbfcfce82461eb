//! Time propagation, detection and averaging of Fokker-Planck states.

mod frequency;
mod time;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

pub use frequency::{detect_fd, detect_fd_with, lift_coil, powder_average, resolvent_at, weighted_sum, Spectrum};
pub use time::{
    acquire_fid, acquire_fid_with, evolve, evolve_schedule, evolve_schedule_with, evolve_with, lvn_oracle,
    Trajectory, PROPAGATOR_CACHE_DIM,
};

use crate::assembly::{FPLayout, FPState, FactorKind};
use crate::error::invalid;
use crate::sparse::CVector;
use crate::{Error, Result, C64};

/// Per-factor weights of the initial spatial distribution. The weight of a
/// spatial block is the product of its factor weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockWeights {
    names: Vec<String>,
    weights: Vec<Vec<f64>>,
}

impl BlockWeights {
    /// `1/N` on every spatial factor.
    pub fn uniform(layout: &FPLayout) -> Self {
        let spatial = &layout.factors()[..layout.factors().len() - 1];
        Self {
            names: spatial.iter().map(|f| f.name.clone()).collect(),
            weights: spatial.iter().map(|f| vec![1.0 / f.dim as f64; f.dim]).collect(),
        }
    }

    /// Replaces the weights of one factor; they must sum to one.
    pub fn with_factor(mut self, name: &str, weights: Vec<f64>) -> Result<Self> {
        let k = self.index(name)?;
        if weights.len() != self.weights[k].len() {
            return Err(Error::DimensionMismatch {
                context: "block weights",
                expected: self.weights[k].len(),
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(invalid("block weights must be finite"));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(invalid(alloc::format!("weights of `{name}` sum to {s}, not 1")));
        }
        self.weights[k] = weights;
        Ok(self)
    }

    /// All weight of one factor on grid point `index`, e.g. a carrier phase
    /// that starts at a definite value.
    pub fn locked(self, name: &str, index: usize) -> Result<Self> {
        let k = self.index(name)?;
        let n = self.weights[k].len();
        if index >= n {
            return Err(invalid(alloc::format!("index {index} outside factor `{name}` of size {n}")));
        }
        let mut w = vec![0.0; n];
        w[index] = 1.0;
        self.with_factor(name, w)
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownSlot(name.into()))
    }

    /// Weight of every spatial block, in layout order.
    pub fn block_weights(&self) -> Vec<f64> {
        self.weights.iter().fold(vec![1.0], |acc, w| {
            acc.iter().flat_map(|a| w.iter().map(move |b| a * b)).collect()
        })
    }

    fn matches(&self, layout: &FPLayout) -> bool {
        let spatial = &layout.factors()[..layout.factors().len() - 1];
        spatial.len() == self.names.len()
            && spatial
                .iter()
                .zip(self.names.iter().zip(&self.weights))
                .all(|(f, (n, w))| &f.name == n && f.dim == w.len() && f.kind != FactorKind::Spin)
    }
}

/// Places `w_j rho0` in spatial block `j`.
pub fn distribute_state(rho0: &[C64], layout: &FPLayout, weights: Option<&BlockWeights>) -> Result<FPState> {
    let s = layout.spin_dim();
    if rho0.len() != s {
        return Err(Error::DimensionMismatch {
            context: "initial spin state",
            expected: s,
            found: rho0.len(),
        });
    }
    let default;
    let w = match weights {
        Some(w) => {
            if !w.matches(layout) {
                return Err(invalid("block weights were built for a different layout"));
            }
            w
        }
        None => {
            default = BlockWeights::uniform(layout);
            &default
        }
    };
    let mut v = Vec::with_capacity(layout.total_dim());
    for wj in w.block_weights() {
        v.extend(rho0.iter().map(|x| x * wj));
    }
    FPState::new(CVector::new(v)?, layout.clone())
}

/// Sum of all spatial blocks.
pub fn spatial_average(state: &FPState) -> CVector {
    let s = state.layout.spin_dim();
    let mut out = vec![C64::new(0.0, 0.0); s];
    for block in state.vector.chunks(s) {
        for (o, x) in out.iter_mut().zip(block) {
            *o += x;
        }
    }
    CVector::new(out).expect("spin dimension is nonzero")
}

/// Sums out one spatial factor, e.g. the RF phase grid at the end of a pulse.
/// The result lives on the layout without that factor.
pub fn partial_trace(state: &FPState, slot: &str) -> Result<FPState> {
    let layout = &state.layout;
    let k = layout.slot(slot)?;
    let factors = layout.factors();
    if factors[k].kind == FactorKind::Spin {
        return Err(invalid("the spin factor cannot be traced out"));
    }
    let n = factors[k].dim;
    let inner: usize = factors[k + 1..].iter().map(|f| f.dim).product();
    let outer = layout.total_dim() / (n * inner);
    let mut v = vec![C64::new(0.0, 0.0); outer * inner];
    for o in 0..outer {
        for j in 0..n {
            let src = &state.vector[(o * n + j) * inner..(o * n + j + 1) * inner];
            for (d, x) in v[o * inner..(o + 1) * inner].iter_mut().zip(src) {
                *d += x;
            }
        }
    }
    let mut rest = factors.to_vec();
    rest.remove(k);
    FPState::new(CVector::new(v)?, FPLayout::new(rest)?)
}
