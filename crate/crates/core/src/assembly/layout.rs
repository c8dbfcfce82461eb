use alloc::string::String;
use alloc::vec::Vec;

use crate::error::invalid;
use crate::sparse::CSparse;
use crate::{Error, Result};

/// Largest total dimension accepted by [`FPLayout::new`].
pub const MAX_TOTAL_DIM: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    /// Periodic phase (rotor, RF or microwave), uniform grid.
    Phase,
    /// Sample coordinate.
    Coordinate,
    /// Spin Liouville space; always the last factor.
    Spin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub name: String,
    pub dim: usize,
    pub kind: FactorKind,
}

impl Factor {
    pub fn phase(name: &str, dim: usize) -> Self {
        Self {
            name: name.into(),
            dim,
            kind: FactorKind::Phase,
        }
    }

    pub fn coordinate(name: &str, dim: usize) -> Self {
        Self {
            name: name.into(),
            dim,
            kind: FactorKind::Coordinate,
        }
    }

    pub fn spin(dim: usize) -> Self {
        Self {
            name: "spin".into(),
            dim,
            kind: FactorKind::Spin,
        }
    }
}

/// Ordered Kronecker factors: phases, then coordinates, then spin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FPLayout {
    factors: Vec<Factor>,
    total_dim: usize,
}

impl FPLayout {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        let Some(last) = factors.last() else {
            return Err(invalid("layout needs a spin factor"));
        };
        if last.kind != FactorKind::Spin {
            return Err(invalid("the spin factor must be the last layout factor"));
        }
        let rank = |k: FactorKind| match k {
            FactorKind::Phase => 0,
            FactorKind::Coordinate => 1,
            FactorKind::Spin => 2,
        };
        for w in factors.windows(2) {
            if rank(w[0].kind) > rank(w[1].kind) || w[0].kind == FactorKind::Spin {
                return Err(invalid(
                    "layout factors must be ordered phases, coordinates, then a single spin factor",
                ));
            }
        }
        for (i, f) in factors.iter().enumerate() {
            if f.dim == 0 {
                return Err(invalid(alloc::format!("factor `{}` has zero dimension", f.name)));
            }
            if factors[..i].iter().any(|g| g.name == f.name) {
                return Err(invalid(alloc::format!("duplicate layout slot `{}`", f.name)));
            }
        }
        let total: u128 = factors.iter().map(|f| f.dim as u128).product();
        if total > usize::MAX as u128 {
            return Err(Error::Overflow { dim: total });
        }
        if total > MAX_TOTAL_DIM as u128 {
            let sizes: Vec<String> = factors.iter().map(|f| alloc::format!("{}={}", f.name, f.dim)).collect();
            return Err(invalid(alloc::format!(
                "total dimension {total} ({}) exceeds {MAX_TOTAL_DIM}; reduce grid sizes or the spin system \
                 (10 phase points x 100 slices x a 1024-dim Liouville space is about 1e6 and fine)",
                sizes.join(" x ")
            )));
        }
        Ok(Self {
            factors,
            total_dim: total as usize,
        })
    }

    /// Layout with only a spin factor.
    pub fn spin_only(dim: usize) -> Result<Self> {
        Self::new(alloc::vec![Factor::spin(dim)])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn spin_dim(&self) -> usize {
        self.factors.last().map(|f| f.dim).unwrap_or(1)
    }

    /// Number of spatial blocks (product of all non-spin factors).
    pub fn spatial_dim(&self) -> usize {
        self.total_dim / self.spin_dim()
    }

    pub fn slot(&self, name: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.name == name)
            .ok_or_else(|| Error::UnknownSlot(name.into()))
    }

    pub fn factor(&self, name: &str) -> Result<&Factor> {
        Ok(&self.factors[self.slot(name)?])
    }
}

/// Embeds `op` into the named factor with identities elsewhere.
pub fn lift(op: &CSparse, layout: &FPLayout, slot: &str) -> Result<CSparse> {
    let idx = layout.slot(slot)?;
    let dim = layout.factors[idx].dim;
    if op.nrows() != dim || op.ncols() != dim {
        return Err(Error::DimensionMismatch {
            context: "lifted operator",
            expected: dim,
            found: op.nrows(),
        });
    }
    let before: usize = layout.factors[..idx].iter().map(|f| f.dim).product();
    let after: usize = layout.factors[idx + 1..].iter().map(|f| f.dim).product();
    let mut out = op.clone();
    if after > 1 {
        out = CSparse::kron(&out, &CSparse::identity(after))?;
    }
    if before > 1 {
        out = CSparse::kron(&CSparse::identity(before), &out)?;
    }
    Ok(out)
}
