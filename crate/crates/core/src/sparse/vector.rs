use alloc::vec::Vec;
use core::ops::{Deref, DerefMut};

use crate::error::invalid;
use crate::{Result, C64};

/// Dense complex vector with a positive dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct CVector(Vec<C64>);

impl CVector {
    pub fn new(values: Vec<C64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("vector dimension must be positive"));
        }
        Ok(Self(values))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "vector dimension must be positive");
        Self(alloc::vec![C64::new(0.0, 0.0); dim])
    }

    /// Unit basis vector `e_k`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[k] = C64::new(1.0, 0.0);
        v
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        super::norm2(&self.0)
    }

    pub fn dot(&self, other: &[C64]) -> C64 {
        super::dot(&self.0, other)
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self(self.0.iter().map(|x| x * c).collect())
    }

    pub fn axpy(&mut self, c: C64, x: &[C64]) {
        assert_eq!(self.0.len(), x.len());
        for (y, x) in self.0.iter_mut().zip(x) {
            *y += c * x;
        }
    }

    /// Largest entry-wise distance to another vector.
    pub fn max_abs_diff(&self, other: &[C64]) -> f64 {
        self.0
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.0
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }
}

impl Deref for CVector {
    type Target = [C64];
    fn deref(&self) -> &[C64] {
        &self.0
    }
}

impl DerefMut for CVector {
    fn deref_mut(&mut self) -> &mut [C64] {
        &mut self.0
    }
}

impl From<CVector> for Vec<C64> {
    fn from(v: CVector) -> Self {
        v.0
    }
}
