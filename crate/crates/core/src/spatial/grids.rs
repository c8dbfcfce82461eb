use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::invalid;
use crate::Result;

/// Uniform periodic phase grid `phi_j = 2 pi j / n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseGrid {
    n: usize,
}

impl PhaseGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("phase grid needs at least one point"));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    /// Wrap-around with the given period (m).
    Periodic { period: f64 },
    /// One-sided stencils at the edges.
    Reflective,
    /// Values outside the grid are zero (Dirichlet ghost points).
    Absorptive,
}

/// Strictly increasing coordinate grid with a boundary condition.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateGrid {
    points: Vec<f64>,
    boundary: Boundary,
}

impl CoordinateGrid {
    pub fn new(points: Vec<f64>, boundary: Boundary) -> Result<Self> {
        if points.len() < 3 {
            return Err(invalid("coordinate grid needs at least 3 points"));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(invalid("coordinate grid points must be finite"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("coordinate grid points must be strictly increasing"));
        }
        if let Boundary::Periodic { period } = boundary {
            let span = points[points.len() - 1] - points[0];
            if !(period > span) {
                return Err(invalid("period must exceed the span of the grid points"));
            }
        }
        Ok(Self { points, boundary })
    }

    /// `n` uniformly spaced points on `[start, start + length)`, wrapping.
    pub fn periodic(start: f64, length: f64, n: usize) -> Result<Self> {
        let h = length / n as f64;
        Self::new(
            (0..n).map(|k| start + h * k as f64).collect(),
            Boundary::Periodic { period: length },
        )
    }

    /// `n` uniformly spaced points on `[start, end]` inclusive.
    pub fn uniform(start: f64, end: f64, n: usize, boundary: Boundary) -> Result<Self> {
        if n < 2 {
            return Err(invalid("coordinate grid needs at least 3 points"));
        }
        let h = (end - start) / (n - 1) as f64;
        Self::new((0..n).map(|k| start + h * k as f64).collect(), boundary)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Local cell widths, usable as quadrature weights.
    pub fn cell_widths(&self) -> Vec<f64> {
        let p = &self.points;
        let n = p.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 {
                    p[i] - p[i - 1]
                } else if let Boundary::Periodic { period } = self.boundary {
                    p[0] + period - p[n - 1]
                } else {
                    p[1] - p[0]
                };
                let right = if i + 1 < n {
                    p[i + 1] - p[i]
                } else if let Boundary::Periodic { period } = self.boundary {
                    p[0] + period - p[n - 1]
                } else {
                    p[n - 1] - p[n - 2]
                };
                0.5 * (left + right)
            })
            .collect()
    }
}
