use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};
use crate::kernel::Vec3;

/// Truncated cubic velocity lattice `[-L, L)^3` with `n` cells per axis.
///
/// Nodes sit at cell centres, `v_i = -L + (i + 1/2) h` with `h = 2L/n`, so
/// the lattice is symmetric under `v -> -v`. Flat indices are row-major,
/// `(ix * n + iy) * n + iz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityGrid {
    half_width: f64,
    n: usize,
    h: f64,
}

impl VelocityGrid {
    pub fn new(half_width: f64, n: usize) -> LabResult<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(LabError::param(
                "L",
                format!("{half_width} must be positive"),
            ));
        }
        if !n.is_multiple_of(2) || !(8..=64).contains(&n) {
            return Err(LabError::param(
                "n",
                format!("{n} must be even and in [8, 64]"),
            ));
        }
        Ok(Self {
            half_width,
            n,
            h: 2.0 * half_width / n as f64,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Quadrature weight `h^3` carried by each node.
    pub fn cell_volume(&self) -> f64 {
        self.h * self.h * self.h
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// One-dimensional node coordinate.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.h
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n + iy) * self.n + iz
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    #[inline]
    pub fn node(&self, idx: usize) -> Vec3 {
        let [a, b, c] = self.unravel(idx);
        Vec3::new(self.coord(a), self.coord(b), self.coord(c))
    }

    pub fn nodes(&self) -> Vec<Vec3> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Fractional lattice coordinate of a point along one axis: node `i` sits
    /// at `i`.
    #[inline]
    pub fn fractional(&self, x: f64) -> f64 {
        (x + self.half_width) / self.h - 0.5
    }

    pub fn same_as(&self, other: &VelocityGrid) -> LabResult<()> {
        if self == other {
            Ok(())
        } else {
            Err(LabError::GridMismatch(format!(
                "(L={}, n={}) vs (L={}, n={})",
                self.half_width, self.n, other.half_width, other.n
            )))
        }
    }
}
