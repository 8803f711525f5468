//! Uniform discretization of the truncated cylinder `[s_min, s_max] × S¹`
//! and the difference stencils used on it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Minimum nodes per axis for a cylinder grid.
pub const MIN_GRID_NODES: usize = 8;

/// `n_s` nodes on `[s_min, s_max]` (both ends included) and `n_t` nodes on
/// the circle `t ∈ [0, 1)`, periodic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderGrid {
    pub s_min: f64,
    pub s_max: f64,
    pub n_s: usize,
    pub n_t: usize,
}

impl CylinderGrid {
    pub fn new(s_min: f64, s_max: f64, n_s: usize, n_t: usize) -> Result<Self> {
        if !(s_min.is_finite() && s_max.is_finite()) || s_max <= s_min {
            return Err(LabError::InvalidGrid(format!("s-range [{s_min}, {s_max}] is empty")));
        }
        if n_s < MIN_GRID_NODES {
            return Err(LabError::GridTooSmall { axis: "s", have: n_s, need: MIN_GRID_NODES });
        }
        if n_t < MIN_GRID_NODES {
            return Err(LabError::GridTooSmall { axis: "t", have: n_t, need: MIN_GRID_NODES });
        }
        Ok(CylinderGrid { s_min, s_max, n_s, n_t })
    }

    /// Symmetric grid on `[-half_length, half_length]`.
    pub fn symmetric(half_length: f64, n_s: usize, n_t: usize) -> Result<Self> {
        CylinderGrid::new(-half_length, half_length, n_s, n_t)
    }

    pub fn h_s(&self) -> f64 {
        (self.s_max - self.s_min) / (self.n_s - 1) as f64
    }

    pub fn h_t(&self) -> f64 {
        1.0 / self.n_t as f64
    }

    pub fn s(&self, i: usize) -> f64 {
        self.s_min + i as f64 * self.h_s()
    }

    pub fn t(&self, j: usize) -> f64 {
        j as f64 * self.h_t()
    }

    pub fn len(&self) -> usize {
        self.n_s * self.n_t
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_t + j
    }

    /// Periodic neighbour in `t`.
    #[inline]
    pub fn wrap_t(&self, j: isize) -> usize {
        j.rem_euclid(self.n_t as isize) as usize
    }

    /// Same domain with both spacings halved.
    pub fn refined(&self) -> CylinderGrid {
        CylinderGrid { s_min: self.s_min, s_max: self.s_max, n_s: 2 * (self.n_s - 1) + 1, n_t: 2 * self.n_t }
    }

    /// Area of the truncated cylinder in the flat metric `ds² + dt²`.
    pub fn measure(&self) -> f64 {
        self.s_max - self.s_min
    }

    /// Trapezoid weight of row `i` in `s`.
    pub fn s_weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n_s {
            0.5 * self.h_s()
        } else {
            self.h_s()
        }
    }
}

/// Finite-difference order used for first derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Stencil {
    /// Central `(f₊ − f₋)/2h`, one-sided three-point at the `s` ends.
    #[default]
    Second,
    /// Five-point central, one-sided five-point at the `s` ends.
    Fourth,
}

impl Stencil {
    /// Nodes needed along a non-periodic axis.
    pub fn min_nodes(self) -> usize {
        match self {
            Stencil::Second => 3,
            Stencil::Fourth => 5,
        }
    }

    /// Derivative at node `i` of a non-periodic row of `n` samples.
    pub fn d_open<F>(self, f: F, i: usize, n: usize, h: f64) -> Complex64
    where
        F: Fn(usize) -> Complex64,
    {
        match self {
            Stencil::Second => {
                if i == 0 {
                    (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
                } else if i + 1 == n {
                    (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h)
                } else {
                    (f(i + 1) - f(i - 1)) / (2.0 * h)
                }
            }
            Stencil::Fourth => {
                let d = 12.0 * h;
                if i == 0 {
                    (-25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4)) / d
                } else if i == 1 {
                    (-3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + f(4)) / d
                } else if i + 1 == n {
                    (25.0 * f(n - 1) - 48.0 * f(n - 2) + 36.0 * f(n - 3) - 16.0 * f(n - 4) + 3.0 * f(n - 5)) / d
                } else if i + 2 == n {
                    (3.0 * f(n - 1) + 10.0 * f(n - 2) - 18.0 * f(n - 3) + 6.0 * f(n - 4) - f(n - 5)) / d
                } else {
                    (f(i - 2) - 8.0 * f(i - 1) + 8.0 * f(i + 1) - f(i + 2)) / d
                }
            }
        }
    }

    /// Derivative on a periodic row; `f` receives signed offsets from the node.
    pub fn d_periodic<F>(self, f: F, h: f64) -> Complex64
    where
        F: Fn(isize) -> Complex64,
    {
        match self {
            Stencil::Second => (f(1) - f(-1)) / (2.0 * h),
            Stencil::Fourth => (f(-2) - 8.0 * f(-1) + 8.0 * f(1) - f(2)) / (12.0 * h),
        }
    }

    /// Real-valued variant of [`Stencil::d_open`].
    pub fn d_open_real<F>(self, f: F, i: usize, n: usize, h: f64) -> f64
    where
        F: Fn(usize) -> f64,
    {
        self.d_open(|k| Complex64::new(f(k), 0.0), i, n, h).re
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spacing_and_refinement() {
        let g = CylinderGrid::symmetric(4.0, 201, 64).unwrap();
        assert!((g.h_s() - 0.04).abs() < 1e-15);
        assert_eq!(g.h_t(), 1.0 / 64.0);
        let r = g.refined();
        assert!((r.h_s() - 0.02).abs() < 1e-15);
        assert_eq!(r.n_t, 128);
        let total: f64 = (0..g.n_s).map(|i| g.s_weight(i)).sum();
        assert!((total - 8.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(matches!(CylinderGrid::new(0.0, 1.0, 4, 16), Err(LabError::GridTooSmall { axis: "s", .. })));
        assert!(matches!(CylinderGrid::new(0.0, 1.0, 16, 2), Err(LabError::GridTooSmall { axis: "t", .. })));
        assert!(CylinderGrid::new(1.0, 1.0, 16, 16).is_err());
    }

    #[test]
    fn stencils_exact_on_polynomials() {
        // Second order is exact on quadratics, fourth order on quartics.
        let h = 0.1;
        let n = 9;
        let x = |k: usize| k as f64 * h;
        for i in 0..n {
            let quad = |k: usize| Complex64::new(x(k) * x(k), 0.0);
            let d = Stencil::Second.d_open(quad, i, n, h);
            assert!((d.re - 2.0 * x(i)).abs() < 1e-12, "second at {i}");
            let quart = |k: usize| Complex64::new(x(k).powi(4), 0.0);
            let d = Stencil::Fourth.d_open(quart, i, n, h);
            assert!((d.re - 4.0 * x(i).powi(3)).abs() < 1e-11, "fourth at {i}");
        }
    }
}
