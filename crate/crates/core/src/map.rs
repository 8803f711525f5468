//! Sampled maps `u: [s_min, s_max] × S¹ → S²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::{CylinderGrid, Stencil};
use crate::sphere::{Chart, SpherePoint};

/// Largest chordal distance on the unit sphere tolerated between adjacent
/// nodes before the sample is declared torn.
pub const MAX_CHORDAL_JUMP: f64 = 0.75;

/// A grid of chart-tagged sphere values. Rows `0` and `n_s − 1` are the
/// Dirichlet boundary of the solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSample {
    pub grid: CylinderGrid,
    pub values: Vec<SpherePoint>,
    /// Degree of the extended sphere map, when known.
    pub degree: Option<i32>,
}

impl MapSample {
    pub fn new(grid: CylinderGrid, values: Vec<SpherePoint>, degree: Option<i32>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::ShapeMismatch(format!(
                "{} values for a {}x{} grid",
                values.len(),
                grid.n_s,
                grid.n_t
            )));
        }
        Ok(MapSample { grid, values, degree })
    }

    pub fn from_fn<F>(grid: CylinderGrid, degree: Option<i32>, f: F) -> Self
    where
        F: Fn(f64, f64) -> SpherePoint,
    {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n_s {
            for j in 0..grid.n_t {
                values.push(f(grid.s(i), grid.t(j)).normalized());
            }
        }
        MapSample { grid, values, degree }
    }

    pub fn constant(grid: CylinderGrid, p: SpherePoint) -> Self {
        MapSample::from_fn(grid, Some(0), |_, _| p)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> SpherePoint {
        self.values[self.grid.index(i, j)]
    }

    /// Value of node `(i, j)` in `chart`, failing at the chart's pole.
    #[inline]
    pub fn coord_in(&self, i: usize, j: usize, chart: Chart) -> Complex64 {
        self.get(i, j).coord_in(chart)
    }

    pub fn boundary_rows(&self) -> [usize; 2] {
        [0, self.grid.n_s - 1]
    }

    /// Re-tags every node into its preferred chart.
    pub fn normalize(&mut self) {
        for v in &mut self.values {
            *v = v.normalized();
        }
    }

    /// Checks that adjacent nodes are close on the sphere.
    pub fn check_tearing(&self) -> Result<()> {
        let g = &self.grid;
        for i in 0..g.n_s {
            for j in 0..g.n_t {
                let p = self.get(i, j);
                if !p.is_finite() {
                    return Err(LabError::NonFinite("map sample"));
                }
                let jn = g.wrap_t(j as isize + 1);
                let mut neighbours = vec![(i, jn)];
                if i + 1 < g.n_s {
                    neighbours.push((i + 1, j));
                }
                for (a, b) in neighbours {
                    let jump = p.chordal_distance(&self.get(a, b));
                    if jump > MAX_CHORDAL_JUMP {
                        return Err(LabError::ChartTearing { s0: i, t0: j, s1: a, t1: b, jump });
                    }
                }
            }
        }
        Ok(())
    }

    /// `(∂u/∂s, ∂u/∂t)` at node `(i, j)` in that node's chart. Neighbours are
    /// converted into the node's chart before differencing.
    pub fn derivatives(&self, i: usize, j: usize, stencil: Stencil) -> Result<(Complex64, Complex64)> {
        let g = &self.grid;
        if g.n_s < stencil.min_nodes() {
            return Err(LabError::GridTooSmall { axis: "s", have: g.n_s, need: stencil.min_nodes() });
        }
        let chart = self.get(i, j).chart;
        let ds = stencil.d_open(|k| self.coord_in(k, j, chart), i, g.n_s, g.h_s());
        let dt = stencil.d_periodic(|o| self.coord_in(i, g.wrap_t(j as isize + o), chart), g.h_t());
        if !(ds.re.is_finite() && ds.im.is_finite() && dt.re.is_finite() && dt.im.is_finite()) {
            return Err(self.tearing_near(i, j));
        }
        Ok((ds, dt))
    }

    fn tearing_near(&self, i: usize, j: usize) -> LabError {
        match self.check_tearing() {
            Err(e) => e,
            Ok(()) => LabError::ChartTearing { s0: i, t0: j, s1: i, t1: j, jump: f64::INFINITY },
        }
    }
}
