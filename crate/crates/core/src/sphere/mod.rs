//! The Riemann sphere `C ∪ {∞}` carried in two stereographic charts.
//!
//! Chart `Z` is the usual coordinate `z`, chart `W` is `w = 1/z`. A point is
//! stored in whichever chart keeps its coordinate inside the closed disc of
//! radius [`CHART_SWITCH_RADIUS`]; both discs overlap on the annulus
//! `1/R <= |z| <= R`, so solution families that run from `0` to `∞` never
//! overflow.

mod antilinear;
pub(crate) mod form;

pub use antilinear::{antilinear_defect, theta_form, theta_invariance_defect, ComparisonMode};
pub use form::{
    fs_area_density, fs_form, fs_inner, fs_norm, omega_operator_norm, phi_coefficient, phi_inverse, phi_map,
    ComplexStructure,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Radius of each chart disc. Must exceed 1 so the overlap annulus is nonempty.
pub const CHART_SWITCH_RADIUS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chart {
    Z,
    W,
}

impl Chart {
    pub fn other(self) -> Chart {
        match self {
            Chart::Z => Chart::W,
            Chart::W => Chart::Z,
        }
    }

    /// Sign of the Hamiltonian term of the model equation written in this chart.
    pub fn orientation_sign(self) -> f64 {
        match self {
            Chart::Z => 1.0,
            Chart::W => -1.0,
        }
    }
}

/// A point of the sphere with its active chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    pub coord: Complex64,
    pub chart: Chart,
}

impl SpherePoint {
    /// Raw constructor; the coordinate is taken as-is in `chart`.
    pub fn new(coord: Complex64, chart: Chart) -> Self {
        SpherePoint { coord, chart }
    }

    /// The point with chart-`Z` coordinate `z`, placed in its preferred chart.
    pub fn from_z(z: Complex64) -> Self {
        SpherePoint::new(z, Chart::Z).normalized()
    }

    pub fn from_w(w: Complex64) -> Self {
        SpherePoint::new(w, Chart::W).normalized()
    }

    pub fn infinity() -> Self {
        SpherePoint::new(Complex64::new(0.0, 0.0), Chart::W)
    }

    pub fn origin() -> Self {
        SpherePoint::new(Complex64::new(0.0, 0.0), Chart::Z)
    }

    /// Moves the point into the other chart when its coordinate leaves the
    /// chart disc.
    pub fn normalized(self) -> Self {
        if self.coord.norm() > CHART_SWITCH_RADIUS {
            SpherePoint::new(self.coord.inv(), self.chart.other())
        } else {
            self
        }
    }

    /// Same point in the other chart, `coord' = 1/coord`.
    pub fn chart_switch(&self) -> Result<SpherePoint> {
        if self.coord == Complex64::new(0.0, 0.0) {
            return Err(LabError::ChartPole);
        }
        Ok(SpherePoint::new(self.coord.inv(), self.chart.other()))
    }

    /// Coordinate of this point in `chart`. Non-finite when the point is the
    /// pole of that chart.
    pub fn coord_in(&self, chart: Chart) -> Complex64 {
        if chart == self.chart {
            self.coord
        } else {
            self.coord.inv()
        }
    }

    pub fn in_chart(&self, chart: Chart) -> Result<SpherePoint> {
        if chart == self.chart {
            Ok(*self)
        } else {
            self.chart_switch()
        }
    }

    /// Inverse stereographic projection onto the unit sphere in R³.
    pub fn to_unit_sphere(&self) -> [f64; 3] {
        let c = self.coord;
        let r2 = c.norm_sqr();
        let d = 1.0 + r2;
        match self.chart {
            Chart::Z => [2.0 * c.re / d, 2.0 * c.im / d, (r2 - 1.0) / d],
            Chart::W => [2.0 * c.re / d, -2.0 * c.im / d, (1.0 - r2) / d],
        }
    }

    /// Chord length between two points on the unit sphere.
    pub fn chordal_distance(&self, other: &SpherePoint) -> f64 {
        let a = self.to_unit_sphere();
        let b = other.to_unit_sphere();
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }

    /// Same sphere point up to `tol` in chordal distance.
    pub fn same_point(&self, other: &SpherePoint, tol: f64) -> bool {
        self.chordal_distance(other) <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.coord.re.is_finite() && self.coord.im.is_finite()
    }
}

/// A tangent vector `ẑ = x̂ + iŷ` in the chart of its base point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub base: SpherePoint,
    pub value: Complex64,
}

impl TangentVector {
    pub fn new(base: SpherePoint, value: Complex64) -> Self {
        TangentVector { base, value }
    }

    /// Re-expresses the vector in `chart` via the transition derivative
    /// `ẑ ↦ −ẑ / z²`.
    pub fn in_chart(&self, chart: Chart) -> Result<TangentVector> {
        if chart == self.base.chart {
            return Ok(*self);
        }
        let base = self.base.chart_switch()?;
        let c = self.base.coord;
        Ok(TangentVector::new(base, -self.value / (c * c)))
    }

    /// The vector expressed at `p`'s chart, failing when it lives elsewhere.
    pub(crate) fn at(&self, p: &SpherePoint) -> Result<Complex64> {
        if !self.base.same_point(p, 1e-10) {
            return Err(LabError::BaseMismatch);
        }
        Ok(self.in_chart(p.chart)?.value)
    }
}
