//! Discrete `∂̄_Σ`, `∂_Σ` and `∂_M` on functions over `Σ × M`, where `Σ` is
//! the sampled cylinder and `M` the sphere.
//!
//! A [`SampledFunction`] holds grid values for a finite list of sphere
//! points, plus (optionally) the closure they came from. Σ-derivatives use
//! grid differences; M-derivatives need the closure, because they difference
//! in the chart coordinate around each point.

mod diagrams;

pub use diagrams::{diagram_defect_0, diagram_defect_1, exact_perturbation_two_ways, ExactPerturbation};

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::grid::{CylinderGrid, Stencil};
use crate::sphere::{SpherePoint, TangentVector};

pub(crate) const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Step in chart coordinates for M-direction central differences.
pub const M_STEP: f64 = 1e-5;

pub type FieldFn = Arc<dyn Fn(f64, f64, &SpherePoint) -> Complex64 + Send + Sync>;

/// Complex values on `grid × points`, laid out point-major.
#[derive(Clone)]
pub struct SampledFunction {
    pub grid: CylinderGrid,
    pub points: Vec<SpherePoint>,
    pub values: Vec<Complex64>,
    source: Option<FieldFn>,
}

impl fmt::Debug for SampledFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledFunction")
            .field("grid", &self.grid)
            .field("points", &self.points.len())
            .field("has_closure", &self.source.is_some())
            .finish()
    }
}

fn sample(grid: &CylinderGrid, points: &[SpherePoint], f: &FieldFn) -> Vec<Complex64> {
    let mut values = Vec::with_capacity(points.len() * grid.len());
    for p in points {
        for i in 0..grid.n_s {
            let s = grid.s(i);
            for j in 0..grid.n_t {
                values.push(f(s, grid.t(j), p));
            }
        }
    }
    values
}

impl SampledFunction {
    pub fn from_fn<F>(grid: CylinderGrid, points: Vec<SpherePoint>, f: F) -> Self
    where
        F: Fn(f64, f64, &SpherePoint) -> Complex64 + Send + Sync + 'static,
    {
        let source: FieldFn = Arc::new(f);
        let values = sample(&grid, &points, &source);
        SampledFunction { grid, points, values, source: Some(source) }
    }

    /// Like [`SampledFunction::from_fn`] for a fallible closure. The closure
    /// is probed on every sample up front, so later M-derivatives cannot fail.
    pub fn try_from_fn<F>(grid: CylinderGrid, points: Vec<SpherePoint>, f: F) -> Result<Self>
    where
        F: Fn(f64, f64, &SpherePoint) -> Result<Complex64> + Send + Sync + 'static,
    {
        for p in &points {
            f(grid.s(0), 0.0, p)?;
        }
        let f = Arc::new(f);
        let g = f.clone();
        let probe = sample(
            &grid,
            &points,
            &(Arc::new(move |s, t, p: &SpherePoint| g(s, t, p).unwrap_or(Complex64::new(f64::NAN, f64::NAN)))
                as FieldFn),
        );
        if probe.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(LabError::NonFinite("sampled function"));
        }
        Ok(SampledFunction::from_fn(grid, points, move |s, t, p| {
            f(s, t, p).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
        }))
    }

    /// Grid values only; M-derivatives are unavailable.
    pub fn from_values(grid: CylinderGrid, points: Vec<SpherePoint>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() * points.len() {
            return Err(LabError::ShapeMismatch(format!(
                "{} values for {} points on a {}x{} grid",
                values.len(),
                points.len(),
                grid.n_s,
                grid.n_t
            )));
        }
        Ok(SampledFunction { grid, points, values, source: None })
    }

    pub fn closure(&self) -> Option<&FieldFn> {
        self.source.as_ref()
    }

    #[inline]
    pub fn index(&self, m: usize, i: usize, j: usize) -> usize {
        m * self.grid.len() + self.grid.index(i, j)
    }

    #[inline]
    pub fn get(&self, m: usize, i: usize, j: usize) -> Complex64 {
        self.values[self.index(m, i, j)]
    }

    /// The same closure sampled at other sphere points.
    pub(crate) fn resampled(&self, points: Vec<SpherePoint>) -> Result<SampledFunction> {
        let f = self.source.clone().ok_or(LabError::NoClosure)?;
        let values = sample(&self.grid, &points, &f);
        Ok(SampledFunction { grid: self.grid, points, values, source: Some(f) })
    }

    /// Pointwise map of the values, `g(point, value)`; drops the closure.
    pub(crate) fn map_pointwise<G>(&self, g: G) -> SampledFunction
    where
        G: Fn(&SpherePoint, Complex64) -> Complex64,
    {
        let n = self.grid.len();
        let values = self.values.iter().enumerate().map(|(k, v)| g(&self.points[k / n], *v)).collect();
        SampledFunction { grid: self.grid, points: self.points.clone(), values, source: None }
    }
}

/// Which half of the Σ-type splitting a form belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaType {
    /// `α∘j = −iα`, i.e. `comp_dt = −i·comp_ds`.
    ZeroOne,
    /// `α∘j = iα`, i.e. `comp_dt = i·comp_ds`.
    OneZero,
}

/// A form in the Σ-directions sampled on `grid × points`: its values on
/// `∂_s` and `∂_t`. The values are scalars, `dz`-coefficients, or tangent
/// vector components depending on the producer.
#[derive(Debug, Clone)]
pub struct SigmaForm {
    pub grid: CylinderGrid,
    pub points: Vec<SpherePoint>,
    pub ds: Vec<Complex64>,
    pub dt: Vec<Complex64>,
    pub kind: SigmaType,
}

impl SigmaForm {
    #[inline]
    pub fn index(&self, m: usize, i: usize, j: usize) -> usize {
        m * self.grid.len() + self.grid.index(i, j)
    }

    /// Largest `|comp_dt ∓ i·comp_ds|` for the form's declared type.
    pub fn type_defect(&self) -> f64 {
        let rot = match self.kind {
            SigmaType::ZeroOne => -I,
            SigmaType::OneZero => I,
        };
        self.ds.iter().zip(&self.dt).map(|(a, b)| (b - rot * a).norm()).fold(0.0, f64::max)
    }

    /// Sup-norm distance to another form on the same samples.
    pub fn sup_distance(&self, other: &SigmaForm) -> Result<f64> {
        if self.ds.len() != other.ds.len() {
            return Err(LabError::ShapeMismatch("forms on different samples".into()));
        }
        let d = self
            .ds
            .iter()
            .zip(&other.ds)
            .chain(self.dt.iter().zip(&other.dt))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        Ok(d)
    }
}

/// `(∂f/∂s, ∂f/∂t)` at every sample.
pub(crate) fn sigma_partials(f: &SampledFunction, stencil: Stencil) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let g = &f.grid;
    let need = stencil.min_nodes();
    if g.n_s < need {
        return Err(LabError::GridTooSmall { axis: "s", have: g.n_s, need });
    }
    if g.n_t < need {
        return Err(LabError::GridTooSmall { axis: "t", have: g.n_t, need });
    }
    let mut ds = Vec::with_capacity(f.values.len());
    let mut dt = Vec::with_capacity(f.values.len());
    for m in 0..f.points.len() {
        for i in 0..g.n_s {
            for j in 0..g.n_t {
                ds.push(stencil.d_open(|k| f.get(m, k, j), i, g.n_s, g.h_s()));
                dt.push(stencil.d_periodic(|o| f.get(m, i, g.wrap_t(j as isize + o)), g.h_t()));
            }
        }
    }
    Ok((ds, dt))
}

pub(crate) fn typed_form(f: &SampledFunction, ds: Vec<Complex64>, kind: SigmaType) -> SigmaForm {
    let rot = match kind {
        SigmaType::ZeroOne => -I,
        SigmaType::OneZero => I,
    };
    let dt = ds.iter().map(|a| rot * a).collect();
    SigmaForm { grid: f.grid, points: f.points.clone(), ds, dt, kind }
}

/// `∂̄_Σ f = d_Σ f + i (d_Σ f)∘j` with the given stencil.
pub fn dbar_sigma_with(f: &SampledFunction, stencil: Stencil) -> Result<SigmaForm> {
    let (fs, ft) = sigma_partials(f, stencil)?;
    let ds = fs.iter().zip(&ft).map(|(a, b)| a + I * b).collect();
    Ok(typed_form(f, ds, SigmaType::ZeroOne))
}

/// `∂̄_Σ f` with second-order central differences.
pub fn dbar_sigma(f: &SampledFunction) -> Result<SigmaForm> {
    dbar_sigma_with(f, Stencil::Second)
}

/// `∂_Σ f = d_Σ f − i (d_Σ f)∘j`.
pub fn del_sigma_with(f: &SampledFunction, stencil: Stencil) -> Result<SigmaForm> {
    let (fs, ft) = sigma_partials(f, stencil)?;
    let ds = fs.iter().zip(&ft).map(|(a, b)| a - I * b).collect();
    Ok(typed_form(f, ds, SigmaType::OneZero))
}

/// Coefficient of `∂_M f = d_M f − i (d_M f)∘J` against the chart direction
/// `1` at `(s, t, p)`, by central differences of step [`M_STEP`].
pub(crate) fn del_m_coefficient(f: &FieldFn, s: f64, t: f64, p: &SpherePoint) -> Result<Complex64> {
    let shifted = |d: Complex64| f(s, t, &SpherePoint::new(p.coord + d, p.chart));
    let h = M_STEP;
    let dx = (shifted(Complex64::new(h, 0.0)) - shifted(Complex64::new(-h, 0.0))) / (2.0 * h);
    let dy = (shifted(Complex64::new(0.0, h)) - shifted(Complex64::new(0.0, -h))) / (2.0 * h);
    let c = dx - I * dy;
    if !(c.re.is_finite() && c.im.is_finite()) {
        return Err(LabError::NonFinite("∂_M"));
    }
    Ok(c)
}

/// `(∂_M f)(direction)` at `(s, t, p)`.
pub fn del_m(f: &SampledFunction, s: f64, t: f64, p: &SpherePoint, direction: &TangentVector) -> Result<Complex64> {
    let src = f.closure().ok_or(LabError::NoClosure)?;
    let v = direction.at(p)?;
    Ok(del_m_coefficient(src, s, t, p)? * v)
}

/// `∂_M f` coefficients at every sample of `f`.
pub fn del_m_field(f: &SampledFunction) -> Result<SampledFunction> {
    let src = f.closure().ok_or(LabError::NoClosure)?;
    let g = &f.grid;
    let mut values = Vec::with_capacity(f.values.len());
    for p in &f.points {
        for i in 0..g.n_s {
            for j in 0..g.n_t {
                values.push(del_m_coefficient(src, g.s(i), g.t(j), p)?);
            }
        }
    }
    SampledFunction::from_values(f.grid, f.points.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::Chart;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid() -> CylinderGrid {
        CylinderGrid::symmetric(1.0, 21, 16).unwrap()
    }

    fn one_point() -> Vec<SpherePoint> {
        vec![SpherePoint::origin()]
    }

    #[test]
    fn holomorphic_in_cylinder_coordinate_is_annihilated() {
        // `t` itself is not periodic, so skip the wrap-around columns.
        let g = grid();
        let f = SampledFunction::from_fn(g, one_point(), |s, t, _| c(s, t));
        let form = dbar_sigma(&f).unwrap();
        for i in 0..g.n_s {
            for j in 1..g.n_t - 1 {
                let k = form.index(0, i, j);
                assert!(form.ds[k].norm() < 1e-12 && form.dt[k].norm() < 1e-12);
            }
        }
    }

    #[test]
    fn antiholomorphic_example() {
        let g = grid();
        let f = SampledFunction::from_fn(g, one_point(), |s, t, _| c(s, -t));
        let form = dbar_sigma(&f).unwrap();
        for i in 0..g.n_s {
            for j in 1..g.n_t - 1 {
                let k = form.index(0, i, j);
                assert!((form.ds[k] - c(2.0, 0.0)).norm() < 1e-12);
                assert!((form.dt[k] - c(0.0, -2.0)).norm() < 1e-12);
            }
        }
        assert_eq!(form.type_defect(), 0.0);
    }

    #[test]
    fn quadratic_in_s_is_second_order() {
        let dev = |g: CylinderGrid| {
            let f = SampledFunction::from_fn(g, one_point(), |s, _, _| c(s * s * s, 0.0));
            let form = dbar_sigma(&f).unwrap();
            (1..g.n_s - 1).map(|i| (form.ds[g.index(i, 0)] - c(3.0 * g.s(i).powi(2), 0.0)).norm()).fold(0.0, f64::max)
        };
        let r = dev(grid()) / dev(grid().refined());
        assert!((3.5..=4.5).contains(&r), "{r}");
        let f = SampledFunction::from_fn(grid(), one_point(), |s, _, _| c(s * s, 0.0));
        let form = dbar_sigma(&f).unwrap();
        let g = grid();
        for i in 0..g.n_s {
            assert!((form.ds[g.index(i, 3)] - c(2.0 * g.s(i), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn del_sigma_is_one_zero() {
        let f = SampledFunction::from_fn(grid(), one_point(), |s, t, _| c(s * t, s - t));
        let form = del_sigma_with(&f, Stencil::Fourth).unwrap();
        assert_eq!(form.kind, SigmaType::OneZero);
        assert_eq!(form.type_defect(), 0.0);
    }

    #[test]
    fn del_m_examples() {
        let o = SpherePoint::origin();
        let dir = TangentVector::new(o, c(1.0, 0.0));
        let constant = SampledFunction::from_fn(grid(), one_point(), |s, _, _| c(s, 1.0));
        assert_eq!(del_m(&constant, 0.0, 0.0, &o, &dir).unwrap(), c(0.0, 0.0));
        let re = SampledFunction::from_fn(grid(), one_point(), |_, _, p| c(p.coord.re, 0.0));
        assert!((del_m(&re, 0.0, 0.0, &o, &dir).unwrap() - c(1.0, 0.0)).norm() < 1e-9);
        let z = SampledFunction::from_fn(grid(), one_point(), |_, _, p| p.coord);
        assert!((del_m(&z, 0.0, 0.0, &o, &dir).unwrap() - c(2.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn del_m_needs_closure() {
        let g = grid();
        let f = SampledFunction::from_values(g, one_point(), vec![c(0.0, 0.0); g.len()]).unwrap();
        let o = SpherePoint::origin();
        let dir = TangentVector::new(o, c(1.0, 0.0));
        assert_eq!(del_m(&f, 0.0, 0.0, &o, &dir), Err(LabError::NoClosure));
    }

    #[test]
    fn del_m_is_complex_linear_in_direction() {
        let p = SpherePoint::new(c(0.4, -0.3), Chart::Z);
        let f = SampledFunction::from_fn(grid(), vec![p], |s, _, q| c(q.coord.re * q.coord.im + s, q.coord.norm_sqr()));
        let v = TangentVector::new(p, c(0.7, 0.2));
        let jv = TangentVector::new(p, I * v.value);
        let a = del_m(&f, 0.1, 0.2, &p, &v).unwrap();
        let b = del_m(&f, 0.1, 0.2, &p, &jv).unwrap();
        assert!((b - I * a).norm() < 1e-9);
    }

    #[test]
    fn fourth_order_needs_five_nodes() {
        // Grids below five nodes cannot be built, so exercise the guard on
        // the stencil requirement directly.
        assert_eq!(Stencil::Fourth.min_nodes(), 5);
        assert_eq!(Stencil::Second.min_nodes(), 3);
    }
}
