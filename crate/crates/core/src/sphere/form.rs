//! Fubini–Study form, metric, complex structure and the identification `Φ`.
//!
//! In either chart the form is `ω = dx∧dy / (1+|c|²)²` and the metric is
//! `⟨a, b⟩ = Re(ā b) / (1+|c|²)²`, with `c` the active coordinate. The chart
//! transition `w = 1/z` is holomorphic, so these expressions are the same in
//! both charts.

use num_complex::Complex64;

use super::{SpherePoint, TangentVector};
use crate::error::Result;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Almost-complex structure on the sphere. Only the integrable structure
/// `J = i` is implemented; the handle exists so a point-dependent `J` can be
/// added without touching callers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ComplexStructure {
    #[default]
    Standard,
}

impl ComplexStructure {
    pub fn apply(&self, _p: &SpherePoint, v: Complex64) -> Complex64 {
        match self {
            ComplexStructure::Standard => I * v,
        }
    }
}

/// Conformal weight `1/(1+|c|²)²` at `p`.
#[inline]
pub(crate) fn weight(p: &SpherePoint) -> f64 {
    let d = 1.0 + p.coord.norm_sqr();
    1.0 / (d * d)
}

/// Coefficient of `u*ω` against `ds∧dt`, derivatives given in `p`'s chart.
#[inline]
pub fn fs_area_density(p: &SpherePoint, du_ds: Complex64, du_dt: Complex64) -> f64 {
    (du_ds.conj() * du_dt).im * weight(p)
}

/// `ω(X, Y)` for raw chart components at `p`.
#[inline]
pub(crate) fn omega_raw(p: &SpherePoint, x: Complex64, y: Complex64) -> f64 {
    (x.conj() * y).im * weight(p)
}

#[inline]
pub(crate) fn inner_raw(p: &SpherePoint, x: Complex64, y: Complex64) -> f64 {
    (x.conj() * y).re * weight(p)
}

/// Metric length of a raw chart vector at `p`.
#[inline]
pub fn fs_norm(p: &SpherePoint, v: Complex64) -> f64 {
    v.norm() / (1.0 + p.coord.norm_sqr())
}

pub fn fs_form(p: &SpherePoint, x: &TangentVector, y: &TangentVector) -> Result<f64> {
    Ok(omega_raw(p, x.at(p)?, y.at(p)?))
}

pub fn fs_inner(p: &SpherePoint, v: &TangentVector, w: &TangentVector) -> Result<f64> {
    Ok(inner_raw(p, v.at(p)?, w.at(p)?))
}

/// `Φ(X)(Y) = ω(X, Y) − i ω(X, JY)`.
pub fn phi_map(p: &SpherePoint, x: &TangentVector, y: &TangentVector) -> Result<Complex64> {
    let j = ComplexStructure::Standard;
    let xv = x.at(p)?;
    let yv = y.at(p)?;
    Ok(Complex64::new(omega_raw(p, xv, yv), -omega_raw(p, xv, j.apply(p, yv))))
}

/// `Φ(X)` as the coefficient of a `(1,0)` form against the chart direction
/// `1`: `Φ(X)(Y) = phi_coefficient(p, X) · Y`. Closed form `−i X̄ (1+|c|²)⁻²`.
#[inline]
pub fn phi_coefficient(p: &SpherePoint, x: Complex64) -> Complex64 {
    -I * x.conj() * weight(p)
}

/// Inverse of [`phi_coefficient`].
#[inline]
pub fn phi_inverse(p: &SpherePoint, coefficient: Complex64) -> Complex64 {
    -I * coefficient.conj() / weight(p)
}

/// Operator norm of `ω` against the metric at `p`, evaluated on an
/// orthonormal frame.
pub fn omega_operator_norm(p: &SpherePoint) -> f64 {
    let scale = 1.0 / weight(p).sqrt();
    let e1 = Complex64::new(scale, 0.0);
    let e2 = Complex64::new(0.0, scale);
    omega_raw(p, e1, e2).abs()
}
