//! Pointwise checks on `∂̄_J u = du + J∘du∘j` for sampled maps.

use num_complex::Complex64;

use super::form::{fs_norm, inner_raw};
use super::{ComplexStructure, SpherePoint};
use crate::error::{LabError, Result};
use crate::grid::Stencil;
use crate::map::MapSample;

/// Which identity [`antilinear_defect`] measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparisonMode {
    /// `‖∂̄_J u − 2 du‖`: vanishes when `du` is complex anti-linear.
    AntiHolomorphic,
    /// `‖∂̄_J u‖`: vanishes when `du` is complex linear.
    Holomorphic,
}

/// `(∂̄_J u(∂_s), ∂̄_J u(∂_t))` from the chart derivatives, with `j ∂_s = ∂_t`.
fn dbar_j(p: &SpherePoint, ds: Complex64, dt: Complex64) -> (Complex64, Complex64) {
    let j = ComplexStructure::Standard;
    (ds + j.apply(p, dt), dt - j.apply(p, ds))
}

fn interior_nodes(u: &MapSample) -> Result<impl Iterator<Item = (usize, usize)> + '_> {
    let g = &u.grid;
    if g.n_s < 3 {
        return Err(LabError::GridTooSmall { axis: "s", have: g.n_s, need: 3 });
    }
    if g.n_t < 3 {
        return Err(LabError::GridTooSmall { axis: "t", have: g.n_t, need: 3 });
    }
    Ok((1..g.n_s - 1).flat_map(move |i| (0..g.n_t).map(move |j| (i, j))))
}

/// Largest metric defect over the grid interior, measured with central
/// differences.
pub fn antilinear_defect(u: &MapSample, mode: ComparisonMode) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, j) in interior_nodes(u)? {
        let p = u.get(i, j);
        let (ds, dt) = u.derivatives(i, j, Stencil::Second)?;
        let (a_s, a_t) = dbar_j(&p, ds, dt);
        let (e_s, e_t) = match mode {
            ComparisonMode::AntiHolomorphic => (a_s - 2.0 * ds, a_t - 2.0 * dt),
            ComparisonMode::Holomorphic => (a_s, a_t),
        };
        worst = worst.max(fs_norm(&p, e_s)).max(fs_norm(&p, e_t));
    }
    Ok(worst)
}

/// `θ(v, w) = −½⟨A(v), J A(w)⟩ − ½ i ⟨A(v), A(w)⟩` for `A = ∂̄_J u` given by
/// its values on `v` and `w`.
pub fn theta_form(p: &SpherePoint, a_v: Complex64, a_w: Complex64) -> Complex64 {
    let j = ComplexStructure::Standard;
    Complex64::new(-0.5 * inner_raw(p, a_v, j.apply(p, a_w)), -0.5 * inner_raw(p, a_v, a_w))
}

/// Largest `|θ(j∂_s, j∂_s) − θ(∂_s, ∂_s)|` over the grid interior.
pub fn theta_invariance_defect(u: &MapSample) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, j) in interior_nodes(u)? {
        let p = u.get(i, j);
        let (ds, dt) = u.derivatives(i, j, Stencil::Second)?;
        let (a_s, a_t) = dbar_j(&p, ds, dt);
        let d = theta_form(&p, a_t, a_t) - theta_form(&p, a_s, a_s);
        worst = worst.max(d.norm());
    }
    Ok(worst)
}
