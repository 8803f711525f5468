//! Two-route checks of the `Φ` / `∂̄_Σ` / `∂_M` identities.
//!
//! Each check computes both sides with different Σ-stencils (second order on
//! one route, fourth order on the other). With a shared stencil the discrete
//! operators commute exactly and the defect would be pure roundoff; with
//! different stencils the defect measures the second-order truncation error
//! and shrinks by four per halving of the grid.

use num_complex::Complex64;

use super::{
    del_m_field, del_sigma_with, sigma_partials, typed_form, SampledFunction, SigmaForm, SigmaType, I, M_STEP,
};
use crate::error::{LabError, Result};
use crate::grid::Stencil;
use crate::sphere::{phi_coefficient, phi_inverse, SpherePoint};

const ROUTE_A: Stencil = Stencil::Second;
const ROUTE_B: Stencil = Stencil::Fourth;

fn check_grid(f: &SampledFunction) -> Result<()> {
    let need = ROUTE_B.min_nodes();
    if f.grid.n_s < need {
        return Err(LabError::GridTooSmall { axis: "s", have: f.grid.n_s, need });
    }
    if f.grid.n_t < need {
        return Err(LabError::GridTooSmall { axis: "t", have: f.grid.n_t, need });
    }
    Ok(())
}

fn sup_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Σ-form values `X_s + i X_t` of a vector-valued sample, where the vector
/// values are taken in the chart of their base point and `J = i`.
fn dbar_vector(x: &SampledFunction, stencil: Stencil) -> Result<Vec<Complex64>> {
    let (xs, xt) = sigma_partials(x, stencil)?;
    Ok(xs.iter().zip(&xt).map(|(a, b)| a + I * b).collect())
}

/// `‖Φ∘∂̄_Σ X − ∂_Σ(Φ X)‖_∞` for a vector field sample `X` (values are
/// chart components at each M-sample). `Φ` is conjugate-linear, so it
/// carries the `(0,1)_Σ` part of `X` to the `(1,0)_Σ` part of `ΦX`.
pub fn diagram_defect_0(x: &SampledFunction) -> Result<f64> {
    check_grid(x)?;
    let n = x.grid.len();
    let lhs: Vec<Complex64> =
        dbar_vector(x, ROUTE_A)?.into_iter().enumerate().map(|(k, v)| phi_coefficient(&x.points[k / n], v)).collect();
    let phi_x = x.map_pointwise(phi_coefficient);
    let rhs = del_sigma_with(&phi_x, ROUTE_B)?;
    Ok(sup_diff(&lhs, &rhs.ds))
}

/// The four chart-coordinate shifts used for `∂_M`, in the order
/// `+δ, −δ, +iδ, −iδ`.
fn m_shifts(p: &SpherePoint) -> [SpherePoint; 4] {
    let h = M_STEP;
    [Complex64::new(h, 0.0), Complex64::new(-h, 0.0), Complex64::new(0.0, h), Complex64::new(0.0, -h)]
        .map(|d| SpherePoint::new(p.coord + d, p.chart))
}

/// Applies `∂_M` to a Σ-form-valued quantity `q` computed on the shifted
/// samples, combining `(q(+δ) − q(−δ)) − i(q(+iδ) − q(−iδ))` over `2δ`.
fn del_m_of<F>(f: &SampledFunction, q: F) -> Result<Vec<Complex64>>
where
    F: Fn(&SampledFunction) -> Result<Vec<Complex64>>,
{
    let shifted: Vec<SpherePoint> = f.points.iter().flat_map(m_shifts).collect();
    let g = f.resampled(shifted)?;
    let vals = q(&g)?;
    let n = f.grid.len();
    let mut out = Vec::with_capacity(f.values.len());
    for m in 0..f.points.len() {
        for k in 0..n {
            let at = |r: usize| vals[(4 * m + r) * n + k];
            out.push(((at(0) - at(1)) - I * (at(2) - at(3))) / (2.0 * M_STEP));
        }
    }
    if out.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(LabError::NonFinite("∂_M"));
    }
    Ok(out)
}

/// `‖∂_M(∂̄_Σ f) − ∂̄_Σ(∂_M f)‖_∞` on the `∂_s` components. Needs a
/// closure-backed sample.
pub fn diagram_defect_1(f: &SampledFunction) -> Result<f64> {
    check_grid(f)?;
    let lhs = del_m_of(f, |g| {
        let (gs, gt) = sigma_partials(g, ROUTE_A)?;
        Ok(gs.iter().zip(&gt).map(|(a, b)| a + I * b).collect())
    })?;
    let dm = del_m_field(f)?;
    let (ms, mt) = sigma_partials(&dm, ROUTE_B)?;
    let rhs: Vec<Complex64> = ms.iter().zip(&mt).map(|(a, b)| a + I * b).collect();
    Ok(sup_diff(&lhs, &rhs))
}

/// The perturbation generated by `f`, computed along both sides of the
/// commuting square.
#[derive(Debug, Clone)]
pub struct ExactPerturbation {
    /// `∂̄_Σ(Φ⁻¹(∂_M f))`.
    pub p_a: SigmaForm,
    /// `Φ⁻¹(∂_M(∂_Σ f))`.
    pub p_b: SigmaForm,
    pub defect: f64,
}

/// Both realizations of the perturbation generated by `f`, as vector-valued
/// `(0,1)_Σ` forms in the chart of each M-sample.
pub fn exact_perturbation_two_ways(f: &SampledFunction) -> Result<ExactPerturbation> {
    check_grid(f)?;
    let n = f.grid.len();

    let x = del_m_field(f)?.map_pointwise(phi_inverse);
    let p_a = typed_form(&x, dbar_vector(&x, ROUTE_A)?, SigmaType::ZeroOne);

    let dm_del = del_m_of(f, |g| Ok(del_sigma_with(g, ROUTE_B)?.ds))?;
    let ds_b = dm_del.into_iter().enumerate().map(|(k, c)| phi_inverse(&f.points[k / n], c)).collect();
    let p_b = typed_form(f, ds_b, SigmaType::ZeroOne);

    let defect = p_a.sup_distance(&p_b)?;
    Ok(ExactPerturbation { p_a, p_b, defect })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CylinderGrid;
    use crate::hamiltonian::{generating_function, perturbation_form, PerturbationSpec, PsiProfile};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn points() -> Vec<SpherePoint> {
        vec![SpherePoint::origin(), SpherePoint::from_z(c(0.6, -0.2)), SpherePoint::from_w(c(0.1, 0.3))]
    }

    fn grids() -> [CylinderGrid; 3] {
        let g = CylinderGrid::symmetric(1.0, 25, 16).unwrap();
        [g, g.refined(), g.refined().refined()]
    }

    fn ratios(d: [f64; 3]) -> [f64; 2] {
        [d[0] / d[1], d[1] / d[2]]
    }

    #[test]
    fn diagram0_vanishes_for_sigma_independent_field() {
        let g = grids()[0];
        let x = SampledFunction::from_fn(g, points(), |_, _, p| c(1.0, 0.5) * p.coord + 1.0);
        assert!(diagram_defect_0(&x).unwrap() < 1e-12);
    }

    #[test]
    fn diagram0_second_order() {
        let d = grids().map(|g| {
            let x = SampledFunction::from_fn(g, points(), |s, t, p| {
                (s.sin() * c(0.0, 2.0 * PI * t).exp()) * (p.coord + 1.0)
            });
            diagram_defect_0(&x).unwrap()
        });
        for r in ratios(d) {
            assert!((3.5..=4.5).contains(&r), "{d:?}");
        }
    }

    #[test]
    fn diagram0_linear_in_s_is_exact() {
        let g = grids()[0];
        let x = SampledFunction::from_fn(g, points(), |s, _, _| c(s, 0.0));
        assert!(diagram_defect_0(&x).unwrap() < 1e-12);
    }

    #[test]
    fn diagram1_constant_and_holomorphic() {
        let g = grids()[0];
        let k = SampledFunction::from_fn(g, points(), |_, _, _| c(2.0, -1.0));
        assert!(diagram_defect_1(&k).unwrap() < 1e-9);
        let h = SampledFunction::from_fn(g, points(), |s, t, _| c(s, t));
        assert!(diagram_defect_1(&h).unwrap() < 1e-6);
    }

    #[test]
    fn diagram1_second_order() {
        let d = grids().map(|g| {
            let f = SampledFunction::from_fn(g, points(), |s, t, p| {
                c((2.0 * s).sin() * p.coord.re, (2.0 * PI * t).cos() * p.coord.im)
            });
            diagram_defect_1(&f).unwrap()
        });
        for r in ratios(d) {
            assert!((3.5..=4.5).contains(&r), "{d:?}");
        }
    }

    #[test]
    fn diagram1_needs_closure() {
        let g = grids()[0];
        let f = SampledFunction::from_values(g, points(), vec![c(0.0, 0.0); 3 * g.len()]).unwrap();
        assert_eq!(diagram_defect_1(&f), Err(LabError::NoClosure));
    }

    #[test]
    fn zero_function_gives_zero_perturbation() {
        let g = grids()[0];
        let f = SampledFunction::from_fn(g, points(), |_, _, _| c(0.0, 0.0));
        let e = exact_perturbation_two_ways(&f).unwrap();
        assert_eq!(e.defect, 0.0);
        assert!(e.p_a.ds.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn hamiltonian_generating_function_reproduces_perturbation() {
        let spec = PerturbationSpec::new(PsiProfile::bump(-2.5, 2.5, 1.0).unwrap(), 1.0).unwrap();
        let g0 = CylinderGrid::symmetric(3.0, 121, 16).unwrap();
        let mut track = Vec::new();
        let defects = [g0, g0.refined(), g0.refined().refined()].map(|g| {
            let sc = spec.clone();
            let f = SampledFunction::try_from_fn(g, points(), move |s, _, p| generating_function(s, p, &sc)).unwrap();
            let e = exact_perturbation_two_ways(&f).unwrap();
            let mut worst: f64 = 0.0;
            for (m, p) in points().iter().enumerate() {
                for i in 0..g.n_s {
                    let k = e.p_b.index(m, i, 0);
                    let want = perturbation_form(g.s(i), 0.0, p, &spec);
                    worst =
                        worst.max((e.p_b.ds[k] - want.on_ds.value).norm()).max((e.p_b.dt[k] - want.on_dt.value).norm());
                }
            }
            track.push(worst);
            e.defect
        });
        // Route B is fourth order, so it tracks P closely once the bump is resolved.
        assert!(track[2] < 1e-4 && track[2] < track[0], "{track:?}");
        for r in ratios(defects) {
            assert!((3.5..=4.5).contains(&r), "{defects:?}");
        }
    }
}
