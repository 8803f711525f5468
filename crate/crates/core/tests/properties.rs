//! Seeded property suites for the invariants each module promises.

use holo_lab::calculus::SampledFunction;
use holo_lab::families::SolutionFamily;
use holo_lab::functionals::{epsilon_partial_sums, taming_margin, EpsilonSequence};
use holo_lab::grid::CylinderGrid;
use holo_lab::hamiltonian::{PerturbationSpec, PsiProfile};
use holo_lab::solver::{homotopy_continue, newton_solve, validate_schedule};
use holo_lab::sphere::{fs_area_density, fs_inner, phi_map, Chart, SpherePoint, TangentVector};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A point in the overlap annulus `0.5 <= |z| <= 2`, in chart Z.
fn annulus_point() -> impl Strategy<Value = SpherePoint> {
    (0.5..2.0f64, 0.0..std::f64::consts::TAU).prop_map(|(r, a)| SpherePoint::from_z(Complex64::from_polar(r, a)))
}

fn small() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c(a, b))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn geometry_is_chart_independent(p in annulus_point(), x in small(), y in small(), ds in small(), dt in small()) {
        let w = p.in_chart(Chart::W).unwrap();
        let (xv, yv) = (TangentVector::new(p, x), TangentVector::new(p, y));
        let (xw, yw) = (xv.in_chart(Chart::W).unwrap(), yv.in_chart(Chart::W).unwrap());
        prop_assert!(rel(fs_inner(&p, &xv, &yv).unwrap(), fs_inner(&w, &xw, &yw).unwrap()) < 1e-10);
        prop_assert!(rel(phi_map(&p, &xv, &yv).unwrap().norm(), phi_map(&w, &xw, &yw).unwrap().norm()) < 1e-10);
        // Derivatives push forward by dw/dz = −1/z².
        let dz = -1.0 / (p.coord * p.coord);
        prop_assert!(rel(fs_area_density(&p, ds, dt), fs_area_density(&w, dz * ds, dz * dt)) < 1e-10);
        prop_assert!(p.same_point(&w.chart_switch().unwrap(), 1e-12));
    }

    #[test]
    fn phi_is_conjugate_linear_in_x_and_linear_in_y(p in annulus_point(), x in small(), y in small()) {
        let i = Complex64::i();
        let v = |z| TangentVector::new(p, z);
        let base = phi_map(&p, &v(x), &v(y)).unwrap();
        prop_assert!((phi_map(&p, &v(i * x), &v(y)).unwrap() + i * base).norm() <= 1e-12);
        prop_assert!((phi_map(&p, &v(x), &v(i * y)).unwrap() - i * base).norm() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn epsilon_partial_sums_never_decrease(
        a in small(), b in small(), freq in 0usize..3, w in prop::collection::vec(1e-8..1.0f64, 1..5)
    ) {
        let g = CylinderGrid::symmetric(1.0, 21, 16).unwrap();
        let f = SampledFunction::from_fn(g, vec![SpherePoint::origin(), SpherePoint::from_z(c(0.3, 0.3))], move |s, t, p| {
            (a * c(0.0, std::f64::consts::TAU * freq as f64 * t).exp() + b * s * s) * (1.0 + p.coord)
        });
        let mut w = w;
        w.sort_by(|x, y| y.total_cmp(x));
        let sums = epsilon_partial_sums(&f, &EpsilonSequence::new(w).unwrap()).unwrap();
        prop_assert!(sums[0] >= 0.0);
        prop_assert!(sums.windows(2).all(|p| p[1] >= p[0]));
    }

    #[test]
    fn schedules_outside_unit_interval_or_unsorted_are_rejected(v in prop::collection::vec(-0.5..1.5f64, 1..6)) {
        let inside = v.iter().all(|l| (0.0..=1.0).contains(l));
        let up = v.windows(2).all(|w| w[1] >= w[0]);
        let down = v.windows(2).all(|w| w[1] <= w[0]);
        prop_assert_eq!(validate_schedule(&v).is_ok(), inside && (up || down));
    }

    #[test]
    fn taming_is_seed_deterministic(seed in any::<u64>()) {
        let spec = PerturbationSpec::new(PsiProfile::bump(-1.0, 1.0, 1.0).unwrap(), 1.0).unwrap();
        let g = CylinderGrid::symmetric(2.0, 40, 16).unwrap();
        let a = taming_margin(&spec, 50.0, 200, seed, &g).unwrap();
        let b = taming_margin(&spec, 50.0, 200, seed, &g).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn solves_are_bit_identical() {
    let g = CylinderGrid::symmetric(3.0, 120, 32).unwrap();
    let spec = PerturbationSpec::new(PsiProfile::bump(-1.0, 1.0, 0.5).unwrap(), 1.0).unwrap();
    let fam = SolutionFamily::properly_perturbed(1, spec.clone()).unwrap();
    let u0 = fam.with_lambda(0.0).unwrap().sample(&g).unwrap();
    let a = homotopy_continue(&u0, &fam, &[0.0, 0.5, 1.0], 1e-9, 12).unwrap();
    let b = homotopy_continue(&u0, &fam, &[0.0, 0.5, 1.0], 1e-9, 12).unwrap();
    assert!(a.completed());
    assert_eq!(a, b);
    let (x, rx) = newton_solve(&a.stages[2].solution, &spec, 1e-9, 3).unwrap();
    let (y, ry) = newton_solve(&a.stages[2].solution, &spec, 1e-9, 3).unwrap();
    assert_eq!((x, rx), (y, ry));
}

#[test]
fn reversed_schedule_returns_to_holomorphic_area() {
    let g = CylinderGrid::symmetric(6.0, 400, 64).unwrap();
    let spec = PerturbationSpec::new(PsiProfile::bump(-1.0, 1.0, 1.0).unwrap(), 1.0).unwrap();
    let fam = SolutionFamily::properly_perturbed(1, spec).unwrap();
    let u1 = fam.sample(&g).unwrap();
    let back = homotopy_continue(&u1, &fam, &[1.0, 0.5, 0.0], 1e-9, 12).unwrap();
    assert!(back.completed(), "{:?}", back.failure);
    let hol = holo_lab::functionals::symplectic_area(&SolutionFamily::holomorphic(1).sample(&g).unwrap()).unwrap();
    let last = back.stages.last().unwrap().area;
    assert!((last - hol.area).abs() < 1e-3, "{last} vs {}", hol.area);
}
