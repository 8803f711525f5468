//! The discrete ∂̄_Σ / ∂_M commuting squares refine at second order.
use std::f64::consts::PI;

use holo_lab::calculus::{diagram_defect_0, diagram_defect_1, exact_perturbation_two_ways, SampledFunction};
use holo_lab::grid::CylinderGrid;
use holo_lab::hamiltonian::{generating_function, PerturbationSpec, PsiProfile};
use holo_lab::sphere::SpherePoint;
use num_complex::Complex64;

fn main() -> holo_lab::error::Result<()> {
    let c = Complex64::new;
    let points = vec![SpherePoint::origin(), SpherePoint::from_z(c(0.6, -0.2)), SpherePoint::from_w(c(0.1, 0.3))];
    let mut g = CylinderGrid::symmetric(1.0, 25, 16)?;
    let wide = PerturbationSpec::new(PsiProfile::bump(-2.5, 2.5, 1.0)?, 1.0)?;
    let mut g3 = CylinderGrid::symmetric(3.0, 121, 16)?;
    let mut prev: Option<[f64; 3]> = None;
    println!("{:>9} {:>12} {:>12} {:>12}", "grid", "square 0", "square 1", "exact pert.");
    for _ in 0..3 {
        let x = SampledFunction::from_fn(g, points.clone(), move |s, t, p| {
            s.sin() * c(0.0, 2.0 * PI * t).exp() * (p.coord + 1.0)
        });
        let f = SampledFunction::from_fn(g, points.clone(), move |s, t, p| {
            c((2.0 * s).sin() * p.coord.re, (2.0 * PI * t).cos() * p.coord.im)
        });
        // A generating function built from a bump wide enough to resolve.
        let sc = wide.clone();
        let h = SampledFunction::try_from_fn(g3, points.clone(), move |s, _, p| generating_function(s, p, &sc))?;
        let d = [diagram_defect_0(&x)?, diagram_defect_1(&f)?, exact_perturbation_two_ways(&h)?.defect];
        print!("{:>4}x{:<4} {:>12.3e} {:>12.3e} {:>12.3e}", g.n_s, g.n_t, d[0], d[1], d[2]);
        if let Some(p) = prev {
            print!("   ratios {:.2} {:.2} {:.2}", p[0] / d[0], p[1] / d[1], p[2] / d[2]);
        }
        println!();
        prev = Some(d);
        g = g.refined();
        g3 = g3.refined();
    }
    Ok(())
}
