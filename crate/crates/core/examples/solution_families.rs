//! Closed-form solutions: evaluation, residual under refinement, area.
use std::f64::consts::PI;

use holo_lab::families::SolutionFamily;
use holo_lab::functionals::symplectic_area;
use holo_lab::grid::CylinderGrid;
use holo_lab::hamiltonian::{PerturbationSpec, PsiProfile};

fn main() -> holo_lab::error::Result<()> {
    let spec = PerturbationSpec::new(PsiProfile::bump(-1.0, 1.0, 1.0)?, 1.0)?;
    let families = [
        ("holomorphic k=1", SolutionFamily::holomorphic(1)),
        ("properly perturbed k=2", SolutionFamily::properly_perturbed(2, spec)?),
        ("hofer-salamon k=-1 tau=2", SolutionFamily::hofer_salamon(-1, 2.0)?),
    ];
    for (name, f) in &families {
        println!("{name}: valid {}  degree {:?}  u(0.3, 0.1) = {:?}", f.validity(), f.degree(), f.evaluate(0.3, 0.1)?);
        let mut g = CylinderGrid::symmetric(1.5, 121, 32)?;
        let mut last = None;
        for _ in 0..3 {
            let r = f.residual_on(&g)?;
            match last {
                Some(p) => println!("  {:>4}x{:<3} residual {r:.3e}  ratio {:.2}", g.n_s, g.n_t, p / r),
                None => println!("  {:>4}x{:<3} residual {r:.3e}", g.n_s, g.n_t),
            }
            last = Some(r);
            g = g.refined();
        }
    }

    for (k, tau, half, n_s, n_t) in [(1, 0.0, 8.0, 800, 64), (-1, 2.0, 10.0, 2000, 128)] {
        let g = CylinderGrid::symmetric(half, n_s, n_t)?;
        let a = symplectic_area(&SolutionFamily::hofer_salamon(k, tau)?.sample(&g)?)?;
        println!("area k={k} tau={tau}: {:.9}  πk = {:.9}  tail {:.1e}", a.area, PI * k as f64, a.tail_estimate);
    }
    Ok(())
}
