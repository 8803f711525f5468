//! Newton on the discrete equation: a noisy start, then a perturbed one
//! that needs the chart interface moved.
use holo_lab::families::SolutionFamily;
use holo_lab::functionals::symplectic_area;
use holo_lab::grid::CylinderGrid;
use holo_lab::hamiltonian::{PerturbationSpec, PsiProfile};
use holo_lab::map::MapSample;
use holo_lab::solver::{newton_solve, residual};
use holo_lab::sphere::SpherePoint;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn jitter(u: &MapSample, amp: f64, seed: u64) -> MapSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = u.clone();
    let g = u.grid;
    for i in 1..g.n_s - 1 {
        for j in 0..g.n_t {
            let k = g.index(i, j);
            let d = Complex64::new(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp));
            v.values[k] = SpherePoint::new(v.values[k].coord + d, v.values[k].chart);
        }
    }
    v
}

fn main() -> holo_lab::error::Result<()> {
    let g = CylinderGrid::symmetric(2.0, 80, 32)?;
    let spec = PerturbationSpec::holomorphic();
    let exact = SolutionFamily::holomorphic(1).sample(&g)?;
    let floor = residual(&exact, &spec)?.sup_norm();
    let (_, rep) = newton_solve(&jitter(&exact, 1e-2, 9), &spec, 1e-10, 10)?;
    println!("noisy start, exact sample residual {floor:.2e}");
    for (k, r) in rep.residual_history.iter().enumerate() {
        println!("  iter {k}: {r:.3e}");
    }

    // λ = 1 with the λ = 0 sample as start: the solution's chart interface
    // sits elsewhere, so the solver relocates it once.
    let g = CylinderGrid::symmetric(4.0, 160, 32)?;
    let spec = PerturbationSpec::new(PsiProfile::bump(-1.0, 1.0, 1.0)?, 1.0)?;
    let fam = SolutionFamily::properly_perturbed(1, spec.clone())?;
    let mut start = SolutionFamily::holomorphic(1).sample(&g)?;
    let trace = fam.sample(&g)?;
    for r in trace.boundary_rows() {
        for j in 0..g.n_t {
            start.values[g.index(r, j)] = trace.get(r, j);
        }
    }
    let (u, rep) = newton_solve(&start, &spec, 1e-9, 20)?;
    println!(
        "perturbed: converged {}  iterations {}  relocations {}  residual {:.2e}",
        rep.converged, rep.iterations, rep.relocations, rep.final_residual
    );
    // Interior equations are scale invariant, so compare areas, not nodes.
    println!("area {:.6}  closed form {:.6}", symplectic_area(&u)?.area, symplectic_area(&trace)?.area);
    Ok(())
}
