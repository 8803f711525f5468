//! Area, graph energy, the taming margin and the ε-norm.
use std::f64::consts::PI;

use holo_lab::calculus::SampledFunction;
use holo_lab::families::SolutionFamily;
use holo_lab::functionals::{
    epsilon_partial_sums, graph_energy, perturbation_sup_norm, row_densities, symplectic_area, taming_margin,
    EpsilonSequence,
};
use holo_lab::grid::CylinderGrid;
use holo_lab::hamiltonian::{PerturbationSpec, PsiProfile};
use holo_lab::sphere::SpherePoint;
use num_complex::Complex64;

fn main() -> holo_lab::error::Result<()> {
    let g = CylinderGrid::symmetric(6.0, 200, 32)?;
    let spec = PerturbationSpec::holomorphic();
    let u = SolutionFamily::holomorphic(1).sample(&g)?;
    let area = symplectic_area(&u)?;
    let n = 10.0;
    let e = graph_energy(&u, &spec, n)?;
    println!(
        "area {:.6} (π = {PI:.6})  E - N = {:.6}  |E - N - area| {:.2e}",
        area.area,
        e - n,
        (e - n - area.area).abs()
    );
    let dens = row_densities(&u)?;
    let peak = dens.iter().cloned().fold(0.0, f64::max);
    println!("density peak {peak:.4} at s = 0: {:.4}", dens[g.n_s / 2]);

    let spec = PerturbationSpec::new(PsiProfile::bump(-1.0, 1.0, 2.0)?, 1.0)?;
    let c = 1.0 / g.measure();
    let f = perturbation_sup_norm(&spec, c);
    let bound = (f / 2.0).powi(2);
    for factor in [0.5, 1.1, 4.0] {
        let n = (factor * bound).max(1e-6);
        let t = taming_margin(&spec, n, 10_000, 42, &g)?;
        println!("N = {factor} (f/2)² = {n:.4e}: min ω̃(V, J̃V) = {:.4e}", t.min_value);
    }

    let small = CylinderGrid::symmetric(1.0, 41, 32)?;
    let h = SampledFunction::from_fn(small, vec![SpherePoint::origin()], |s, t, _| {
        Complex64::new((2.0 * PI * t).sin() * s.cos(), 0.0)
    });
    let sums = epsilon_partial_sums(&h, &EpsilonSequence::factorial(4))?;
    let shown: Vec<String> = sums.iter().map(|x| format!("{x:.4e}")).collect();
    println!("ε-norm partial sums {}", shown.join(", "));
    Ok(())
}
