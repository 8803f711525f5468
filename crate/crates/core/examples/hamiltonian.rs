//! ψ profiles, H = ψ(s)·height and the exactness of the perturbation.
use holo_lab::grid::CylinderGrid;
use holo_lab::hamiltonian::{
    exact_potential, grad_hamiltonian, hamiltonian, height, verify_proper_exactness, PerturbationSpec, PsiProfile,
};
use holo_lab::lab::gradient_duality_defect;
use holo_lab::sphere::SpherePoint;
use num_complex::Complex64;

fn main() -> holo_lab::error::Result<()> {
    let psi = PsiProfile::bump(-1.0, 1.0, 1.0)?;
    println!("bump on [-1, 1]: mass {:.12}  sup {:.4}", psi.total_mass()?, psi.sup_abs());
    for s in [-1.5, -0.5, 0.0, 0.5, 1.5] {
        println!("  s = {s:>4}  ψ = {:.6}  ∫ψ = {:.6}", psi.eval(s), psi.cumulative(s)?);
    }

    let spec = PerturbationSpec::new(psi, 1.0)?;
    let p = SpherePoint::from_z(Complex64::new(0.5, 0.5));
    println!(
        "height {:.6}  H(0, p) = {:.6}  ∇H = {:.6}  potential {:.6}",
        height(&p),
        hamiltonian(0.0, &p, &spec),
        grad_hamiltonian(0.0, &p, &spec).value,
        exact_potential(0.0, &p, &spec)?
    );

    let domain = CylinderGrid::symmetric(2.0, 200, 64)?;
    println!("properly exact: {}", spec.properly_exact());
    println!("exactness defect on 200x64: {:.3e}", verify_proper_exactness(&spec, &domain)?);
    println!("max |<∇H, v> - dH(v)| over 1000 samples: {:.3e}", gradient_duality_defect(&spec, &domain, 1000, 7)?);

    let constant = PerturbationSpec::new(PsiProfile::constant(2.0), 1.0)?;
    println!("constant ψ properly exact: {}", constant.properly_exact());
    Ok(())
}
