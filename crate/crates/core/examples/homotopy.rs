//! λ-continuation from the holomorphic solution, with a checkpoint of the
//! last stage.
use holo_lab::families::SolutionFamily;
use holo_lab::grid::CylinderGrid;
use holo_lab::hamiltonian::{PerturbationSpec, PsiProfile};
use holo_lab::solver::checkpoint::{load_map, save_map};
use holo_lab::solver::homotopy_continue;

fn main() -> holo_lab::error::Result<()> {
    let g = CylinderGrid::symmetric(6.0, 400, 64)?;
    let spec = PerturbationSpec::new(PsiProfile::bump(-1.0, 1.0, 1.0)?, 1.0)?;
    let fam = SolutionFamily::properly_perturbed(1, spec)?;
    let start = fam.with_lambda(0.0)?.sample(&g)?;
    let res = homotopy_continue(&start, &fam, &[0.0, 0.25, 0.5, 0.75, 1.0], 1e-9, 12)?;
    for st in &res.stages {
        println!(
            "λ = {:.2}  area {:.9}  iterations {}  residual {:.2e}",
            st.lambda, st.area, st.report.iterations, st.report.final_residual
        );
    }
    println!("completed {}  drift {:.3e}", res.completed(), res.area_drift());

    if let Some(last) = res.stages.last() {
        let path = std::env::temp_dir().join("holo-lab-homotopy.map");
        save_map(&last.solution, &path)?;
        let back = load_map(&path)?;
        println!("checkpoint {} reloads equal: {}", path.display(), back == last.solution);
    }
    Ok(())
}
