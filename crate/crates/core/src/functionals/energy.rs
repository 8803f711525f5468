use rayon::prelude::*;

use super::area::DENSITY_STENCIL;
use crate::error::{LabError, Result};
use crate::hamiltonian::{grad_hamiltonian, PerturbationSpec};
use crate::map::MapSample;
use crate::sphere::{fs_area_density, ComplexStructure};

/// Energy of the graph `ũ(s, t) = ((s, t), u(s, t))` for the product form
/// `Nω₀ + ω` and the structure `J̃` built from the perturbation of `spec`.
///
/// `ω₀` is `ds∧dt` scaled to unit mass on the truncated cylinder, and
/// `|V|²` is read as `ω̃(V, J̃V)`, so at a node
/// `|∂_s ũ|² + |∂_t ũ|² = 2N/vol + |u_s|² + |u_t|² + ω(u_s, J∇H) + ω(u_t, ∇H)`.
pub fn graph_energy(u: &MapSample, spec: &PerturbationSpec, n: f64) -> Result<f64> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(LabError::Config(format!("energy weight N must be positive, got {n}")));
    }
    let g = u.grid;
    let need = DENSITY_STENCIL.min_nodes();
    if g.n_s < need {
        return Err(LabError::GridTooSmall { axis: "s", have: g.n_s, need });
    }
    u.check_tearing()?;
    let base = 2.0 * n / g.measure();
    let j = ComplexStructure::Standard;
    let rows: Vec<f64> = (0..g.n_s)
        .into_par_iter()
        .map(|i| {
            let s = g.s(i);
            let mut acc = 0.0;
            for jj in 0..g.n_t {
                let p = u.get(i, jj);
                let (us, ut) = u.derivatives(i, jj, DENSITY_STENCIL)?;
                let grad = grad_hamiltonian(s, &p, spec).value;
                // |x|² = ω(x, Jx) and ω(x, y) = Im(x̄y)·weight.
                let sq = fs_area_density(&p, us, j.apply(&p, us)) + fs_area_density(&p, ut, j.apply(&p, ut));
                let cross = fs_area_density(&p, us, j.apply(&p, grad)) + fs_area_density(&p, ut, grad);
                acc += base + sq + cross;
            }
            Ok(acc * g.h_t())
        })
        .collect::<Result<_>>()?;
    let h = g.h_s();
    let integral: f64 = rows.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).sum();
    Ok(0.5 * integral)
}
