use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::CylinderGrid;
use crate::hamiltonian::{grad_hamiltonian, PerturbationSpec};
use crate::sphere::form::{inner_raw, omega_raw, weight};
use crate::sphere::{omega_operator_norm, ComplexStructure, SpherePoint};

/// A tangent vector to `Σ × S²`: `a = α∂_s + β∂_t` and `v` in `p`'s chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductVector {
    pub alpha: f64,
    pub beta: f64,
    pub v: Complex64,
}

/// `ω̃(V, J̃V)` at `(s, p)` for `ω̃ = Nω₀ + ω`, where `ω₀ = c·ds∧dt` and
/// `J̃[a; v] = [ja; −P(ja) + Jv]` with `P = ∇H ds − J∇H dt`.
pub fn taming_form(spec: &PerturbationSpec, n: f64, c: f64, s: f64, p: &SpherePoint, x: ProductVector) -> f64 {
    let j = ComplexStructure::Standard;
    let grad = grad_hamiltonian(s, p, spec).value;
    // ja = −β∂_s + α∂_t, and P(α'∂_s + β'∂_t) = (α' − iβ')∇H.
    let (ja_s, ja_t) = (-x.beta, x.alpha);
    let p_ja = Complex64::new(ja_s, -ja_t) * grad;
    let base = n * c * (x.alpha * x.alpha + x.beta * x.beta);
    base + omega_raw(p, x.v, -p_ja + j.apply(p, x.v))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TamingResult {
    /// Smallest sampled `ω̃(V, J̃V)` over unit-normalized `V`.
    pub min_value: f64,
    /// `‖ω‖_∞ · sup‖P‖`.
    pub f: f64,
    /// `(f/2)²`.
    pub bound: f64,
    pub samples: usize,
}

/// `sup‖P‖` against the metric `ω₀(·, j·)` on `Σ` and the Fubini–Study
/// metric: `|∇H| ≤ 2λ sup|ψ|`, divided by `√c` for the scaling of `ω₀`.
pub fn perturbation_sup_norm(spec: &PerturbationSpec, c: f64) -> f64 {
    2.0 * spec.lambda * spec.psi.sup_abs() / c.sqrt()
}

pub(crate) fn random_point(rng: &mut ChaCha8Rng) -> SpherePoint {
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        let z: f64 = rng.sample(StandardNormal);
        let r = (x * x + y * y + z * z).sqrt();
        if r < 1e-12 {
            continue;
        }
        let (x, y, z) = (x / r, y / r, z / r);
        // Stereographic projection from the north pole, z = height.
        let p = if z < 0.0 {
            SpherePoint::from_z(Complex64::new(x, y) / (1.0 - z))
        } else {
            SpherePoint::from_w(Complex64::new(x, -y) / (1.0 + z))
        };
        return p.normalized();
    }
}

/// Samples `ω̃(V, J̃V)` at seeded random `(s, t, p, V)` over `domain × S²`.
/// `V` is normalized to unit length for `Nω₀(·, j·) ⊕ g_FS`, so the result
/// is comparable across `N`.
pub fn taming_margin(
    spec: &PerturbationSpec,
    n: f64,
    sample_count: usize,
    seed: u64,
    domain: &CylinderGrid,
) -> Result<TamingResult> {
    if sample_count == 0 {
        return Err(LabError::Config("taming needs at least one sample".into()));
    }
    if !(n > 0.0 && n.is_finite()) {
        return Err(LabError::Config(format!("taming weight N must be positive, got {n}")));
    }
    let c = 1.0 / domain.measure();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_value = f64::INFINITY;
    let mut omega_sup: f64 = 0.0;
    for _ in 0..sample_count {
        let s = rng.gen_range(domain.s_min..=domain.s_max);
        let p = random_point(&mut rng);
        omega_sup = omega_sup.max(omega_operator_norm(&p));
        let alpha: f64 = rng.sample(StandardNormal);
        let beta: f64 = rng.sample(StandardNormal);
        let v = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) / weight(&p).sqrt();
        let len2 = n * c * (alpha * alpha + beta * beta) + inner_raw(&p, v, v);
        let x = ProductVector { alpha, beta, v };
        min_value = min_value.min(taming_form(spec, n, c, s, &p, x) / len2);
    }
    let f = omega_sup * perturbation_sup_norm(spec, c);
    Ok(TamingResult { min_value, f, bound: 0.25 * f * f, samples: sample_count })
}
