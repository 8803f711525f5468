use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::SampledFunction;
use crate::error::{LabError, Result};
use crate::grid::{CylinderGrid, Stencil};

/// Weights `ε_0 ≥ ε_1 ≥ … ≥ ε_{n_max} > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EpsilonSequence {
    eps: Vec<f64>,
}

impl EpsilonSequence {
    pub fn new(eps: Vec<f64>) -> Result<Self> {
        if eps.is_empty() {
            return Err(LabError::Config("ε sequence is empty".into()));
        }
        if eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(LabError::Config("ε_k must be positive and finite".into()));
        }
        if eps.windows(2).any(|w| w[1] > w[0]) {
            return Err(LabError::Config("ε sequence must be non-increasing".into()));
        }
        Ok(EpsilonSequence { eps })
    }

    /// `ε_k = (k!)^{-2}` for `k = 0..=n_max`.
    pub fn factorial(n_max: usize) -> Self {
        let mut eps = Vec::with_capacity(n_max + 1);
        let mut fact = 1.0;
        for k in 0..=n_max {
            if k > 0 {
                fact *= k as f64;
            }
            eps.push(1.0 / (fact * fact));
        }
        EpsilonSequence { eps }
    }

    pub fn n_max(&self) -> usize {
        self.eps.len() - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.eps
    }
}

impl TryFrom<Vec<f64>> for EpsilonSequence {
    type Error = LabError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        EpsilonSequence::new(v)
    }
}

impl From<EpsilonSequence> for Vec<f64> {
    fn from(e: EpsilonSequence) -> Self {
        e.eps
    }
}

fn d_s(g: &CylinderGrid, f: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(f.len());
    for i in 0..g.n_s {
        for j in 0..g.n_t {
            out.push(Stencil::Second.d_open(|k| f[g.index(k, j)], i, g.n_s, g.h_s()));
        }
    }
    out
}

fn d_t(g: &CylinderGrid, f: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(f.len());
    for i in 0..g.n_s {
        for j in 0..g.n_t {
            out.push(Stencil::Second.d_periodic(|o| f[g.index(i, g.wrap_t(j as isize + o))], g.h_t()));
        }
    }
    out
}

/// Trapezoid-in-`s`, rectangle-in-`t` `L²` norm squared.
fn l2_sq(g: &CylinderGrid, f: &[Complex64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..g.n_s {
        let w = g.s_weight(i) * g.h_t();
        for j in 0..g.n_t {
            acc += w * f[g.index(i, j)].norm_sqr();
        }
    }
    acc
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `⟨∇^k f, ∇^k f⟩` for `k = 0..=n_max`, summed over the M-samples.
pub fn gradient_norms(f: &SampledFunction, n_max: usize) -> Result<Vec<f64>> {
    let g = f.grid;
    let need = 2 * n_max + 1;
    if g.n_s < need {
        return Err(LabError::GridTooSmall { axis: "s", have: g.n_s, need });
    }
    if g.n_t < need {
        return Err(LabError::GridTooSmall { axis: "t", have: g.n_t, need });
    }
    let n = g.len();
    let mut norms = vec![0.0; n_max + 1];
    for m in 0..f.points.len() {
        let base = f.values[m * n..(m + 1) * n].to_vec();
        // t_der[b] = ∂_t^b f; mixed[b][a] = ∂_s^a ∂_t^b f.
        let mut t_der = vec![base];
        for b in 1..=n_max {
            let next = d_t(&g, &t_der[b - 1]);
            t_der.push(next);
        }
        for (b, tb) in t_der.iter().enumerate() {
            let mut cur = tb.clone();
            for a in 0..=(n_max - b) {
                if a > 0 {
                    cur = d_s(&g, &cur);
                }
                let k = a + b;
                norms[k] += binomial(k, a) * l2_sq(&g, &cur);
            }
        }
    }
    Ok(norms)
}

/// Partial sums `Σ_{k≤n} ε_k ⟨∇^k f, ∇^k f⟩` for `n = 0..=n_max`.
pub fn epsilon_partial_sums(f: &SampledFunction, eps: &EpsilonSequence) -> Result<Vec<f64>> {
    let norms = gradient_norms(f, eps.n_max())?;
    let mut acc = 0.0;
    Ok(norms
        .iter()
        .zip(eps.weights())
        .map(|(v, e)| {
            acc += e * v;
            acc
        })
        .collect())
}

/// `‖f‖²_ε` truncated at `n_max`.
pub fn epsilon_norm(f: &SampledFunction, eps: &EpsilonSequence) -> Result<f64> {
    Ok(*epsilon_partial_sums(f, eps)?.last().expect("n_max + 1 ≥ 1 terms"))
}
