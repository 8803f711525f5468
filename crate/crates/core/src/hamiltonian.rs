//! The height Hamiltonian `H(s, z) = λ ψ(s) (|z|² − 1)/(|z|² + 1)` on the
//! sphere, its gradient, the perturbation `P = ∇H ds − J∇H dt`, and the
//! potential `g` that makes `P` properly exact when `ψ` has compact support.

use num_complex::Complex64;
use quadrature::double_exponential;
use serde::{Deserialize, Serialize};

use crate::calculus::{dbar_sigma, SampledFunction};
use crate::error::{LabError, Result};
use crate::grid::CylinderGrid;
use crate::sphere::{Chart, ComplexStructure, SpherePoint, TangentVector};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Intervals in the cached cumulative table of a bump profile.
const CUMULATIVE_INTERVALS: usize = 2048;
const QUAD_TOL: f64 = 1e-15;

/// Serialized form of a [`PsiProfile`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PsiKind {
    Constant {
        tau: f64,
    },
    Bump {
        support: [f64; 2],
        mass: f64,
    },
    /// Piecewise-linear through `(s, ψ)` samples, zero outside their range.
    Tabulated {
        samples: Vec<[f64; 2]>,
    },
}

/// The profile `ψ(s)` multiplying the Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PsiKind", into = "PsiKind")]
pub struct PsiProfile {
    kind: PsiKind,
    /// Bump normalization, or 0 for the other kinds.
    scale: f64,
    /// Cumulative `∫_{-∞}^{s_k} ψ` at equally spaced nodes over the support.
    table: Vec<f64>,
}

fn unit_bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

impl PsiProfile {
    pub fn constant(tau: f64) -> Self {
        PsiProfile { kind: PsiKind::Constant { tau }, scale: 0.0, table: Vec::new() }
    }

    /// Mollifier `c·exp(−1/(1−x²))` rescaled to `[a, b]`, with `c` chosen by
    /// quadrature so that `∫ψ = mass`.
    pub fn bump(a: f64, b: f64, mass: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && mass.is_finite()) || b <= a {
            return Err(LabError::InvalidPerturbation(format!("bump support [{a}, {b}]")));
        }
        let unit_mass = double_exponential::integrate(unit_bump, -1.0, 1.0, QUAD_TOL).integral;
        let scale = mass / (0.5 * (b - a) * unit_mass);
        let mut profile = PsiProfile { kind: PsiKind::Bump { support: [a, b], mass }, scale, table: Vec::new() };
        let h = (b - a) / CUMULATIVE_INTERVALS as f64;
        let mut table = Vec::with_capacity(CUMULATIVE_INTERVALS + 1);
        let mut acc = 0.0;
        table.push(0.0);
        for k in 0..CUMULATIVE_INTERVALS {
            let lo = a + k as f64 * h;
            acc += double_exponential::integrate(|s| profile.eval(s), lo, lo + h, QUAD_TOL).integral;
            table.push(acc);
        }
        profile.table = table;
        Ok(profile)
    }

    pub fn tabulated(samples: Vec<[f64; 2]>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(LabError::InvalidPerturbation("tabulated ψ needs two samples".into()));
        }
        if samples.windows(2).any(|w| w[1][0] <= w[0][0]) {
            return Err(LabError::InvalidPerturbation("tabulated ψ abscissae must increase strictly".into()));
        }
        if samples.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(LabError::InvalidPerturbation("tabulated ψ has non-finite entries".into()));
        }
        let mut table = vec![0.0];
        let mut acc = 0.0;
        for w in samples.windows(2) {
            acc += 0.5 * (w[1][0] - w[0][0]) * (w[0][1] + w[1][1]);
            table.push(acc);
        }
        Ok(PsiProfile { kind: PsiKind::Tabulated { samples }, scale: 0.0, table })
    }

    pub fn kind(&self) -> &PsiKind {
        &self.kind
    }

    /// Closed support `[a, b]`, or `None` for a constant profile.
    pub fn support(&self) -> Option<(f64, f64)> {
        match &self.kind {
            PsiKind::Constant { .. } => None,
            PsiKind::Bump { support, .. } => Some((support[0], support[1])),
            PsiKind::Tabulated { samples } => Some((samples[0][0], samples[samples.len() - 1][0])),
        }
    }

    /// A zero constant counts as compactly supported.
    pub fn has_compact_support(&self) -> bool {
        match &self.kind {
            PsiKind::Constant { tau } => *tau == 0.0,
            _ => true,
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match &self.kind {
            PsiKind::Constant { tau } => *tau,
            PsiKind::Bump { support: [a, b], .. } => {
                let x = (2.0 * s - a - b) / (b - a);
                self.scale * unit_bump(x)
            }
            PsiKind::Tabulated { samples } => {
                let n = samples.len();
                if s < samples[0][0] || s > samples[n - 1][0] {
                    return 0.0;
                }
                let k = samples.partition_point(|p| p[0] <= s).clamp(1, n - 1);
                let (s0, v0) = (samples[k - 1][0], samples[k - 1][1]);
                let (s1, v1) = (samples[k][0], samples[k][1]);
                v0 + (v1 - v0) * (s - s0) / (s1 - s0)
            }
        }
    }

    /// `∫_{-∞}^{s} ψ`; diverges for a nonzero constant profile.
    pub fn cumulative(&self, s: f64) -> Result<f64> {
        match &self.kind {
            PsiKind::Constant { tau } => {
                if *tau == 0.0 {
                    Ok(0.0)
                } else {
                    Err(LabError::NotProperlyExact(format!("∫ψ diverges for constant ψ = {tau}")))
                }
            }
            PsiKind::Bump { support: [a, b], .. } => {
                if s <= *a {
                    return Ok(0.0);
                }
                if s >= *b {
                    return Ok(self.table[CUMULATIVE_INTERVALS]);
                }
                // Cubic Hermite on the cached table, with ψ as the exact slope.
                let h = (b - a) / CUMULATIVE_INTERVALS as f64;
                let k = (((s - a) / h) as usize).min(CUMULATIVE_INTERVALS - 1);
                let s0 = a + k as f64 * h;
                let x = (s - s0) / h;
                let (y0, y1) = (self.table[k], self.table[k + 1]);
                let (m0, m1) = (self.eval(s0) * h, self.eval(s0 + h) * h);
                let x2 = x * x;
                let x3 = x2 * x;
                Ok((2.0 * x3 - 3.0 * x2 + 1.0) * y0
                    + (x3 - 2.0 * x2 + x) * m0
                    + (-2.0 * x3 + 3.0 * x2) * y1
                    + (x3 - x2) * m1)
            }
            PsiKind::Tabulated { samples } => {
                let n = samples.len();
                if s <= samples[0][0] {
                    return Ok(0.0);
                }
                if s >= samples[n - 1][0] {
                    return Ok(self.table[n - 1]);
                }
                let k = samples.partition_point(|p| p[0] <= s).clamp(1, n - 1);
                let s0 = samples[k - 1][0];
                let v0 = samples[k - 1][1];
                let v = self.eval(s);
                Ok(self.table[k - 1] + 0.5 * (s - s0) * (v0 + v))
            }
        }
    }

    /// `∫ψ` over the whole line.
    pub fn total_mass(&self) -> Result<f64> {
        match self.support() {
            Some((_, b)) => self.cumulative(b),
            None => self.cumulative(f64::INFINITY),
        }
    }

    /// `sup |ψ|`.
    pub fn sup_abs(&self) -> f64 {
        match &self.kind {
            PsiKind::Constant { tau } => tau.abs(),
            PsiKind::Bump { .. } => self.scale.abs() * (-1.0f64).exp(),
            PsiKind::Tabulated { samples } => samples.iter().map(|p| p[1].abs()).fold(0.0, f64::max),
        }
    }
}

impl TryFrom<PsiKind> for PsiProfile {
    type Error = LabError;

    fn try_from(kind: PsiKind) -> Result<Self> {
        match kind {
            PsiKind::Constant { tau } => Ok(PsiProfile::constant(tau)),
            PsiKind::Bump { support, mass } => PsiProfile::bump(support[0], support[1], mass),
            PsiKind::Tabulated { samples } => PsiProfile::tabulated(samples),
        }
    }
}

impl From<PsiProfile> for PsiKind {
    fn from(p: PsiProfile) -> Self {
        p.kind
    }
}

/// `ψ` together with the homotopy parameter `λ ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub psi: PsiProfile,
    pub lambda: f64,
}

impl PerturbationSpec {
    pub fn new(psi: PsiProfile, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(LabError::InvalidPerturbation(format!("λ = {lambda} outside [0, 1]")));
        }
        Ok(PerturbationSpec { psi, lambda })
    }

    /// The unperturbed equation.
    pub fn holomorphic() -> Self {
        PerturbationSpec { psi: PsiProfile::constant(0.0), lambda: 0.0 }
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        PerturbationSpec::new(self.psi.clone(), lambda)
    }

    /// True when the perturbation is generated by a constant times a real
    /// potential, i.e. `ψ` has compact support.
    pub fn properly_exact(&self) -> bool {
        self.psi.has_compact_support()
    }

    /// Coefficient `4λψ(s)` of the zero-order term of the model equation.
    pub fn coupling(&self, s: f64) -> f64 {
        4.0 * self.lambda * self.psi.eval(s)
    }
}

/// Height function `(|z|² − 1)/(|z|² + 1)` in either chart.
pub fn height(p: &SpherePoint) -> f64 {
    let r2 = p.coord.norm_sqr();
    match p.chart {
        Chart::Z => (r2 - 1.0) / (r2 + 1.0),
        Chart::W => (1.0 - r2) / (1.0 + r2),
    }
}

pub fn hamiltonian(s: f64, p: &SpherePoint, spec: &PerturbationSpec) -> f64 {
    spec.lambda * spec.psi.eval(s) * height(p)
}

/// Metric gradient: `4λψ(s) z` in chart `Z`, `−4λψ(s) w` in chart `W`.
pub fn grad_hamiltonian(s: f64, p: &SpherePoint, spec: &PerturbationSpec) -> TangentVector {
    let k = spec.coupling(s) * p.chart.orientation_sign();
    TangentVector::new(*p, k * p.coord)
}

/// Values of `P = ∇H ds − J∇H dt` on `∂_s` and `∂_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentPair {
    pub on_ds: TangentVector,
    pub on_dt: TangentVector,
}

pub fn perturbation_form(s: f64, _t: f64, p: &SpherePoint, spec: &PerturbationSpec) -> TangentPair {
    let grad = grad_hamiltonian(s, p, spec);
    let j = ComplexStructure::Standard;
    TangentPair { on_ds: grad, on_dt: TangentVector::new(*p, -j.apply(p, grad.value)) }
}

/// `g(s, p) = −∫_s^{+∞} H(s', p) ds'`, integrated along the constant-`t`
/// path from the `s = +∞` end of the cylinder.
pub fn exact_potential(s: f64, p: &SpherePoint, spec: &PerturbationSpec) -> Result<f64> {
    if !spec.properly_exact() {
        return Err(LabError::NotProperlyExact("ψ has unbounded support, so ∫H ds diverges".into()));
    }
    let tail = spec.psi.total_mass()? - spec.psi.cumulative(s)?;
    Ok(-spec.lambda * height(p) * tail)
}

/// The complex function generating `P` through `∂̄_Σ ∘ Φ⁻¹ ∘ ∂_M`. With
/// `ω = dx∧dy`, `J = i` and `Φ(X)(Y) = ω(X,Y) − iω(X,JY)` this is `−i·g`.
pub fn generating_function(s: f64, p: &SpherePoint, spec: &PerturbationSpec) -> Result<Complex64> {
    Ok(-I * exact_potential(s, p, spec)?)
}

/// Probe points of the sphere used when no M-samples are supplied.
pub fn default_probe_points() -> Vec<SpherePoint> {
    vec![
        SpherePoint::origin(),
        SpherePoint::from_z(Complex64::new(0.5, 0.5)),
        SpherePoint::from_z(Complex64::new(1.0, 0.0)),
        SpherePoint::from_z(Complex64::new(0.0, 1.8)),
        SpherePoint::from_w(Complex64::new(0.3, -0.4)),
        SpherePoint::infinity(),
    ]
}

/// Sup-norm deviation between `∂̄_Σ(i g)` and `iH ds + H dt` over the grid.
pub fn verify_proper_exactness(spec: &PerturbationSpec, grid: &CylinderGrid) -> Result<f64> {
    verify_proper_exactness_at(spec, grid, &default_probe_points())
}

pub fn verify_proper_exactness_at(spec: &PerturbationSpec, grid: &CylinderGrid, points: &[SpherePoint]) -> Result<f64> {
    if !spec.properly_exact() {
        return Err(LabError::NotProperlyExact("constant ψ has no potential".into()));
    }
    let spec_c = spec.clone();
    let ig = SampledFunction::try_from_fn(*grid, points.to_vec(), move |s, _t, p| {
        exact_potential(s, p, &spec_c).map(|g| I * g)
    })?;
    let form = dbar_sigma(&ig)?;
    let mut worst: f64 = 0.0;
    for (m, p) in points.iter().enumerate() {
        for i in 0..grid.n_s {
            let h = hamiltonian(grid.s(i), p, spec);
            for j in 0..grid.n_t {
                let k = form.index(m, i, j);
                worst = worst.max((form.ds[k] - I * h).norm()).max((form.dt[k] - Complex64::new(h, 0.0)).norm());
            }
        }
    }
    Ok(worst)
}
