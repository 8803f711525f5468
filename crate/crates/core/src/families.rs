//! Closed-form solutions of the model equation on the cylinder.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::CylinderGrid;
use crate::hamiltonian::{PerturbationSpec, PsiKind, PsiProfile};
use crate::map::MapSample;
use crate::solver::residual;
use crate::sphere::SpherePoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// `u = exp(−4λ∫_{−∞}^s ψ) · e^{2πk(s+it)}` for compactly supported `ψ`.
    ProperlyPerturbed,
    /// `u_k = e^{4τs} e^{2πk(s+it)}` for constant `ψ = τ`.
    HoferSalamon,
}

/// A solution family together with the perturbation it belongs to.
///
/// For the Hofer–Salamon kind `τ` is the constant value of `spec.psi`, scaled
/// by `spec.lambda` so that the family can be continued in `λ`; at `λ = 1` it
/// is the plain `u_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFamily {
    pub k: i32,
    pub spec: PerturbationSpec,
    pub kind: FamilyKind,
}

impl SolutionFamily {
    pub fn new(k: i32, spec: PerturbationSpec, kind: FamilyKind) -> Result<Self> {
        let family = SolutionFamily { k, spec, kind };
        if !family.validity() {
            return Err(LabError::InvalidFamily(family.describe_violation()));
        }
        Ok(family)
    }

    pub fn properly_perturbed(k: i32, spec: PerturbationSpec) -> Result<Self> {
        SolutionFamily::new(k, spec, FamilyKind::ProperlyPerturbed)
    }

    /// `e^{2πk(s+it)}`.
    pub fn holomorphic(k: i32) -> Self {
        SolutionFamily { k, spec: PerturbationSpec::holomorphic(), kind: FamilyKind::ProperlyPerturbed }
    }

    pub fn hofer_salamon(k: i32, tau: f64) -> Result<Self> {
        let spec = PerturbationSpec::new(PsiProfile::constant(tau), 1.0)?;
        SolutionFamily::new(k, spec, FamilyKind::HoferSalamon)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        SolutionFamily::new(self.k, self.spec.with_lambda(lambda)?, self.kind)
    }

    fn tau(&self) -> Option<f64> {
        match self.spec.psi.kind() {
            PsiKind::Constant { tau } => Some(self.spec.lambda * tau),
            _ => None,
        }
    }

    pub fn validity(&self) -> bool {
        match self.kind {
            FamilyKind::ProperlyPerturbed => self.spec.psi.has_compact_support(),
            FamilyKind::HoferSalamon => match self.tau() {
                Some(tau) => PI * self.k as f64 + 2.0 * tau > 0.0,
                None => false,
            },
        }
    }

    fn describe_violation(&self) -> String {
        match (self.kind, self.tau()) {
            (FamilyKind::ProperlyPerturbed, _) => "properly perturbed family needs a compactly supported ψ".into(),
            (FamilyKind::HoferSalamon, None) => "Hofer–Salamon family needs constant ψ".into(),
            (FamilyKind::HoferSalamon, Some(tau)) => {
                format!("πk + 2τ = {:.6} ≤ 0 for k = {}, τ = {tau}", PI * self.k as f64 + 2.0 * tau, self.k)
            }
        }
    }

    /// The perturbation whose model equation this family solves.
    ///
    /// `u_k` solves `u_s + i u_t − 4τu = 0`, i.e. the model equation with
    /// `ψ = −τ`; the properly perturbed family solves its own `spec`.
    pub fn equation_spec(&self) -> PerturbationSpec {
        match (self.kind, self.tau()) {
            (FamilyKind::HoferSalamon, Some(tau)) => PerturbationSpec { psi: PsiProfile::constant(-tau), lambda: 1.0 },
            _ => self.spec.clone(),
        }
    }

    /// Degree of the extended sphere map: `|k|` for the properly perturbed
    /// family, unassigned for `u_k`.
    pub fn degree(&self) -> Option<i32> {
        match self.kind {
            FamilyKind::ProperlyPerturbed => Some(self.k.abs()),
            FamilyKind::HoferSalamon => None,
        }
    }

    /// `log|u(s, ·)|`.
    fn log_modulus(&self, s: f64) -> Result<f64> {
        let winding = 2.0 * PI * self.k as f64 * s;
        match self.kind {
            FamilyKind::ProperlyPerturbed => {
                if self.spec.lambda == 0.0 {
                    return Ok(winding);
                }
                Ok(winding - 4.0 * self.spec.lambda * self.spec.psi.cumulative(s)?)
            }
            FamilyKind::HoferSalamon => {
                let tau = self.tau().ok_or_else(|| LabError::InvalidFamily(self.describe_violation()))?;
                Ok(winding + 4.0 * tau * s)
            }
        }
    }

    /// `u(s, t)`, emitted in chart `W` once `|u|` passes the switch radius.
    pub fn evaluate(&self, s: f64, t: f64) -> Result<SpherePoint> {
        if !self.validity() {
            return Err(LabError::InvalidFamily(self.describe_violation()));
        }
        let l = self.log_modulus(s)?;
        let theta = 2.0 * PI * self.k as f64 * t;
        let p = if l > crate::sphere::CHART_SWITCH_RADIUS.ln() {
            SpherePoint::from_w(Complex64::new(-l, -theta).exp())
        } else {
            SpherePoint::from_z(Complex64::new(l, theta).exp())
        };
        Ok(p)
    }

    pub fn sample(&self, grid: &CylinderGrid) -> Result<MapSample> {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n_s {
            for j in 0..grid.n_t {
                values.push(self.evaluate(grid.s(i), grid.t(j))?);
            }
        }
        MapSample::new(*grid, values, self.degree())
    }

    /// Sup-norm of the discrete residual of the sampled family over the grid
    /// interior.
    pub fn residual_on(&self, grid: &CylinderGrid) -> Result<f64> {
        let u = self.sample(grid)?;
        Ok(residual(&u, &self.equation_spec())?.sup_norm())
    }
}

pub fn evaluate(family: &SolutionFamily, s: f64, t: f64) -> Result<SpherePoint> {
    family.evaluate(s, t)
}

pub fn validity(family: &SolutionFamily) -> bool {
    family.validity()
}

pub fn residual_of_family(family: &SolutionFamily, grid: &CylinderGrid) -> Result<f64> {
    family.residual_on(grid)
}
