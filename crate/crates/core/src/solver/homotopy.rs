use serde::{Deserialize, Serialize};

use super::newton::{newton_solve, SolveReport};
use crate::error::{LabError, Result};
use crate::families::SolutionFamily;
use crate::functionals::symplectic_area;
use crate::hamiltonian::PerturbationSpec;
use crate::map::MapSample;
use crate::sphere::{Chart, SpherePoint};

#[derive(Debug, Clone, PartialEq)]
pub struct HomotopyStage {
    pub lambda: f64,
    pub solution: MapSample,
    pub area: f64,
    pub report: SolveReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyFailure {
    pub index: usize,
    pub lambda: f64,
    pub reason: String,
}

/// Solved stages in schedule order; on failure, the stages before it.
#[derive(Debug, Clone, PartialEq)]
pub struct HomotopyResult {
    pub stages: Vec<HomotopyStage>,
    pub failure: Option<HomotopyFailure>,
}

impl HomotopyResult {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }

    /// Largest pairwise area difference over the solved stages.
    pub fn area_drift(&self) -> f64 {
        let areas: Vec<f64> = self.stages.iter().map(|s| s.area).collect();
        let hi = areas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = areas.iter().cloned().fold(f64::INFINITY, f64::min);
        if areas.is_empty() {
            0.0
        } else {
            hi - lo
        }
    }
}

/// Checks that `schedule` is non-empty, inside `[0, 1]` and monotone.
pub fn validate_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(LabError::InvalidSchedule("empty schedule".into()));
    }
    if let Some(l) = schedule.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(LabError::InvalidSchedule(format!("λ = {l} outside [0, 1]")));
    }
    let up = schedule.windows(2).all(|w| w[1] >= w[0]);
    let down = schedule.windows(2).all(|w| w[1] <= w[0]);
    if !(up || down) {
        return Err(LabError::InvalidSchedule("schedule is not monotone".into()));
    }
    Ok(())
}

fn set_boundary(u: &mut MapSample, trace: &MapSample) {
    let g = u.grid;
    for i in u.boundary_rows() {
        for j in 0..g.n_t {
            u.values[g.index(i, j)] = trace.get(i, j);
        }
    }
}

/// Carries `u` from the equation of `old` to that of `new` by the exact
/// rescaling `z ↦ z·exp(−∫ Δc ds)`. The integral starts at the chart
/// interface, so interface nodes stay put and the tags remain valid.
fn predict(u: &mut MapSample, old: &PerturbationSpec, new: &PerturbationSpec) {
    let g = u.grid;
    let h = g.h_s();
    let dc = |i: usize| {
        let s = g.s(i);
        new.coupling(s) - old.coupling(s)
    };
    let mut integral = vec![0.0; g.n_s];
    for i in 1..g.n_s {
        integral[i] = integral[i - 1] + 0.5 * h * (dc(i - 1) + dc(i));
    }
    let pivot = (1..g.n_s)
        .find(|&i| u.get(i, 0).chart != u.get(i - 1, 0).chart)
        .map_or(integral[0], |i| 0.5 * (integral[i - 1] + integral[i]));
    for i in 0..g.n_s {
        let f = (pivot - integral[i]).exp();
        for j in 0..g.n_t {
            let p = u.get(i, j);
            let coord = match p.chart {
                Chart::Z => p.coord * f,
                Chart::W => p.coord / f,
            };
            u.values[g.index(i, j)] = SpherePoint::new(coord, p.chart);
        }
    }
}

/// Continues a solution of the equation of `family` along `schedule`. At each
/// `λ` the previous stage is carried along the exact rescaling of the
/// equation, its boundary rows are reset to the family's trace and the
/// result is the Newton start.
pub fn homotopy_continue(
    start: &MapSample,
    family: &SolutionFamily,
    schedule: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<HomotopyResult> {
    validate_schedule(schedule)?;
    let mut stages: Vec<HomotopyStage> = Vec::with_capacity(schedule.len());
    let mut current = start.clone();
    let mut previous: Option<PerturbationSpec> = None;
    for (index, &lambda) in schedule.iter().enumerate() {
        let fail = |reason: String| HomotopyFailure { index, lambda, reason };
        let fam = family.with_lambda(lambda)?;
        let spec = fam.equation_spec();
        if let Some(old) = &previous {
            predict(&mut current, old, &spec);
        }
        previous = Some(spec.clone());
        let trace = fam.sample(&current.grid)?;
        set_boundary(&mut current, &trace);
        current.degree = trace.degree;
        let (u, report) = match newton_solve(&current, &spec, tol, max_iter) {
            Ok(x) => x,
            Err(e) => return Ok(HomotopyResult { stages, failure: Some(fail(e.to_string())) }),
        };
        if !report.converged {
            let reason = format!(
                "newton stopped after {} iterations at residual {:.3e}",
                report.iterations, report.final_residual
            );
            return Ok(HomotopyResult { stages, failure: Some(fail(reason)) });
        }
        let area = match symplectic_area(&u) {
            Ok(a) => a.area,
            Err(e) => return Ok(HomotopyResult { stages, failure: Some(fail(e.to_string())) }),
        };
        current = u.clone();
        stages.push(HomotopyStage { lambda, solution: u, area, report });
    }
    Ok(HomotopyResult { stages, failure: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CylinderGrid;
    use crate::hamiltonian::PsiProfile;

    fn family() -> SolutionFamily {
        let spec = PerturbationSpec::new(PsiProfile::bump(-1.0, 1.0, 1.0).unwrap(), 1.0).unwrap();
        SolutionFamily::properly_perturbed(1, spec).unwrap()
    }

    #[test]
    fn schedule_validation() {
        assert!(validate_schedule(&[]).is_err());
        assert!(validate_schedule(&[0.0, 1.2]).is_err());
        assert!(validate_schedule(&[0.0, 0.5, 0.2]).is_err());
        assert!(validate_schedule(&[1.0, 0.5, 0.0]).is_ok());
        assert!(validate_schedule(&[0.0]).is_ok());
    }

    #[test]
    fn single_stage_is_holomorphic_solve() {
        let g = CylinderGrid::symmetric(4.0, 160, 32).unwrap();
        let f = family();
        let start = f.with_lambda(0.0).unwrap().sample(&g).unwrap();
        let res = homotopy_continue(&start, &f, &[0.0], 1e-9, 8).unwrap();
        assert!(res.completed());
        assert_eq!(res.stages.len(), 1);
        assert!((res.stages[0].area - std::f64::consts::PI).abs() < 2e-2);
    }

    #[test]
    fn forward_and_back() {
        let g = CylinderGrid::symmetric(4.0, 160, 32).unwrap();
        let f = family();
        let start = f.with_lambda(0.0).unwrap().sample(&g).unwrap();
        let fwd = homotopy_continue(&start, &f, &[0.0, 0.5, 1.0], 1e-9, 8).unwrap();
        assert!(fwd.completed());
        assert!(fwd.area_drift() < 1e-3, "{}", fwd.area_drift());
        let end = fwd.stages.last().unwrap().solution.clone();
        let back = homotopy_continue(&end, &f, &[1.0, 0.0], 1e-9, 8).unwrap();
        assert!((back.stages[1].area - fwd.stages[0].area).abs() < 1e-6);
    }
}
