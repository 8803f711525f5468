//! Discrete residual of the model equation and its linearization.
//!
//! Each interior node carries the equation of its own chart,
//! `D_s z + i D_t z + 4λψ(s) z` at a chart-`Z` node and
//! `D_s w + i D_t w − 4λψ(s) w` at a chart-`W` node, with second-order
//! central differences. Neighbours tagged with the other chart are converted
//! into the node's chart first. Inside one chart the scheme is linear; the
//! only nonlinearity is the `1/x` conversion across the chart interface.
//!
//! The system therefore depends on the tags, and solvers keep them fixed
//! while iterating.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::grid::CylinderGrid;
use crate::hamiltonian::PerturbationSpec;
use crate::map::MapSample;
use crate::sphere::{Chart, SpherePoint};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Per-node values on the interior rows `1..n_s−1`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualField {
    pub grid: CylinderGrid,
    pub values: Vec<Complex64>,
}

impl ResidualField {
    /// Value at interior node `(i, j)`, `1 ≤ i ≤ n_s − 2`.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[(i - 1) * self.grid.n_t + j]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// A tangent vector per node (boundary rows included), each expressed in
/// the chart of the corresponding node of a map sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentField {
    pub grid: CylinderGrid,
    pub values: Vec<Complex64>,
}

impl TangentField {
    pub fn zeros(grid: CylinderGrid) -> Self {
        TangentField { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn new(grid: CylinderGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::ShapeMismatch(format!(
                "{} tangent values for a {}x{} grid",
                values.len(),
                grid.n_s,
                grid.n_t
            )));
        }
        Ok(TangentField { grid, values })
    }
}

/// `u` displaced by `eps·v` node-wise in each node's own chart. Charts are
/// kept, not re-tagged.
pub fn displace(u: &MapSample, v: &TangentField, eps: Complex64) -> MapSample {
    let values = u.values.iter().zip(&v.values).map(|(p, d)| SpherePoint::new(p.coord + eps * d, p.chart)).collect();
    MapSample { grid: u.grid, values, degree: u.degree }
}

/// Derivative of a neighbour's coordinate, seen from `chart`, with respect
/// to the neighbour's own coordinate.
#[inline]
pub(crate) fn transfer(neighbour: &SpherePoint, chart: Chart) -> Complex64 {
    if neighbour.chart == chart {
        Complex64::new(1.0, 0.0)
    } else {
        -(neighbour.coord * neighbour.coord).inv()
    }
}

fn check_grid(u: &MapSample) -> Result<()> {
    if u.grid.n_s < 3 {
        return Err(LabError::GridTooSmall { axis: "s", have: u.grid.n_s, need: 3 });
    }
    Ok(())
}

fn couplings(u: &MapSample, spec: &PerturbationSpec) -> Vec<f64> {
    (0..u.grid.n_s).map(|i| spec.coupling(u.grid.s(i))).collect()
}

/// Neighbours of interior node `(i, j)` and their central-difference weights.
pub(crate) fn stencil(g: &CylinderGrid, i: usize, j: usize) -> [((usize, usize), Complex64); 4] {
    let (a_s, a_t) = (0.5 / g.h_s(), 0.5 / g.h_t());
    [
        ((i + 1, j), Complex64::new(a_s, 0.0)),
        ((i - 1, j), Complex64::new(-a_s, 0.0)),
        ((i, g.wrap_t(j as isize + 1)), I * a_t),
        ((i, g.wrap_t(j as isize - 1)), -I * a_t),
    ]
}

/// Residual at one node with its partial derivatives in node coordinates.
struct NodeTerms {
    value: Complex64,
    d_self: Complex64,
    d_neighbours: [Complex64; 4],
}

fn node_terms(u: &MapSample, c: f64, i: usize, j: usize) -> NodeTerms {
    let p = u.get(i, j);
    let ch = p.chart;
    let sign = ch.orientation_sign();
    let mut value = sign * c * p.coord;
    let mut d_neighbours = [Complex64::new(0.0, 0.0); 4];
    for (k, ((a, b), coef)) in stencil(&u.grid, i, j).iter().enumerate() {
        let n = u.get(*a, *b);
        value += coef * n.coord_in(ch);
        d_neighbours[k] = coef * transfer(&n, ch);
    }
    NodeTerms { value, d_self: Complex64::new(sign * c, 0.0), d_neighbours }
}

/// Per-node residual on the interior rows, in each node's active chart.
pub fn residual(u: &MapSample, spec: &PerturbationSpec) -> Result<ResidualField> {
    check_grid(u)?;
    u.check_tearing()?;
    let g = u.grid;
    let cs = couplings(u, spec);
    let mut values = vec![Complex64::new(0.0, 0.0); (g.n_s - 2) * g.n_t];
    values.par_chunks_mut(g.n_t).enumerate().for_each(|(r, row)| {
        let i = r + 1;
        for (j, out) in row.iter_mut().enumerate() {
            *out = node_terms(u, cs[i], i, j).value;
        }
    });
    if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(LabError::NonFinite("residual"));
    }
    Ok(ResidualField { grid: g, values })
}

/// Directional derivative of [`residual`] at `u` along `direction`,
/// boundary directions included. The residual is holomorphic in the node
/// coordinates, so this is complex-linear in `direction`.
pub fn linearization_apply(u: &MapSample, spec: &PerturbationSpec, direction: &TangentField) -> Result<ResidualField> {
    check_grid(u)?;
    if direction.grid != u.grid {
        return Err(LabError::ShapeMismatch("direction on a different grid".into()));
    }
    u.check_tearing()?;
    let g = u.grid;
    let cs = couplings(u, spec);
    let mut values = vec![Complex64::new(0.0, 0.0); (g.n_s - 2) * g.n_t];
    values.par_chunks_mut(g.n_t).enumerate().for_each(|(r, row)| {
        let i = r + 1;
        for (j, out) in row.iter_mut().enumerate() {
            let nt = node_terms(u, cs[i], i, j);
            let mut acc = nt.d_self * direction.values[g.index(i, j)];
            for (k, ((a, b), _)) in stencil(&g, i, j).iter().enumerate() {
                acc += nt.d_neighbours[k] * direction.values[g.index(*a, *b)];
            }
            *out = acc;
        }
    });
    Ok(ResidualField { grid: g, values })
}

/// Row `(i, j)` of the Jacobian of [`residual`]: the diagonal entry and the
/// four neighbour entries with their node indices.
pub(crate) fn jacobian_row(
    u: &MapSample,
    spec: &PerturbationSpec,
    i: usize,
    j: usize,
) -> (Complex64, [((usize, usize), Complex64); 4]) {
    let nt = node_terms(u, spec.coupling(u.grid.s(i)), i, j);
    let mut out = stencil(&u.grid, i, j);
    for (k, e) in out.iter_mut().enumerate() {
        e.1 = nt.d_neighbours[k];
    }
    (nt.d_self, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::PsiProfile;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid() -> CylinderGrid {
        CylinderGrid::symmetric(1.0, 40, 16).unwrap()
    }

    #[test]
    fn constant_maps() {
        let g = grid();
        let spec = PerturbationSpec::new(PsiProfile::constant(0.25), 1.0).unwrap();
        let z = c(0.3, -0.2);
        let r = residual(&MapSample::constant(g, SpherePoint::from_z(z)), &spec).unwrap();
        assert!(r.values.iter().all(|v| (v - 4.0 * 0.25 * z).norm() < 1e-15));
        let r0 = residual(&MapSample::constant(g, SpherePoint::origin()), &spec).unwrap();
        assert_eq!(r0.sup_norm(), 0.0);
        assert_eq!(r0.values.len(), (g.n_s - 2) * g.n_t);
    }

    #[test]
    fn chart_w_equation_from_transition() {
        // A chart-Z solution pushed to chart W solves the sign-flipped
        // equation, to the order of the scheme.
        let spec = PerturbationSpec::new(PsiProfile::constant(0.3), 1.0).unwrap();
        let u = |s: f64, t: f64| c(2.0 * PI * s - 1.2 * s + 0.8, 2.0 * PI * t).exp();
        let in_w = |n_s: usize, n_t: usize| {
            let g = CylinderGrid::symmetric(0.5, n_s, n_t).unwrap();
            let mut m = MapSample::from_fn(g, None, |s, t| SpherePoint::from_z(u(s, t)));
            for v in &mut m.values {
                *v = SpherePoint::new(v.coord_in(Chart::W), Chart::W);
            }
            m
        };
        let coarse = residual(&in_w(41, 64), &spec).unwrap().sup_norm();
        let fine = residual(&in_w(81, 128), &spec).unwrap().sup_norm();
        assert!(fine < 0.05, "{fine}");
        assert!((3.5..4.5).contains(&(coarse / fine)), "{}", coarse / fine);
        let wrong = residual(&in_w(81, 128), &spec.with_lambda(0.0).unwrap()).unwrap();
        assert!(wrong.sup_norm() > 0.1);
    }

    #[test]
    fn linearization_matches_finite_differences() {
        let g = grid();
        let spec = PerturbationSpec::new(PsiProfile::bump(-0.5, 0.5, 1.0).unwrap(), 0.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = MapSample::from_fn(g, None, |s, t| SpherePoint::from_z(c(2.0 * PI * s, 2.0 * PI * t).exp() * 1.3));
        let v =
            TangentField::new(g, (0..g.len()).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
                .unwrap();
        let eps = 1e-6;
        let lin = linearization_apply(&u, &spec, &v).unwrap();
        let plus = residual(&displace(&u, &v, c(eps, 0.0)), &spec).unwrap();
        let minus = residual(&displace(&u, &v, c(-eps, 0.0)), &spec).unwrap();
        let fd: Vec<Complex64> = plus.values.iter().zip(&minus.values).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
        let num = lin.values.iter().zip(&fd).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let den = lin.sup_norm();
        assert!(num / den < 1e-6, "{}", num / den);
        // Complex linearity.
        let iv = TangentField::new(g, v.values.iter().map(|x| I * x).collect()).unwrap();
        let lin_i = linearization_apply(&u, &spec, &iv).unwrap();
        for (a, b) in lin.values.iter().zip(&lin_i.values) {
            assert!((I * a - b).norm() < 1e-9 * den);
        }
        assert_eq!(linearization_apply(&u, &spec, &TangentField::zeros(g)).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn holomorphic_chart_z_is_linear() {
        let g = grid();
        let spec = PerturbationSpec::new(PsiProfile::constant(0.5), 0.5).unwrap();
        let u = MapSample::constant(g, SpherePoint::from_z(c(0.1, 0.0)));
        let v: Vec<Complex64> =
            (0..g.len()).map(|k| c(0.3 * g.s(k / g.n_t).sin(), 0.1 * (2.0 * PI * g.t(k % g.n_t)).cos())).collect();
        let as_map = MapSample::new(g, v.iter().map(|x| SpherePoint::new(*x, Chart::Z)).collect(), None).unwrap();
        let lin = linearization_apply(&u, &spec, &TangentField::new(g, v).unwrap()).unwrap();
        let direct = residual(&as_map, &spec).unwrap();
        for (a, b) in lin.values.iter().zip(&direct.values) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
