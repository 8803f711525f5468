use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::banded::BandMatrix;
use super::residual::{jacobian_row, residual, ResidualField};
use crate::error::{LabError, Result};
use crate::hamiltonian::PerturbationSpec;
use crate::map::MapSample;
use crate::sphere::{Chart, SpherePoint};

/// Step halvings tried before a Newton step is declared a failure.
const MAX_HALVINGS: usize = 10;

/// An accepted step must cut the sup-norm residual by this factor, or the
/// iteration counts as stalled.
const STALL_RATIO: f64 = 0.5;

/// Interface rows examined by one relocation.
const MAX_CANDIDATES: usize = 10;

/// Newton steps in the solve behind each candidate row.
const ANCHORED_STEPS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Sup-norm residual of the start and of every accepted iterate.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub final_residual: f64,
    /// Times the chart interface was moved after a stall.
    pub relocations: usize,
}

fn check_grid(u: &MapSample) -> Result<()> {
    if u.grid.n_s < 3 {
        return Err(LabError::GridTooSmall { axis: "s", have: u.grid.n_s, need: 3 });
    }
    Ok(())
}

fn assemble(u: &MapSample, spec: &PerturbationSpec, anchor: Option<usize>) -> Result<BandMatrix> {
    check_grid(u)?;
    let g = u.grid;
    let n_t = g.n_t;
    let mut a = BandMatrix::zeros((g.n_s - 2) * n_t, n_t, n_t);
    let q = |i: usize, j: usize| (i - 1) * n_t + j;
    for i in 1..g.n_s - 1 {
        for j in 0..n_t {
            if Some(q(i, j)) == anchor {
                a.add(q(i, j), q(i, j), Complex64::new(1.0, 0.0))?;
                continue;
            }
            let (d_self, nbrs) = jacobian_row(u, spec, i, j);
            a.add(q(i, j), q(i, j), d_self)?;
            for ((ii, jj), d) in nbrs {
                if (1..g.n_s - 1).contains(&ii) {
                    a.add(q(i, j), q(ii, jj), d)?;
                }
            }
        }
    }
    Ok(a)
}

/// Jacobian of [`residual`] with respect to the interior node coordinates,
/// each in its own chart. Unknown `(i, j)` has index `(i − 1)·n_t + j`.
pub fn assemble_jacobian(u: &MapSample, spec: &PerturbationSpec) -> Result<BandMatrix> {
    assemble(u, spec, None)
}

/// How a Newton correction `δ` is applied to a node coordinate `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Retraction {
    /// `x + δ`: exact for the scheme inside one chart.
    Additive,
    /// `x·exp(δ/x)`: exact for the continuum equation in `log x`, which is
    /// the same in both charts up to sign. Nodes at `x = 0` move additively.
    Multiplicative,
}

fn stepped(u: &MapSample, delta: &[Complex64], scale: f64, how: Retraction) -> MapSample {
    let mut out = u.clone();
    let n_t = u.grid.n_t;
    for (k, d) in delta.iter().enumerate() {
        let idx = u.grid.index(1 + k / n_t, k % n_t);
        let x = out.values[idx].coord;
        let d = scale * d;
        out.values[idx].coord = match how {
            Retraction::Multiplicative if x != Complex64::new(0.0, 0.0) => x * (d / x).exp(),
            _ => x + d,
        };
    }
    out
}

/// Euclidean norm of the residual, leaving out the anchor equation.
fn merit(r: &ResidualField, anchor: Option<usize>) -> f64 {
    r.values.iter().enumerate().filter(|(k, _)| Some(*k) != anchor).map(|(_, v)| v.norm_sqr()).sum::<f64>().sqrt()
}

/// One Newton step with step halving. With an anchor, that node is held
/// fixed and its equation dropped. `None` if no trial lowers the merit.
fn newton_step(
    u: &MapSample,
    spec: &PerturbationSpec,
    r: &ResidualField,
    anchor: Option<usize>,
) -> Result<Option<(MapSample, ResidualField)>> {
    let mut delta: Vec<Complex64> = r.values.iter().map(|v| -v).collect();
    if let Some(a) = anchor {
        delta[a] = Complex64::new(0.0, 0.0);
    }
    assemble(u, spec, anchor)?.factor()?.solve(&mut delta);
    let mut best = merit(r, anchor);
    let mut accepted = None;
    let mut scale = 1.0;
    for _ in 0..=MAX_HALVINGS {
        for how in [Retraction::Additive, Retraction::Multiplicative] {
            let trial = stepped(u, &delta, scale, how);
            if let Ok(tr) = residual(&trial, spec) {
                let m = merit(&tr, anchor);
                if m < best {
                    best = m;
                    accepted = Some((trial, tr));
                }
            }
        }
        if accepted.is_some() {
            break;
        }
        scale *= 0.5;
    }
    Ok(accepted)
}

/// Where the interior switches chart: rows `1..=last_left` lie in `left`,
/// later interior rows in the other chart.
#[derive(Debug, Clone, Copy)]
struct Layout {
    left: Chart,
    last_left: usize,
}

/// Current layout of a map whose boundary rows lie each in one chart, the
/// two different. Stray interior tags are tolerated; the switch row is
/// estimated from the number of interior nodes in the left chart.
fn row_layout(u: &MapSample) -> Option<Layout> {
    let g = u.grid;
    let row_chart = |i: usize| {
        let c = u.get(i, 0).chart;
        (0..g.n_t).all(|j| u.get(i, j).chart == c).then_some(c)
    };
    let (left, right) = (row_chart(0)?, row_chart(g.n_s - 1)?);
    if left == right || g.n_s < 4 {
        return None;
    }
    let in_left = (g.n_t..g.len() - g.n_t).filter(|&k| u.values[k].chart == left).count();
    let last_left = (in_left as f64 / g.n_t as f64).round() as usize;
    Some(Layout { left, last_left })
}

fn anchor_of(u: &MapSample, p: usize) -> usize {
    (p - 1) * u.grid.n_t
}

fn log_modulus_z(p: &SpherePoint) -> f64 {
    let l = p.coord.norm().ln();
    match p.chart {
        Chart::Z => l,
        Chart::W => -l,
    }
}

/// `u` with the chart switch moved to between rows `p` and `p + 1`, and the
/// interior rescaled by a real `α` (`z ↦ αz`) that puts those two rows at
/// `|z| ≈ 1`. Boundary rows are left alone.
fn placed(u: &MapSample, left: Chart, p: usize) -> MapSample {
    let g = u.grid;
    let row_mean = |i: usize| (0..g.n_t).map(|j| log_modulus_z(&u.get(i, j))).sum::<f64>() / g.n_t as f64;
    let log_alpha = -0.5 * (row_mean(p) + row_mean(p + 1));
    let alpha = if log_alpha.is_finite() { log_alpha.exp() } else { 1.0 };
    let mut out = u.clone();
    for i in 1..g.n_s - 1 {
        let want = if i <= p { left } else { left.other() };
        for j in 0..g.n_t {
            let k = g.index(i, j);
            let v = u.values[k];
            let scaled = match v.chart {
                Chart::Z => SpherePoint::new(v.coord * alpha, Chart::Z),
                Chart::W => SpherePoint::new(v.coord / alpha, Chart::W),
            };
            out.values[k] = scaled.in_chart(want).unwrap_or(scaled);
        }
    }
    out
}

fn reduced_norm(r: &ResidualField, anchor: usize) -> f64 {
    r.values.iter().enumerate().filter(|(k, _)| *k != anchor).map(|(_, v)| v.norm()).fold(0.0, f64::max)
}

/// Newton on every equation but the anchor's, with the anchor node fixed.
fn anchored_solve(
    u0: MapSample,
    spec: &PerturbationSpec,
    anchor: usize,
    tol: f64,
) -> Result<(MapSample, ResidualField)> {
    let mut u = u0;
    let mut r = residual(&u, spec)?;
    for _ in 0..ANCHORED_STEPS {
        if reduced_norm(&r, anchor) <= 0.1 * tol {
            break;
        }
        match newton_step(&u, spec, &r, Some(anchor))? {
            Some((v, vr)) => {
                u = v;
                r = vr;
            }
            None => break,
        }
    }
    Ok((u, r))
}

struct Candidate {
    anchor: usize,
    charge: f64,
    u: MapSample,
    r: ResidualField,
}

/// Searches for the interface row at which the discrete system is solvable.
///
/// With the tags fixed the interior equations are invariant under
/// `z ↦ αz`, so a solution needs one complex compatibility condition to
/// hold. Holding one interface node fixed and solving the rest leaves that
/// condition as the residual of the held node; this is the `charge` of the
/// row. Rows are visited by a secant rule on the charge. Returns the best
/// candidate and its anchor.
fn relocate(
    u: &MapSample,
    spec: &PerturbationSpec,
    tol: f64,
    layout: Layout,
) -> Result<Option<(MapSample, ResidualField, usize, usize)>> {
    let g = u.grid;
    let (lo, hi) = (1, g.n_s - 3);
    if lo > hi {
        return Ok(None);
    }
    let p0 = layout.last_left.clamp(lo, hi);
    // Rows whose reduced solve converged, in visiting order, with their charge.
    let mut good: Vec<(usize, Complex64)> = Vec::new();
    let mut seen = BTreeMap::new();
    type Seen = BTreeMap<usize, Option<Candidate>>;
    let visit = |p: usize, seen: &mut Seen, good: &mut Vec<(usize, Complex64)>| -> Result<()> {
        let anchor = anchor_of(u, p);
        let cand = match anchored_solve(placed(u, layout.left, p), spec, anchor, tol) {
            Ok((v, r)) => {
                let charge = r.values[anchor];
                // An unconverged reduced solve says nothing about the charge.
                let settled = reduced_norm(&r, anchor) <= (0.1 * tol).max(1e-3 * charge.norm());
                settled.then(|| {
                    good.push((p, charge));
                    Candidate { anchor, charge: charge.norm(), u: v, r }
                })
            }
            Err(LabError::SingularOperator { .. } | LabError::ChartTearing { .. }) => None,
            Err(e) => return Err(e),
        };
        seen.insert(p, cand);
        Ok(())
    };
    let best_of = |seen: &Seen| {
        seen.iter().filter_map(|(p, c)| c.as_ref().map(|c| (*p, c.charge))).min_by(|x, y| x.1.total_cmp(&y.1))
    };
    visit(p0, &mut seen, &mut good)?;
    while seen.len() < MAX_CANDIDATES {
        let best = best_of(&seen);
        if best.is_some_and(|(_, q)| q <= 0.1 * tol) {
            break;
        }
        let secant = match good.as_slice() {
            [.., (pa, qa), (pb, qb)] => {
                let slope = (qb - qa) / (*pb as f64 - *pa as f64);
                (slope.norm() > 0.0).then(|| *pb as f64 - (qb / slope).re)
            }
            _ => None,
        };
        let guess = secant.map(|x| x.round().clamp(lo as f64, hi as f64) as usize).filter(|p| !seen.contains_key(p));
        // Otherwise widen around the best row, or around the start.
        let centre = best.map_or(p0, |b| b.0);
        let next = guess.or_else(|| {
            (1..=g.n_s)
                .flat_map(|d| [centre.checked_sub(d), Some(centre + d)])
                .flatten()
                .find(|p| (lo..=hi).contains(p) && !seen.contains_key(p))
        });
        let Some(next) = next else { break };
        if secant.is_none() && best.is_some() && next.abs_diff(centre) > 1 {
            // Both neighbours of the best row are already known.
            break;
        }
        visit(next, &mut seen, &mut good)?;
    }
    let best = best_of(&seen).and_then(|(p, _)| seen.remove(&p).flatten().map(|c| (p, c)));
    Ok(best.map(|(p, c)| (c.u, c.r, c.anchor, p)))
}

/// Newton iteration for the discrete model equation with the boundary rows
/// of `u0` held fixed.
///
/// Tags are normalized once and then frozen. Steps solve the banded
/// Jacobian exactly and are applied additively or multiplicatively,
/// whichever lowers the residual more, halving the step if neither does.
///
/// If the iteration stalls on a map whose rows switch chart exactly once,
/// the interface is moved to the row where the compatibility condition of
/// the frozen-tag system holds (see [`relocate`]); this happens at most
/// once per call. The system is then close to singular along the scaling
/// mode, so later steps keep one interface node fixed and drop its
/// equation; convergence is still judged on the full residual. Exceeding `max_iter` or a stall that relocation cannot
/// cure returns the best iterate with `converged = false`. A singular
/// operator is an error.
pub fn newton_solve(
    u0: &MapSample,
    spec: &PerturbationSpec,
    tol: f64,
    max_iter: usize,
) -> Result<(MapSample, SolveReport)> {
    if !(tol > 0.0) {
        return Err(LabError::Config(format!("newton tolerance must be positive, got {tol}")));
    }
    check_grid(u0)?;
    let mut u = u0.clone();
    u.normalize();
    let start = u.clone();
    let mut r = residual(&u, spec)?;
    let mut anchor = None;
    let mut norm = r.sup_norm();
    let mut history = vec![norm];
    let mut iterations = 0;
    let mut relocations = 0;
    while norm > tol && iterations < max_iter {
        let mut progressed = false;
        if let Some((v, vr)) = newton_step(&u, spec, &r, anchor)? {
            let next = vr.sup_norm();
            if next < norm {
                progressed = next <= STALL_RATIO * norm;
                u = v;
                r = vr;
                norm = next;
                iterations += 1;
                history.push(norm);
            }
        }
        if progressed || norm <= tol || iterations >= max_iter {
            continue;
        }
        let current = match row_layout(&start) {
            Some(l) if relocations == 0 => l,
            _ => break,
        };
        relocations += 1;
        match relocate(&start, spec, tol, current)? {
            Some((v, vr, a, _)) if vr.sup_norm() < norm => {
                anchor = Some(a);
                u = v;
                r = vr;
                norm = r.sup_norm();
                iterations += 1;
                history.push(norm);
            }
            _ => break,
        }
    }
    let report = SolveReport {
        iterations,
        residual_history: history,
        converged: norm <= tol,
        final_residual: norm,
        relocations,
    };
    Ok((u, report))
}
