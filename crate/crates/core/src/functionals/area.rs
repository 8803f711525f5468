use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::{CylinderGrid, Stencil};
use crate::map::MapSample;
use crate::sphere::fs_area_density;

/// Derivative order used for area and energy densities.
pub(crate) const DENSITY_STENCIL: Stencil = Stencil::Fourth;

/// Fraction of bands at each end used for the tail fit.
const TAIL_FRACTION: f64 = 0.1;

/// A tail larger than this fraction of `|area|` sets `tail_warning`.
pub const TAIL_WARNING_RATIO: f64 = 0.1;

/// Tails below this are roundoff and never warn.
const TAIL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaReport {
    /// `Σ band_contributions`, summed in band order.
    pub area: f64,
    /// Trapezoid contribution of each interval `[s_i, s_{i+1}]`.
    pub band_contributions: Vec<f64>,
    /// Extrapolated `|∫|` beyond both ends of the truncated cylinder.
    pub tail_estimate: f64,
    pub tail_warning: bool,
    pub grid: CylinderGrid,
}

impl AreaReport {
    /// Area of the bands `[first, last)`.
    pub fn band_sum(&self, first: usize, last: usize) -> f64 {
        self.band_contributions[first..last].iter().sum()
    }
}

/// `∫ u*ω` over each circle `s = s_i`, i.e. the `t`-integrated density.
pub fn row_densities(u: &MapSample) -> Result<Vec<f64>> {
    let g = u.grid;
    let need = DENSITY_STENCIL.min_nodes();
    if g.n_s < need {
        return Err(LabError::GridTooSmall { axis: "s", have: g.n_s, need });
    }
    u.check_tearing()?;
    (0..g.n_s)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..g.n_t {
                let (ds, dt) = u.derivatives(i, j, DENSITY_STENCIL)?;
                acc += fs_area_density(&u.get(i, j), ds, dt);
            }
            Ok(acc * g.h_t())
        })
        .collect()
}

/// Per-end tail from an exponential fit of `log|b|` against band index.
fn tail_one_end(bands: &[f64]) -> (f64, bool) {
    let pts: Vec<(f64, f64)> =
        bands.iter().enumerate().filter(|(_, b)| b.abs() > 0.0).map(|(k, b)| (k as f64, b.abs().ln())).collect();
    let edge = bands[0].abs();
    if edge == 0.0 || pts.len() < 2 {
        return (0.0, false);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    // Index 0 is the outermost band; moving outward means going to index −1.
    let q = (-sxy / sxx).exp();
    if q < 1.0 {
        (edge * q / (1.0 - q), false)
    } else {
        // Not decaying: report the edge band times the band count as a
        // deliberately loose estimate and flag it.
        (edge * bands.len() as f64, true)
    }
}

fn tail_estimate(bands: &[f64]) -> (f64, bool) {
    let m = ((TAIL_FRACTION * bands.len() as f64).ceil() as usize).clamp(2, bands.len());
    let (left, wl) = tail_one_end(&bands[..m]);
    let right_bands: Vec<f64> = bands[bands.len() - m..].iter().rev().cloned().collect();
    let (right, wr) = tail_one_end(&right_bands);
    (left + right, wl || wr)
}

/// Trapezoid quadrature of the Fubini–Study area density over the sampled
/// cylinder, using fourth-order chart-aware derivatives.
pub fn symplectic_area(u: &MapSample) -> Result<AreaReport> {
    let g = u.grid;
    let rows = row_densities(u)?;
    let h = g.h_s();
    let bands: Vec<f64> = rows.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).collect();
    let area: f64 = bands.iter().sum();
    let (tail, nondecaying) = tail_estimate(&bands);
    let tail_warning = tail > TAIL_FLOOR && (nondecaying || tail > TAIL_WARNING_RATIO * area.abs());
    Ok(AreaReport { area, band_contributions: bands, tail_estimate: tail, tail_warning, grid: g })
}
