//! Complex banded LU with partial pivoting.
//!
//! Row `r` stores columns `r − kl ..= r + ku + kl`; the extra `kl` columns on
//! the right hold the fill produced by row interchanges.

use num_complex::Complex64;

use crate::error::{LabError, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Pivots below this fraction of the largest entry count as zero.
const PIVOT_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, width, data: vec![ZERO; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, r: usize, c: usize) -> usize {
        debug_assert!(c + self.kl >= r && c <= r + self.ku + self.kl);
        r * self.width + (c + self.kl - r)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        if c + self.kl < r || c > r + self.ku + self.kl {
            return ZERO;
        }
        self.data[self.slot(r, c)]
    }

    /// Adds `v` at `(r, c)`; the entry must lie inside the declared band.
    pub fn add(&mut self, r: usize, c: usize, v: Complex64) -> Result<()> {
        if c + self.kl < r || c > r + self.ku {
            return Err(LabError::ShapeMismatch(format!("entry ({r}, {c}) outside the band")));
        }
        let k = self.slot(r, c);
        self.data[k] += v;
        Ok(())
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|r| {
                let lo = r.saturating_sub(self.kl);
                let hi = (r + self.ku).min(self.n - 1);
                (lo..=hi).map(|c| self.get(r, c) * x[c]).sum()
            })
            .collect()
    }

    /// Factors in place. Fails with the column index of the first
    /// numerically zero pivot.
    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let scale = self.data.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if scale == 0.0 && n > 0 {
            return Err(LabError::SingularOperator { column: 0 });
        }
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.slot(k, k)].norm();
            for r in k + 1..=last {
                let m = self.data[self.slot(r, k)].norm();
                if m > best {
                    best = m;
                    p = r;
                }
            }
            if !(best > PIVOT_FLOOR * scale) {
                return Err(LabError::SingularOperator { column: k });
            }
            piv[k] = p;
            let right = (k + ku + kl).min(n - 1);
            if p != k {
                for c in k..=right {
                    let (a, b) = (self.slot(k, c), self.slot(p, c));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.slot(k, k)];
            for r in k + 1..=last {
                let sr = self.slot(r, k);
                if self.data[sr] == ZERO {
                    continue;
                }
                let l = self.data[sr] / pivot;
                self.data[sr] = l;
                if right > k {
                    // Row k precedes row r in storage, so the spans are disjoint.
                    let len = right - k;
                    let ks = self.slot(k, k + 1);
                    let rs = self.slot(r, k + 1);
                    let (head, tail) = self.data.split_at_mut(rs);
                    for (x, u) in tail[..len].iter_mut().zip(&head[ks..ks + len]) {
                        *x -= l * u;
                    }
                }
            }
        }
        Ok(BandLu { m: self, piv })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [Complex64]) {
        let a = &self.m;
        let (n, kl, ku) = (a.n, a.kl, a.ku);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            for r in k + 1..=(k + kl).min(n - 1) {
                b[r] -= a.data[a.slot(r, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            for c in k + 1..=(k + ku + kl).min(n - 1) {
                acc -= a.data[a.slot(k, c)] * b[c];
            }
            b[k] = acc / a.data[a.slot(k, k)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solves_random_banded_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (n, kl, ku) = (60, 4, 3);
        let mut a = BandMatrix::zeros(n, kl, ku);
        for r in 0..n {
            for col in r.saturating_sub(kl)..=(r + ku).min(n - 1) {
                // Weak diagonal, so pivoting is exercised.
                let w = if col == r { 0.01 } else { 1.0 };
                a.add(r, col, w * c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unwrap();
            }
        }
        let x: Vec<Complex64> = (0..n).map(|k| c(k as f64, -0.5 * k as f64)).collect();
        let mut b = a.mul_vec(&x);
        let lu = a.clone().factor().unwrap();
        lu.solve(&mut b);
        let err = b.iter().zip(&x).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn zero_column_is_singular() {
        let mut a = BandMatrix::zeros(4, 1, 1);
        a.add(0, 0, c(1.0, 0.0)).unwrap();
        a.add(1, 0, c(2.0, 0.0)).unwrap();
        a.add(2, 3, c(1.0, 0.0)).unwrap();
        a.add(3, 3, c(1.0, 0.0)).unwrap();
        assert!(matches!(a.factor(), Err(LabError::SingularOperator { column: 1 })));
    }

    #[test]
    fn outside_band_rejected() {
        let mut a = BandMatrix::zeros(5, 1, 1);
        assert!(a.add(0, 3, c(1.0, 0.0)).is_err());
    }
}
