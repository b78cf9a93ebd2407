//! Small direct solvers: a reusable tridiagonal (Thomas) factorization and a
//! general banded LU with partial pivoting for the coupled Newton systems.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::NumError;

/// LU factors of a tridiagonal matrix, computed once and reused for many
/// right-hand sides.
///
/// `lower[i]` couples row `i` to `i - 1`, `upper[i]` couples row `i` to `i + 1`.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    lower: Vec<f64>,
    // modified super-diagonal c'_i and inverted pivots 1 / (b_i - a_i c'_{i-1})
    sweep: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl Tridiagonal {
    /// Factor the matrix with sub-diagonal `lower`, diagonal `diag` and
    /// super-diagonal `upper` (all of length n; `lower[0]` and `upper[n-1]`
    /// are ignored).
    pub fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self, NumError> {
        let n = diag.len();
        if lower.len() != n || upper.len() != n {
            return Err(NumError::DimensionMismatch {
                expected: n,
                found: lower.len().min(upper.len()),
            });
        }
        if n == 0 {
            return Ok(Self {
                lower: Vec::new(),
                sweep: Vec::new(),
                inv_pivot: Vec::new(),
            });
        }
        let mut sweep = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let scale = diag.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut prev = 0.0;
        for i in 0..n {
            let a = if i == 0 { 0.0 } else { lower[i] };
            let pivot = diag[i] - a * prev;
            if !(pivot.abs() > 1e-14 * scale) {
                return Err(NumError::Singular { row: i });
            }
            inv_pivot[i] = 1.0 / pivot;
            prev = if i + 1 < n { upper[i] * inv_pivot[i] } else { 0.0 };
            sweep[i] = prev;
        }
        Ok(Self {
            lower: lower.to_vec(),
            sweep,
            inv_pivot,
        })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Overwrite `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        if n == 0 {
            return;
        }
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.sweep[i] * rhs[i + 1];
        }
    }
}

/// Square band matrix with `kl` sub- and `ku` super-diagonals, stored with
/// room for the `kl` extra super-diagonals created by row pivoting.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i >= self.n || j >= self.n || j + self.kl < i || j > i + self.ku + self.kl {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    /// Adds `v` to entry (i, j). Panics when (i, j) lies outside the band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    /// y = A x, using the original band only (call before factoring).
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            *yi = (lo..=hi).map(|j| self.get(i, j) * x[j]).sum();
        }
        y
    }

    /// In-place LU factorization with partial pivoting.
    pub fn factor(mut self) -> Result<BandLu, NumError> {
        let n = self.n;
        let kl = self.kl;
        let reach = self.ku + self.kl;
        let mut pivots = vec![0usize; n];
        let scale = self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if n > 0 && !(scale > 0.0) {
            return Err(NumError::Singular { row: 0 });
        }
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last_row {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > 1e-14 * scale) {
                return Err(NumError::Singular { row: k });
            }
            pivots[k] = p;
            let last_col = (k + reach).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = self.slot(k, j);
                    let b = self.slot(p, j);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.slot(k, k)];
            for i in k + 1..=last_row {
                let sik = self.slot(i, k);
                let factor = self.data[sik] / pivot;
                self.data[sik] = factor;
                if factor != 0.0 {
                    for j in k + 1..=last_col {
                        let skj = self.slot(k, j);
                        let sij = self.slot(i, j);
                        self.data[sij] -= factor * self.data[skj];
                    }
                }
            }
        }
        Ok(BandLu {
            m: self,
            pivots,
        })
    }
}

/// Factored band matrix, ready for repeated solves.
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    pivots: Vec<usize>,
}

impl BandLu {
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.m.n;
        let kl = self.m.kl;
        let reach = self.m.ku + self.m.kl;
        debug_assert_eq!(rhs.len(), n);
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                rhs.swap(k, p);
            }
            let last_row = (k + kl).min(n - 1);
            for i in k + 1..=last_row {
                rhs[i] -= self.m.data[self.m.slot(i, k)] * rhs[k];
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + reach).min(n - 1);
            let mut acc = rhs[k];
            for j in k + 1..=last_col {
                acc -= self.m.data[self.m.slot(k, j)] * rhs[j];
            }
            rhs[k] = acc / self.m.data[self.m.slot(k, k)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_mul(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter()
            .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
            .collect()
    }

    #[test]
    fn thomas_matches_dense_product() {
        let n = 7;
        let lower: Vec<f64> = (0..n).map(|i| -1.0 - 0.1 * i as f64).collect();
        let upper: Vec<f64> = (0..n).map(|i| -0.5 + 0.05 * i as f64).collect();
        let diag: Vec<f64> = (0..n).map(|i| 4.0 + i as f64).collect();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() + 2.0).collect();
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            dense[i][i] = diag[i];
            if i > 0 {
                dense[i][i - 1] = lower[i];
            }
            if i + 1 < n {
                dense[i][i + 1] = upper[i];
            }
        }
        let mut rhs = dense_mul(&dense, &x);
        Tridiagonal::factor(&lower, &diag, &upper)
            .unwrap()
            .solve_in_place(&mut rhs);
        for (a, b) in rhs.iter().zip(&x) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn thomas_detects_singular() {
        let r = Tridiagonal::factor(&[0.0, 1.0], &[1.0, 1.0], &[1.0, 0.0]);
        assert!(matches!(r, Err(NumError::Singular { row: 1 })));
    }

    #[test]
    fn band_lu_needs_pivoting() {
        // zero leading diagonal entry forces a row swap
        let n = 6;
        let mut m = BandMatrix::zeros(n, 2, 2);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i.saturating_sub(2)..=(i + 2).min(n - 1) {
                let v = if i == j && i % 2 == 0 {
                    0.0
                } else {
                    1.0 + ((3 * i + 5 * j) % 7) as f64
                };
                m.set(i, j, v);
                dense[i][j] = v;
            }
        }
        let x: Vec<f64> = (0..n).map(|i| 1.0 - 0.3 * i as f64).collect();
        let mut rhs = dense_mul(&dense, &x);
        assert_eq!(m.mul_vec(&x), rhs);
        m.factor().unwrap().solve_in_place(&mut rhs);
        for (a, b) in rhs.iter().zip(&x) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn band_lu_rejects_singular() {
        let mut m = BandMatrix::zeros(3, 1, 1);
        m.set(0, 0, 1.0);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        m.set(1, 1, 1.0);
        m.set(2, 2, 1.0);
        assert!(m.factor().is_err());
    }
}
