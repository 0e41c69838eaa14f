//! Symmetric banded matrices and their Cholesky factorization.
//!
//! The smoothing normal equations are SPD with semi-bandwidth `s`, so the
//! factorization and the triangular solves run in O(n * s^2) and O(n * s).

use crate::error::{Error, Result};

/// Symmetric banded matrix, lower band stored row-major: row `i` keeps
/// entries for columns `i - bw ..= i` at `data[i * (bw + 1) + (j - i + bw)]`.
#[derive(Debug, Clone)]
pub struct SymBandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (self.bw + j - i)
    }

    /// Add `v` to entry (i, j); only the lower triangle is addressed, so pass
    /// the pair with `i >= j`.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let idx = self.idx(i, j);
        self.data[idx] += v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            return 0.0;
        }
        self.data[self.idx(i, j)]
    }

    /// In-place Cholesky factorization `A = L L^T`. Fails if a pivot is not
    /// strictly positive, i.e. the matrix is not numerically SPD.
    pub fn cholesky(mut self) -> Result<BandCholesky> {
        let (n, bw) = (self.n, self.bw);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut sum = self.data[self.idx(i, j)];
                let klo = lo.max(j.saturating_sub(bw));
                for k in klo..j {
                    sum -= self.get(i, k) * self.get(j, k);
                }
                let idx = self.idx(i, j);
                if j < i {
                    self.data[idx] = sum / self.get(j, j);
                } else {
                    if sum <= 0.0 || !sum.is_finite() {
                        return Err(Error::Numerical(format!(
                            "non-positive pivot {sum} at row {i}; matrix is not SPD"
                        )));
                    }
                    self.data[idx] = sum.sqrt();
                }
            }
        }
        Ok(BandCholesky {
            n,
            bw,
            data: self.data,
        })
    }
}

/// Lower-triangular banded Cholesky factor.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandCholesky {
    #[inline]
    fn l(&self, i: usize, j: usize) -> f64 {
        debug_assert!(j <= i && i - j <= self.bw);
        self.data[i * (self.bw + 1) + (self.bw + j - i)]
    }

    /// Solve `A x = b` in place, overwriting `b` with the solution.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let bw = self.bw;
        // forward: L y = b
        for i in 0..self.n {
            let lo = i.saturating_sub(bw);
            let mut sum = b[i];
            for j in lo..i {
                sum -= self.l(i, j) * b[j];
            }
            b[i] = sum / self.l(i, i);
        }
        // backward: L^T x = y
        for i in (0..self.n).rev() {
            let hi = (i + bw).min(self.n - 1);
            let mut sum = b[i];
            for j in i + 1..=hi {
                sum -= self.l(j, i) * b[j];
            }
            b[i] = sum / self.l(i, i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn solves_tridiagonal_system() {
        // second-difference matrix plus identity: SPD with bandwidth 1
        let n = 6;
        let mut a = SymBandMatrix::zeros(n, 1);
        for i in 0..n {
            a.add(i, i, 3.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut b = vec![0.0; n];
        for i in 0..n {
            b[i] = 3.0 * x_true[i];
            if i > 0 {
                b[i] -= x_true[i - 1];
            }
            if i + 1 < n {
                b[i] -= x_true[i + 1];
            }
        }
        let chol = a.cholesky().unwrap();
        chol.solve_in_place(&mut b);
        for i in 0..n {
            assert_relative_eq!(b[i], x_true[i], max_relative = 1e-12);
        }
    }

    #[test]
    fn wider_band_matches_hand_solution() {
        // A = [[4,1,1],[1,4,1],[1,1,4]] (bandwidth 2), b = A * [1,2,3]
        let mut a = SymBandMatrix::zeros(3, 2);
        for i in 0..3 {
            a.add(i, i, 4.0);
            for j in 0..i {
                a.add(i, j, 1.0);
            }
        }
        let mut b = vec![4.0 + 2.0 + 3.0, 1.0 + 8.0 + 3.0, 1.0 + 2.0 + 12.0];
        a.cholesky().unwrap().solve_in_place(&mut b);
        assert_relative_eq!(b[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(b[1], 2.0, max_relative = 1e-14);
        assert_relative_eq!(b[2], 3.0, max_relative = 1e-14);
    }

    #[test]
    fn rejects_indefinite_matrix() {
        let mut a = SymBandMatrix::zeros(2, 1);
        a.add(0, 0, 1.0);
        a.add(1, 0, 2.0);
        a.add(1, 1, 1.0); // determinant -3: not SPD
        assert!(matches!(a.cholesky(), Err(Error::Numerical(_))));
    }
}
