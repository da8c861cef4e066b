//! Banded matrices with a direct LU solve (partial pivoting).

use crate::{Error, Result};

/// Square matrix with `lower` sub-diagonals and `upper` super-diagonals.
///
/// Rows are stored as windows wide enough to hold the extra `lower`
/// super-diagonals created by row interchanges during elimination.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        let width = 2 * lower + upper + 1;
        BandMatrix {
            n,
            lower,
            upper,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.lower >= i && j <= i + self.upper + self.lower);
        i * self.width + (j + self.lower - i)
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.lower >= i && j <= i + self.upper
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.slot(i, j)]
        } else {
            0.0
        }
    }

    /// Adds `value` at `(i, j)`. Panics if the entry lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(
            self.in_band(i, j),
            "entry ({i}, {j}) outside band (lower {}, upper {})",
            self.lower,
            self.upper
        );
        let k = self.slot(i, j);
        self.data[k] += value;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.lower);
                let hi = (i + self.upper).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Solves `A x = rhs`, consuming the matrix. `rhs` is overwritten with `x`.
    pub fn solve_in_place(mut self, rhs: &mut [f64]) -> Result<()> {
        assert_eq!(rhs.len(), self.n);
        let n = self.n;
        let reach = self.lower + self.upper;
        for k in 0..n {
            let last_row = (k + self.lower).min(n - 1);
            let mut pivot_row = k;
            let mut pivot_abs = self.data[self.slot(k, k)].abs();
            for i in k + 1..=last_row {
                let v = self.data[self.slot(i, k)].abs();
                if v > pivot_abs {
                    pivot_abs = v;
                    pivot_row = i;
                }
            }
            if pivot_abs == 0.0 || !pivot_abs.is_finite() {
                return Err(Error::SingularJacobian { column: k });
            }
            let last_col = (k + reach).min(n - 1);
            if pivot_row != k {
                for j in k..=last_col {
                    let a = self.slot(k, j);
                    let b = self.slot(pivot_row, j);
                    self.data.swap(a, b);
                }
                rhs.swap(k, pivot_row);
            }
            let pivot = self.data[self.slot(k, k)];
            for i in k + 1..=last_row {
                let s = self.slot(i, k);
                let factor = self.data[s] / pivot;
                if factor == 0.0 {
                    continue;
                }
                self.data[s] = 0.0;
                for j in k + 1..=last_col {
                    let src = self.data[self.slot(k, j)];
                    let dst = self.slot(i, j);
                    self.data[dst] -= factor * src;
                }
                rhs[i] -= factor * rhs[k];
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + reach).min(n - 1);
            let mut acc = rhs[k];
            for j in k + 1..=last_col {
                acc -= self.data[self.slot(k, j)] * rhs[j];
            }
            rhs[k] = acc / self.data[self.slot(k, k)];
            if !rhs[k].is_finite() {
                return Err(Error::SingularJacobian { column: k });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.to_vec();
        let mut x = b.to_vec();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
                .unwrap();
            m.swap(k, p);
            x.swap(k, p);
            for i in k + 1..n {
                let f = m[i][k] / m[k][k];
                for j in k..n {
                    m[i][j] -= f * m[k][j];
                }
                x[i] -= f * x[k];
            }
        }
        for k in (0..n).rev() {
            let s: f64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
            x[k] = (x[k] - s) / m[k][k];
        }
        x
    }

    #[test]
    fn tridiagonal_poisson() {
        let n = 50;
        let mut a = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
            if i + 1 < n {
                a.add(i, i + 1, -1.0);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = a.mul_vec(&x);
        a.solve_in_place(&mut b).unwrap();
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-11);
        }
    }

    #[test]
    fn needs_pivoting() {
        // zero on the diagonal forces a row swap
        let mut a = BandMatrix::zeros(3, 2, 2);
        let entries = [[0.0, 1.0, 2.0], [3.0, 4.0, 5.0], [1.0, 0.0, 1.0]];
        for (i, row) in entries.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                a.add(i, j, v);
            }
        }
        let mut b = vec![3.0, 12.0, 2.0];
        a.solve_in_place(&mut b).unwrap();
        for (u, v) in b.iter().zip([1.0, 1.0, 1.0]) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_detected() {
        let a = BandMatrix::zeros(4, 2, 2);
        let mut b = vec![1.0; 4];
        assert!(matches!(
            a.solve_in_place(&mut b),
            Err(Error::SingularJacobian { column: 0 })
        ));
    }

    #[test]
    #[should_panic]
    fn out_of_band_write_panics() {
        let mut a = BandMatrix::zeros(5, 1, 1);
        a.add(0, 3, 1.0);
    }

    proptest! {
        #[test]
        fn matches_dense_elimination(seed in proptest::collection::vec(-1.0..1.0f64, 5 * 12 + 12)) {
            let n = 12;
            let (lower, upper) = (2, 2);
            let mut a = BandMatrix::zeros(n, lower, upper);
            let mut dense = vec![vec![0.0; n]; n];
            let mut k = 0;
            for i in 0..n {
                for d in 0..5 {
                    let j = i as isize + d as isize - 2;
                    if j >= 0 && (j as usize) < n {
                        let v = seed[k] + if d == 2 { 3.0 } else { 0.0 };
                        a.add(i, j as usize, v);
                        dense[i][j as usize] = v;
                    }
                    k += 1;
                }
            }
            let b = &seed[5 * n..];
            let expected = dense_solve(&dense, b);
            let mut x = b.to_vec();
            a.solve_in_place(&mut x).unwrap();
            for (u, v) in x.iter().zip(&expected) {
                prop_assert!((u - v).abs() < 1e-9 * (1.0 + v.abs()));
            }
        }
    }
}
