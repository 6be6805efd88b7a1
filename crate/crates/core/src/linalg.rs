//! Small dense solves and a banded LU factorization with partial pivoting.

use crate::error::{Error, Result};

/// Solves the dense row-major system `a x = b` in place by Gaussian
/// elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    assert_eq!(a.len(), n * n);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[piv * n + col] == 0.0 || !a[piv * n + col].is_finite() {
            return Err(Error::Singular(col));
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row * n + k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row * n + row];
    }
    Ok(x)
}

/// Square matrix with `kl` sub- and `ku` super-diagonals. Storage leaves
/// room for the `kl` extra super-diagonals created by row interchanges.
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
        Self { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl, "({i}, {j}) outside band");
        i * self.width + (j + self.kl - i)
    }

    /// Adds `v` to entry `(i, j)`; panics outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "({i}, {j}) outside band");
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl || j >= self.n {
            return 0.0;
        }
        self.data[self.slot(i, j)]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// LU factorization with partial pivoting, consuming the matrix.
    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl) = (self.n, self.kl);
        let reach = self.ku + self.kl;
        let mut pivots = vec![0usize; n];
        let mut lower = vec![0.0; n * kl.max(1)];
        for c in 0..n {
            let last_row = (c + kl).min(n - 1);
            let mut p = c;
            let mut best = self.data[self.slot(c, c)].abs();
            for r in c + 1..=last_row {
                let v = self.data[self.slot(r, c)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular(c));
            }
            pivots[c] = p;
            let last_col = (c + reach).min(n - 1);
            if p != c {
                for j in c..=last_col {
                    let (a, b) = (self.slot(c, j), self.slot(p, j));
                    self.data.swap(a, b);
                }
            }
            let d = self.data[self.slot(c, c)];
            for r in c + 1..=last_row {
                let s = self.slot(r, c);
                let f = self.data[s] / d;
                self.data[s] = 0.0;
                lower[c * kl + (r - c - 1)] = f;
                if f == 0.0 {
                    continue;
                }
                for j in c + 1..=last_col {
                    let v = self.data[self.slot(c, j)];
                    let t = self.slot(r, j);
                    self.data[t] -= f * v;
                }
            }
        }
        Ok(BandLu { u: self, lower, pivots })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    u: BandMatrix,
    lower: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.u.n;
        let kl = self.u.kl;
        let reach = self.u.ku + kl;
        let mut x = b.to_vec();
        for c in 0..n {
            let p = self.pivots[c];
            if p != c {
                x.swap(c, p);
            }
            let last_row = (c + kl).min(n - 1);
            for r in c + 1..=last_row {
                x[r] -= self.lower[c * kl + (r - c - 1)] * x[c];
            }
        }
        for i in (0..n).rev() {
            let last_col = (i + reach).min(n - 1);
            let s: f64 = (i + 1..=last_col).map(|j| self.u.data[self.u.slot(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self.u.data[self.u.slot(i, i)];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dense_solve_small_system() {
        let a = vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let x = solve_dense(a, vec![5.0, 3.0, 6.0]).unwrap();
        // x = (1.25, 1.75, 2.25)? verify by substitution
        let r = [2.0 * x[1] + x[2], x[0] + x[1], 3.0 * x[0] + x[2]];
        for (ri, bi) in r.iter().zip([5.0, 3.0, 6.0]) {
            assert!((ri - bi).abs() < 1e-14);
        }
        assert!(solve_dense(vec![1.0, 2.0, 2.0, 4.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn banded_solve_matches_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (n, kl, ku) = (60, 7, 4);
        let mut a = BandMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // weak diagonal so that pivoting is exercised
                let v: f64 = rng.random_range(-1.0..1.0);
                a.add(i, j, if i == j { 0.1 * v } else { v });
            }
        }
        let xt: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = a.matvec(&xt);
        let lu = a.clone().factor().unwrap();
        let x = lu.solve(&b);
        for (u, v) in x.iter().zip(&xt) {
            assert!((u - v).abs() < 1e-9, "{u} vs {v}");
        }
    }
}
