//! Banded storage and LU factorization with partial pivoting.

use crate::error::{invalid, Error, Result};

/// Square matrix with `kl` sub-diagonals and `ku` super-diagonals.
///
/// Rows are stored with room for the `kl` extra super-diagonals created by
/// row interchanges during factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
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

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if j + self.kl < i || j > i + self.kl + self.ku {
            None
        } else {
            Some(i * self.width + j + self.kl - i)
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Adds `v` to entry `(i, j)`, which must lie inside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i},{j}) outside the band");
        let s = self.slot(i, j).unwrap();
        self.data[s] += v;
    }

    /// Column range of the declared band in row `i`.
    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.kl)..(i + self.ku + 1).min(self.n)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row_range(i).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// Dense copy, for diagnostics and small problems.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// LU factors of a row-equilibrated band matrix.
#[derive(Debug, Clone)]
pub struct BandLu {
    lu: BandMatrix,
    pivots: Vec<usize>,
    row_scale: Vec<f64>,
}

impl BandLu {
    pub fn factor(a: &BandMatrix) -> Result<Self> {
        let n = a.n;
        let mut lu = a.clone();
        let mut row_scale = vec![1.0; n];
        for (i, s) in row_scale.iter_mut().enumerate() {
            let m = a.row_range(i).fold(0.0f64, |m, j| m.max(a.get(i, j).abs()));
            if m == 0.0 {
                return Err(Error::Singular { pivot: 0.0, row: i });
            }
            *s = 1.0 / m;
            let start = i * lu.width;
            for v in &mut lu.data[start..start + lu.width] {
                *v *= *s;
            }
        }
        let (kl, ku) = (a.kl, a.ku);
        let mut pivots = vec![0; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.get(k, k).abs();
            for i in k + 1..=last_row {
                let v = lu.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= 1e-14 || !best.is_finite() {
                return Err(Error::Singular { pivot: best, row: k });
            }
            pivots[k] = p;
            let last_col = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = lu.slot(k, j).unwrap();
                    let b = lu.slot(p, j).unwrap();
                    lu.data.swap(a, b);
                }
            }
            let d = lu.get(k, k);
            for i in k + 1..=last_row {
                let si = lu.slot(i, k).unwrap();
                let l = lu.data[si] / d;
                lu.data[si] = l;
                if l == 0.0 {
                    continue;
                }
                for j in k + 1..=last_col {
                    let kj = lu.data[lu.slot(k, j).unwrap()];
                    let ij = lu.slot(i, j).unwrap();
                    lu.data[ij] -= l * kj;
                }
            }
        }
        Ok(Self {
            lu,
            pivots,
            row_scale,
        })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let lu = &self.lu;
        let n = lu.n;
        let mut x: Vec<f64> = b.iter().zip(&self.row_scale).map(|(v, s)| v * s).collect();
        for k in 0..n {
            x.swap(k, self.pivots[k]);
            let xk = x[k];
            for i in k + 1..=(k + lu.kl).min(n.saturating_sub(1)) {
                x[i] -= lu.data[lu.slot(i, k).unwrap()] * xk;
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..=(i + lu.kl + lu.ku).min(n - 1) {
                s -= lu.data[lu.slot(i, j).unwrap()] * x[j];
            }
            x[i] = s / lu.data[lu.slot(i, i).unwrap()];
        }
        x
    }
}

/// Solves `a x = b` with two rounds of iterative refinement.
pub fn solve_banded(a: &BandMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.n {
        return Err(invalid("right-hand side length does not match the matrix"));
    }
    if a.n == 0 {
        return Ok(Vec::new());
    }
    let lu = BandLu::factor(a)?;
    let mut x = lu.solve(b);
    for _ in 0..2 {
        let ax = a.matvec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
        let dx = lu.solve(&r);
        for (x, d) in x.iter_mut().zip(&dx) {
            *x += d;
        }
    }
    Ok(x)
}

/// `‖ax − b‖ / ‖b‖` in the Euclidean norm.
pub fn relative_residual(a: &BandMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let r: f64 = ax.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nb == 0.0 {
        r
    } else {
        r / nb
    }
}
