//! Dense symmetric matrices and Cholesky solves for the small generalized
//! least-squares systems behind the linear estimators.

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Leading `k × k` block.
    pub fn leading(&self, k: usize) -> SquareMatrix {
        assert!(k <= self.dim);
        Self::from_fn(k, |i, j| self.get(i, j))
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim).map(|i| crate::numeric::dot(self.row(i), v)).collect()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    lower: SquareMatrix,
}

impl Cholesky {
    pub fn factor(a: &SquareMatrix) -> Result<Self> {
        let n = a.dim();
        let mut l = SquareMatrix::zeros(n);
        for j in 0..n {
            let mut diag = CompensatedSum::new();
            diag.add(a.get(j, j));
            for k in 0..j {
                diag.add(-l.get(j, k) * l.get(j, k));
            }
            let d = diag.value();
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j, value: d });
            }
            let ljj = d.sqrt();
            l.set(j, j, ljj);
            for i in (j + 1)..n {
                let mut s = CompensatedSum::new();
                s.add(a.get(i, j));
                for k in 0..j {
                    s.add(-l.get(i, k) * l.get(j, k));
                }
                l.set(i, j, s.value() / ljj);
            }
        }
        Ok(Self { lower: l })
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let l = &self.lower;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = CompensatedSum::new();
            s.add(b[i]);
            for k in 0..i {
                s.add(-l.get(i, k) * y[k]);
            }
            y[i] = s.value() / l.get(i, i);
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = CompensatedSum::new();
            s.add(y[i]);
            for k in (i + 1)..n {
                s.add(-l.get(k, i) * x[k]);
            }
            x[i] = s.value() / l.get(i, i);
        }
        x
    }
}
