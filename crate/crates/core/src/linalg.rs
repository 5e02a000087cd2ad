//! Dense vector and square-matrix helpers sized for Butcher tableaux.
//!
//! Products of column vectors are component-wise, so `(B e)^2` is written
//! `pow(&matvec(b, &ones(s)), 2)`.

use serde::{Deserialize, Serialize};

/// Dense square matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Builds a matrix from rows; `None` if the rows are not `n` vectors of length `n`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(Matrix {
            n,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    /// Strictly lower-triangular matrix from its rows below the diagonal:
    /// `lower[i - 1]` holds entries `(i, 0..i)`.
    pub fn strictly_lower(n: usize, lower: &[&[f64]]) -> Self {
        let mut m = Matrix::zeros(n);
        for (k, row) in lower.iter().enumerate() {
            let i = k + 1;
            assert!(row.len() <= i, "row {i} reaches the diagonal");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// Negates every entry.
    pub fn negated(&self) -> Self {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|v| -v).collect(),
        }
    }
}

pub fn ones(n: usize) -> Vec<f64> {
    vec![1.0; n]
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn matvec(m: &Matrix, v: &[f64]) -> Vec<f64> {
    debug_assert_eq!(m.dim(), v.len());
    (0..m.dim()).map(|i| dot(m.row(i), v)).collect()
}

/// Component-wise product.
pub fn hadamard(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

/// Component-wise integer power.
pub fn pow(a: &[f64], k: i32) -> Vec<f64> {
    a.iter().map(|x| x.powi(k)).collect()
}

pub fn sum(a: &[f64]) -> f64 {
    a.iter().sum()
}
