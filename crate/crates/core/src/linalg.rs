//! Tridiagonal systems.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// `A x = rhs` with `A` tridiagonal. Row `i` reads
/// `lower[i-1] x[i-1] + diag[i] x[i] + upper[i] x[i+1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalSystem {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Nonpositive off-diagonals and a strictly dominant positive diagonal.
    pub fn is_m_matrix(&self) -> bool {
        let n = self.len();
        if self.lower.iter().chain(&self.upper).any(|&v| v > 0.0) {
            return false;
        }
        (0..n).all(|i| {
            let off =
                if i > 0 { self.lower[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.upper[i].abs() } else { 0.0 };
            self.diag[i] > off
        })
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Thomas elimination without pivoting; stable for diagonally dominant
    /// matrices, which is all the assembly produces.
    pub fn solve(&self) -> Result<Vec<f64>> {
        solve_tridiagonal(&self.lower, &self.diag, &self.upper, &self.rhs)
    }
}

pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    assert!(lower.len() + 1 == n && upper.len() + 1 == n && rhs.len() == n);
    let mut c = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);
    if diag[0] == 0.0 {
        return Err(Error::SingularPivot(0));
    }
    c.push(if n > 1 { upper[0] / diag[0] } else { 0.0 });
    d.push(rhs[0] / diag[0]);
    for i in 1..n {
        let pivot = diag[i] - lower[i - 1] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::SingularPivot(i));
        }
        c.push(if i + 1 < n { upper[i] / pivot } else { 0.0 });
        d.push((rhs[i] - lower[i - 1] * d[i - 1]) / pivot);
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}
