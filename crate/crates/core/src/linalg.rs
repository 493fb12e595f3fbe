//! Dense d-vectors and d×d matrices, with the norms used throughout the crate.
//!
//! Matrices are square and stored row-major; `m[(row, col)]` indexes them.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPECTRAL_TOL: f64 = 1e-10;
pub const SPECTRAL_MAX_ITERS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vector(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Vector {
    pub fn zeros(n: usize) -> Self {
        Vector(vec![0.0; n])
    }

    pub fn basis(n: usize, m: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[m] = 1.0;
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        euclidean_norm(&self.0)
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn scaled(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|v| v * s).collect())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(&self) -> Option<Vector> {
        let n = self.norm();
        (n > 0.0).then(|| self.scaled(1.0 / n))
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &v) in entries.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from its rows. Errors unless the rows form a square.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid(format!("matrix rows must all have length {n}")));
        }
        Ok(Matrix {
            n,
            data: rows.concat(),
        })
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::invalid(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(Matrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.data[m * self.n..(m + 1) * self.n]
    }

    pub fn col(&self, n: usize) -> Vector {
        Vector((0..self.n).map(|m| self[(m, n)]).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.n != other.n {
            return Err(Error::invalid(format!(
                "matmul dimension mismatch: {} vs {}",
                self.n, other.n
            )));
        }
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &Matrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn frobenius(&self) -> f64 {
        frobenius_norm(self)
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Euclidean norm of row `m`.
    pub fn row_norm(&self, m: usize) -> f64 {
        euclidean_norm(self.row(m))
    }

    pub fn max_row_norm(&self) -> f64 {
        (0..self.n).map(|m| self.row_norm(m)).fold(0.0, f64::max)
    }

    /// `Mᵀ v` without materializing the transpose.
    pub fn matvec_t(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (m, &vm) in v.iter().enumerate() {
            if vm == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(m)) {
                *o += a * vm;
            }
        }
        out
    }

    pub(crate) fn matvec_into(&self, v: &[f64], out: &mut [f64]) {
        for (m, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(m), v);
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn euclidean_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn frobenius_norm(m: &Matrix) -> f64 {
    m.frobenius_sq().sqrt()
}

pub fn matvec(m: &Matrix, v: &Vector) -> Result<Vector> {
    if m.dim() != v.len() {
        return Err(Error::invalid(format!(
            "matvec dimension mismatch: matrix {} vs vector {}",
            m.dim(),
            v.len()
        )));
    }
    let mut out = vec![0.0; m.dim()];
    m.matvec_into(&v.0, &mut out);
    Ok(Vector(out))
}

pub fn outer(u: &Vector, v: &Vector) -> Result<Matrix> {
    if u.len() != v.len() {
        return Err(Error::invalid(format!(
            "outer product of square matrices needs equal lengths, got {} and {}",
            u.len(),
            v.len()
        )));
    }
    let n = u.len();
    let mut data = Vec::with_capacity(n * n);
    for &a in &u.0 {
        data.extend(v.0.iter().map(|&b| a * b));
    }
    Ok(Matrix { n, data })
}

pub fn hadamard(u: &Vector, v: &Vector) -> Result<Vector> {
    if u.len() != v.len() {
        return Err(Error::invalid(format!(
            "hadamard length mismatch: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    Ok(Vector(u.0.iter().zip(&v.0).map(|(a, b)| a * b).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    pub value: f64,
    pub iterations: usize,
    /// False when `max_iters` ran out before the tolerance was met.
    pub converged: bool,
}

/// Largest singular value by power iteration on `MᵀM`.
///
/// The seed is the normalized all-ones vector, so repeated calls agree
/// bitwise. If the seed happens to lie in the null space of `MᵀM` the
/// iteration restarts from a fixed non-symmetric seed.
pub fn spectral_norm(m: &Matrix, tol: f64, max_iters: usize) -> Result<SpectralEstimate> {
    if !m.is_finite() {
        return Err(Error::invalid("spectral_norm: matrix has non-finite entries"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("spectral_norm: tol must be positive"));
    }
    let n = m.dim();
    let fro = m.frobenius();
    if n == 0 || fro == 0.0 {
        return Ok(SpectralEstimate {
            value: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    let seeds = [
        vec![1.0; n],
        (0..n).map(|i| 1.0 + (i as f64 + 1.0).sqrt()).collect::<Vec<_>>(),
    ];
    let mut best: Option<SpectralEstimate> = None;
    for seed in seeds {
        let est = power_iterate_gram(m, seed, tol, max_iters);
        let collapsed = est.value <= 1e-12 * fro;
        best = Some(match best {
            Some(b) if b.value >= est.value => b,
            _ => est,
        });
        if !collapsed {
            break;
        }
    }
    Ok(best.expect("at least one seed"))
}

fn power_iterate_gram(m: &Matrix, seed: Vec<f64>, tol: f64, max_iters: usize) -> SpectralEstimate {
    let n = m.dim();
    let mut v = seed;
    let s = euclidean_norm(&v);
    v.iter_mut().for_each(|x| *x /= s);
    let mut mv = vec![0.0; n];
    let mut lambda = 0.0;
    for it in 1..=max_iters {
        m.matvec_into(&v, &mut mv);
        let w = m.matvec_t(&mv);
        // Rayleigh quotient of MᵀM at unit v is ‖Mv‖².
        let rq = dot(&mv, &mv);
        let wn = euclidean_norm(&w);
        if wn == 0.0 {
            return SpectralEstimate {
                value: 0.0,
                iterations: it,
                converged: true,
            };
        }
        let resid: f64 = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| (wi - rq * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        let change = (rq - lambda).abs();
        lambda = rq;
        v = w.into_iter().map(|x| x / wn).collect();
        if resid <= tol * rq && change <= tol * rq {
            m.matvec_into(&v, &mut mv);
            let final_rq = dot(&mv, &mv).max(lambda);
            return SpectralEstimate {
                value: final_rq.sqrt(),
                iterations: it,
                converged: true,
            };
        }
    }
    SpectralEstimate {
        value: lambda.sqrt(),
        iterations: max_iters,
        converged: false,
    }
}
