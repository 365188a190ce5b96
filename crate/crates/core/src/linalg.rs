//! Small dense matrices and a cyclic Jacobi eigensolver.
//!
//! Channel counts in this crate are tiny (2 to 8), so a plain row-major
//! `Vec<f64>` with O(K³) products is all that is needed.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense real matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<f64>>", try_from = "Vec<Vec<f64>>")]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Mat::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from row slices; all rows must have the same length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::dims(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Mat {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "matmul: inner dimensions differ");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec: dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, c: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Mat) -> Mat {
        self.add(&rhs.scale(-1.0))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Sum of squared off-diagonal entries.
    pub fn off_diagonal_sq(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    acc += self[(i, j)] * self[(i, j)];
                }
            }
        }
        acc
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Applies the plane rotation `M ← Rᵀ M R`, where `R` is the identity
    /// except `R[p][p] = R[q][q] = c`, `R[p][q] = -s`, `R[q][p] = s`.
    pub(crate) fn rotate_congruence(&mut self, p: usize, q: usize, c: f64, s: f64) {
        let n = self.rows;
        // rows: M ← Rᵀ M
        for j in 0..n {
            let mp = self[(p, j)];
            let mq = self[(q, j)];
            self[(p, j)] = c * mp + s * mq;
            self[(q, j)] = -s * mp + c * mq;
        }
        // columns: M ← M R
        for i in 0..n {
            let mp = self[(i, p)];
            let mq = self[(i, q)];
            self[(i, p)] = c * mp + s * mq;
            self[(i, q)] = -s * mp + c * mq;
        }
    }

    /// Applies `V ← V R` for the same rotation as [`Mat::rotate_congruence`].
    pub(crate) fn rotate_columns(&mut self, p: usize, q: usize, c: f64, s: f64) {
        for i in 0..self.rows {
            let vp = self[(i, p)];
            let vq = self[(i, q)];
            self[(i, p)] = c * vp + s * vq;
            self[(i, q)] = -s * vp + c * vq;
        }
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.rows).map(|i| self.row(i)))
            .finish()
    }
}

impl From<Mat> for Vec<Vec<f64>> {
    fn from(m: Mat) -> Self {
        m.to_rows()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Mat {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Mat::from_rows(&rows)
    }
}

/// Eigendecomposition `A = E·diag(values)·Eᵀ` of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues, sorted in descending order.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the same order as `values`.
    pub vectors: Mat,
    pub sweeps: usize,
}

/// Cyclic Jacobi eigensolver for real symmetric matrices.
///
/// Sweeps over all `(p, q)` pairs, annihilating `A[p][q]` with a plane
/// rotation, until the off-diagonal Frobenius norm is at most `tol` times the
/// Frobenius norm of `A` (or `tol` itself for the zero matrix).
pub fn jacobi_eigen(a: &Mat, tol: f64, max_sweeps: usize) -> Result<SymmetricEigen> {
    if !a.is_square() {
        return Err(Error::dims(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let n = a.rows();
    let mut m = a.clone();
    // symmetrize so tiny asymmetries from accumulation cannot stall the sweep
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let mut v = Mat::identity(n);
    let scale = m.frobenius();
    let target = if scale > 0.0 { tol * scale } else { tol };

    let mut sweeps = 0;
    while m.off_diagonal_sq().sqrt() > target {
        if sweeps == max_sweeps {
            return Err(Error::invalid(format!(
                "Jacobi eigensolver did not converge in {max_sweeps} sweeps"
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                // symmetric Schur decomposition of the (p, q) block
                let tau = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // the convention in rotate_congruence uses R[p][q] = -s
                m.rotate_congruence(p, q, c, -s);
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                v.rotate_columns(p, q, c, -s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = Mat::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(e: &SymmetricEigen) -> Mat {
        e.vectors
            .matmul(&Mat::from_diag(&e.values))
            .matmul(&e.vectors.transpose())
    }

    #[test]
    fn eigen_of_diagonal_is_trivial() {
        let a = Mat::from_diag(&[1.0, 3.0, 2.0]);
        let e = jacobi_eigen(&a, 1e-14, 50).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(e.sweeps, 0);
    }

    #[test]
    fn eigen_2x2_known_values() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1
        let a = Mat::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let e = jacobi_eigen(&a, 1e-14, 50).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let v0 = [e.vectors[(0, 0)], e.vectors[(1, 0)]];
        assert!((v0[0].abs() - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((v0[0] - v0[1]).abs() < 1e-14);
    }

    #[test]
    fn eigen_reconstructs_dense_matrix() {
        let a = Mat::from_rows(&[
            [4.0, -2.0, 0.5, 1.0],
            [-2.0, 3.0, 0.25, 0.0],
            [0.5, 0.25, 1.0, -0.75],
            [1.0, 0.0, -0.75, 2.0],
        ])
        .unwrap();
        let e = jacobi_eigen(&a, 1e-14, 50).unwrap();
        assert!(reconstruct(&e).sub(&a).frobenius() < 1e-12);
        let vtv = e.vectors.transpose().matmul(&e.vectors);
        assert!(vtv.sub(&Mat::identity(4)).frobenius() < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn eigen_rejects_rectangular() {
        assert!(jacobi_eigen(&Mat::zeros(2, 3), 1e-12, 10).is_err());
    }

    #[test]
    fn serde_as_nested_rows() {
        let m = Mat::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[1.0,2.0],[3.0,4.0]]");
        let back: Mat = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<Mat>("[[1.0],[2.0,3.0]]").is_err());
    }

    #[test]
    fn congruence_rotation_matches_explicit_product() {
        let a = Mat::from_rows(&[[1.0, 2.0, 3.0], [2.0, 5.0, 6.0], [3.0, 6.0, 9.0]]).unwrap();
        let (c, s) = (0.8, 0.6);
        let mut r = Mat::identity(3);
        r[(0, 0)] = c;
        r[(2, 2)] = c;
        r[(0, 2)] = -s;
        r[(2, 0)] = s;
        let expected = r.transpose().matmul(&a).matmul(&r);
        let mut got = a.clone();
        got.rotate_congruence(0, 2, c, s);
        assert!(got.sub(&expected).frobenius() < 1e-14);
    }
}
