//! Small dense linear algebra over [`Scalar`].
//!
//! The designs fitted in this crate have at most a few hundred columns, so a
//! row-major `Vec` with Householder QR and Cholesky is all that is needed.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Internal(format!(
                "matrix data has {} entries, expected {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Internal("ragged rows".into()));
        }
        let data = rows.iter().flatten().copied().collect();
        Self::from_row_major(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Internal(format!(
                "shape mismatch {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d = *d + a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `vᵀ M v`.
    pub fn quad_form(&self, v: &[T]) -> T {
        let mv = self.mul_vec(v);
        v.iter().zip(&mv).map(|(&a, &b)| a * b).sum()
    }

    /// Principal submatrix on the given row/column indices.
    pub fn select(&self, idx: &[usize]) -> Self {
        let mut out = Self::zeros(idx.len(), idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out[(a, b)] = self[(i, j)];
            }
        }
        out
    }

    pub fn scale(&mut self, c: T) {
        for v in &mut self.data {
            *v = *v * c;
        }
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Replace with `(M + Mᵀ) / 2`.
    pub fn symmetrize(&mut self) {
        let half = T::lit(0.5);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = (self[(i, j)] + self[(j, i)]) * half;
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::Internal("cholesky of non-square matrix".into()));
    }
    let scale = (0..n).fold(T::zero(), |m, i| m.max(a[(i, i)].abs()));
    let tol = scale * T::epsilon() * T::count(n as u64);
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d = d - l[(j, k)] * l[(j, k)];
        }
        if !(d > tol) {
            return Err(Error::Estimation(format!(
                "matrix is not positive definite (pivot {j})"
            )));
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
pub fn spd_inverse<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let l = cholesky(a)?;
    let linv = lower_triangular_inverse(&l);
    let mut inv = linv.transpose().matmul(&linv)?;
    inv.symmetrize();
    Ok(inv)
}

/// Solve `A x = b` for symmetric positive definite `A`.
pub fn spd_solve<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Result<Vec<T>> {
    let l = cholesky(a)?;
    let n = b.len();
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s = s - l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s = s - l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    Ok(x)
}

fn lower_triangular_inverse<T: Scalar>(l: &Matrix<T>) -> Matrix<T> {
    let n = l.rows();
    let mut inv = Matrix::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = T::one() / l[(j, j)];
        for i in (j + 1)..n {
            let mut s = T::zero();
            for k in j..i {
                s = s + l[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -s / l[(i, i)];
        }
    }
    inv
}

fn upper_triangular_inverse<T: Scalar>(r: &Matrix<T>) -> Matrix<T> {
    lower_triangular_inverse(&r.transpose()).transpose()
}

/// Householder QR least squares solution.
#[derive(Debug, Clone)]
pub struct LeastSquares<T> {
    pub coef: Vec<T>,
    /// `(XᵀX)⁻¹`, formed as `R⁻¹R⁻ᵀ`.
    pub xtx_inv: Matrix<T>,
}

/// Minimise `‖y − Xβ‖²` through a Householder QR decomposition of `X`.
///
/// Columns whose `|R_jj|` falls below `rank_tol · max_i |R_ii|` are reported
/// as collinear; nothing is dropped silently.
pub fn least_squares_qr<T: Scalar>(x: &Matrix<T>, y: &[T], rank_tol: T) -> Result<LeastSquares<T>> {
    let (n, k) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(Error::Internal("response length differs from design rows".into()));
    }
    if k == 0 || n < k {
        return Err(Error::Estimation(format!(
            "least squares needs at least as many rows as columns ({n} < {k})"
        )));
    }
    // Column-major working copy keeps the Householder sweeps cache friendly.
    let mut a: Vec<Vec<T>> = (0..k).map(|j| (0..n).map(|i| x[(i, j)]).collect()).collect();
    let mut b = y.to_vec();
    let mut diag = vec![T::zero(); k];

    for j in 0..k {
        let norm = a[j][j..].iter().map(|&v| v * v).sum::<T>().sqrt();
        if norm == T::zero() {
            diag[j] = T::zero();
            continue;
        }
        let alpha = if a[j][j] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = a[j][j..].to_vec();
        v[0] = v[0] - alpha;
        let vnorm2: T = v.iter().map(|&t| t * t).sum();
        if vnorm2 == T::zero() {
            diag[j] = alpha;
            continue;
        }
        let two = T::lit(2.0);
        for col in a.iter_mut().skip(j) {
            let dot: T = col[j..].iter().zip(&v).map(|(&c, &vv)| c * vv).sum();
            let f = two * dot / vnorm2;
            for (c, &vv) in col[j..].iter_mut().zip(&v) {
                *c = *c - f * vv;
            }
        }
        let dot: T = b[j..].iter().zip(&v).map(|(&c, &vv)| c * vv).sum();
        let f = two * dot / vnorm2;
        for (c, &vv) in b[j..].iter_mut().zip(&v) {
            *c = *c - f * vv;
        }
        diag[j] = a[j][j];
    }

    let max_diag = diag.iter().fold(T::zero(), |m, d| m.max(d.abs()));
    let collinear: Vec<usize> = diag
        .iter()
        .enumerate()
        .filter(|(_, d)| d.abs() <= rank_tol * max_diag)
        .map(|(j, _)| j)
        .collect();
    if !collinear.is_empty() {
        return Err(Error::Estimation(format!(
            "design is rank deficient; collinear columns {collinear:?}"
        )));
    }

    let mut r = Matrix::zeros(k, k);
    for j in 0..k {
        for i in 0..=j {
            r[(i, j)] = a[j][i];
        }
    }
    let mut coef = vec![T::zero(); k];
    for i in (0..k).rev() {
        let mut s = b[i];
        for jj in (i + 1)..k {
            s = s - r[(i, jj)] * coef[jj];
        }
        coef[i] = s / r[(i, i)];
    }
    let rinv = upper_triangular_inverse(&r);
    let mut xtx_inv = rinv.matmul(&rinv.transpose())?;
    xtx_inv.symmetrize();
    Ok(LeastSquares { coef, xtx_inv })
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns the eigenvalues and a matrix whose columns are the matching
/// eigenvectors.
pub fn symmetric_eigen<T: Scalar>(a: &Matrix<T>) -> Result<(Vec<T>, Matrix<T>)> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::Internal("eigen-decomposition needs a square matrix".into()));
    }
    let mut m = a.clone();
    m.symmetrize();
    let mut v = Matrix::identity(n);
    let scale = m.max_abs();
    if scale == T::zero() {
        return Ok((vec![T::zero(); n], v));
    }
    let tol = T::epsilon() * scale;
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(m[(p, q)].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= tol {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    Ok(((0..n).map(|i| m[(i, i)]).collect(), v))
}

/// Moore-Penrose inverse of a symmetric positive semi-definite matrix and
/// its numerical rank.
pub fn psd_pinv<T: Scalar>(a: &Matrix<T>) -> Result<(Matrix<T>, usize)> {
    let n = a.rows();
    let (vals, vecs) = symmetric_eigen(a)?;
    let top = vals.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let cut = top * T::epsilon() * T::lit(n.max(1) as f64) * T::lit(100.0);
    let mut out = Matrix::zeros(n, n);
    let mut rank = 0;
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= cut || lam <= T::zero() {
            continue;
        }
        rank += 1;
        let inv = T::one() / lam;
        for i in 0..n {
            let vi = vecs[(i, k)] * inv;
            for j in 0..n {
                out[(i, j)] = out[(i, j)] + vi * vecs[(j, k)];
            }
        }
    }
    Ok((out, rank))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_recovers_exact_linear_model() {
        let rows: Vec<Vec<f64>> = (0..8)
            .map(|i| vec![1.0, i as f64, (i * i) as f64 * 0.1])
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let beta = [0.5, -1.25, 2.0];
        let y = x.mul_vec(&beta);
        let fit = least_squares_qr(&x, &y, 1e-12).unwrap();
        for (a, b) in fit.coef.iter().zip(beta) {
            assert!((a - b).abs() < 1e-12);
        }
        let xtx = x.transpose().matmul(&x).unwrap();
        let prod = xtx.matmul(&fit.xtx_inv).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - e).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn qr_flags_collinear_columns() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![1.0, i as f64, 2.0 * i as f64]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y = vec![1.0; 6];
        let err = least_squares_qr(&x, &y, 1e-10).unwrap_err();
        assert!(err.to_string().contains("collinear"));
    }

    #[test]
    fn spd_inverse_and_solve_agree() {
        let a = Matrix::from_rows(&[
            vec![4.0f64, 1.0, 0.5],
            vec![1.0, 3.0, 0.25],
            vec![0.5, 0.25, 2.0],
        ])
        .unwrap();
        let inv = spd_inverse(&a).unwrap();
        let b = [1.0, 2.0, 3.0];
        let x1 = inv.mul_vec(&b);
        let x2 = spd_solve(&a, &b).unwrap();
        for (p, q) in x1.iter().zip(&x2) {
            assert!((p - q).abs() < 1e-12);
        }
        assert!(cholesky(&Matrix::<f64>::zeros(2, 2)).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let rows: Vec<Vec<f32>> = (0..5).map(|i| vec![1.0, i as f32]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<f32> = (0..5).map(|i| 3.0 + 0.5 * i as f32).collect();
        let fit = least_squares_qr(&x, &y, 1e-5).unwrap();
        assert!((fit.coef[0] - 3.0).abs() < 1e-5);
        assert!((fit.coef[1] - 0.5).abs() < 1e-5);
    }

    #[test]
    fn jacobi_eigen_reconstructs() {
        let a = Matrix::from_rows(&[
            vec![4.0f64, 1.0, 0.5],
            vec![1.0, 3.0, 0.25],
            vec![0.5, 0.25, 2.0],
        ])
        .unwrap();
        let (vals, vecs) = symmetric_eigen(&a).unwrap();
        for k in 0..3 {
            let col: Vec<f64> = (0..3).map(|i| vecs[(i, k)]).collect();
            let av = a.mul_vec(&col);
            for i in 0..3 {
                assert!((av[i] - vals[k] * col[i]).abs() < 1e-12);
            }
        }
        let (pinv, rank) = psd_pinv(&a).unwrap();
        assert_eq!(rank, 3);
        let inv = spd_inverse(&a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((pinv[(i, j)] - inv[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pinv_of_rank_one() {
        let a = Matrix::from_rows(&[vec![1.0f64, 1.0], vec![1.0, 1.0]]).unwrap();
        let (p, rank) = psd_pinv(&a).unwrap();
        assert_eq!(rank, 1);
        assert!((p[(0, 0)] - 0.25).abs() < 1e-14);
        assert!((p[(0, 1)] - 0.25).abs() < 1e-14);
        assert_eq!(psd_pinv(&Matrix::<f64>::zeros(2, 2)).unwrap().1, 0);
    }
}
