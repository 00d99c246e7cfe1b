//! Cluster-robust sandwich covariance.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{spd_inverse, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VcovKind {
    /// Plain sandwich, no small-sample scaling.
    Cr0,
    /// Sandwich scaled by `G/(G−1)·(n−1)/(n−k)`.
    #[default]
    Cr1,
    /// CR1 with every observation its own cluster.
    Hc1,
}

impl VcovKind {
    pub fn label(self) -> &'static str {
        match self {
            VcovKind::Cr0 => "cr0",
            VcovKind::Cr1 => "cr1",
            VcovKind::Hc1 => "hc1",
        }
    }
}

impl fmt::Display for VcovKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for VcovKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cr0" => Ok(VcovKind::Cr0),
            "cr1" => Ok(VcovKind::Cr1),
            "hc1" => Ok(VcovKind::Hc1),
            _ => Err(Error::Config(format!("unknown vcov variant `{s}`"))),
        }
    }
}

/// Core of the sandwich: `bread · Σ_g s_g s_gᵀ · bread · factor`.
///
/// `score(i)` yields the nonzero entries of observation `i`'s score
/// contribution `w_i x_i ε_i`. Clusters are visited in ascending id order so
/// the floating point sums do not depend on input order within ties.
pub(crate) fn sandwich<T, F>(
    n: usize,
    bread: &Matrix<T>,
    clusters: &[u64],
    kind: VcovKind,
    mut score: F,
) -> Result<(Matrix<T>, usize)>
where
    T: Scalar,
    F: FnMut(usize, &mut Vec<(usize, T)>),
{
    let k = bread.rows();
    if clusters.len() != n {
        return Err(Error::Internal("cluster ids do not match observations".into()));
    }
    if k >= n {
        return Err(Error::Estimation(format!(
            "need more observations than parameters ({n} <= {k})"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    if kind != VcovKind::Hc1 {
        order.sort_by_key(|&i| clusters[i]);
    }

    let mut meat = Matrix::zeros(k, k);
    let mut s = vec![T::zero(); k];
    let mut touched: Vec<usize> = Vec::new();
    let mut mark = vec![false; k];
    let mut buf = Vec::with_capacity(8);
    let mut g = 0usize;

    let flush = |s: &mut Vec<T>, touched: &mut Vec<usize>, mark: &mut Vec<bool>, meat: &mut Matrix<T>| {
        touched.sort_unstable();
        for &a in touched.iter() {
            for &b in touched.iter() {
                meat[(a, b)] = meat[(a, b)] + s[a] * s[b];
            }
        }
        for &a in touched.iter() {
            s[a] = T::zero();
            mark[a] = false;
        }
        touched.clear();
    };

    let mut pos = 0;
    while pos < n {
        let id = clusters[order[pos]];
        let mut end = pos + 1;
        if kind != VcovKind::Hc1 {
            while end < n && clusters[order[end]] == id {
                end += 1;
            }
        }
        for &i in &order[pos..end] {
            buf.clear();
            score(i, &mut buf);
            for &(j, v) in &buf {
                if !mark[j] {
                    mark[j] = true;
                    touched.push(j);
                }
                s[j] = s[j] + v;
            }
        }
        flush(&mut s, &mut touched, &mut mark, &mut meat);
        g += 1;
        pos = end;
    }

    if g < 2 {
        return Err(Error::Estimation("cluster-robust covariance needs at least two clusters".into()));
    }

    let factor = match kind {
        VcovKind::Cr0 => T::one(),
        VcovKind::Cr1 | VcovKind::Hc1 => {
            let (gf, nf, kf) = (T::count(g as u64), T::count(n as u64), T::count(k as u64));
            gf / (gf - T::one()) * (nf - T::one()) / (nf - kf)
        }
    };
    let mut v = bread.matmul(&meat)?.matmul(bread)?;
    v.scale(factor);
    v.symmetrize();
    Ok((v, g))
}

/// Cluster-robust covariance of the OLS fit of `y` on a dense design.
///
/// `clusters[i]` is observation `i`'s cluster id. Residuals are taken as
/// given, so the caller decides which fit they belong to.
pub fn cluster_vcov<T: Scalar>(
    x: &Matrix<T>,
    residuals: &[T],
    clusters: &[u64],
    kind: VcovKind,
) -> Result<Matrix<T>> {
    let n = x.rows();
    if residuals.len() != n {
        return Err(Error::Internal("residuals do not match design rows".into()));
    }
    let bread = spd_inverse(&x.transpose().matmul(x)?)?;
    let (v, _) = sandwich(n, &bread, clusters, kind, |i, out| {
        let e = residuals[i];
        for (j, &xij) in x.row(i).iter().enumerate() {
            if xij != T::zero() {
                out.push((j, xij * e));
            }
        }
    })?;
    Ok(v)
}
