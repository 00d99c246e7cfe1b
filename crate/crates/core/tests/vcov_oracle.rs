mod common;

use std::collections::BTreeMap;

use common::random_panel;
use mwbunch::estimator::{cluster_vcov, fit_event_study, VcovKind};
use mwbunch::linalg::Matrix;
use nalgebra::{DMatrix, DVector};

/// Literal CR1: loop over clusters, sum X_g' e_g e_g' X_g, sandwich with
/// (X'X)^{-1} and apply G/(G-1) (n-1)/(n-k).
fn literal_cr1(x: &DMatrix<f64>, e: &DVector<f64>, clusters: &[u64]) -> DMatrix<f64> {
    let (n, k) = x.shape();
    let bread = (x.transpose() * x).try_inverse().unwrap();
    let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, &c) in clusters.iter().enumerate() {
        groups.entry(c).or_default().push(i);
    }
    let mut meat = DMatrix::zeros(k, k);
    for rows in groups.values() {
        let mut s = DVector::zeros(k);
        for &i in rows {
            s += x.row(i).transpose() * e[i];
        }
        meat += &s * s.transpose();
    }
    let g = groups.len() as f64;
    let c = g / (g - 1.0) * (n as f64 - 1.0) / (n as f64 - k as f64);
    (&bread * meat * &bread) * c
}

fn assert_matrix_close(a: &Matrix<f64>, b: &DMatrix<f64>) {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..b.nrows() {
        for j in 0..b.ncols() {
            let d = (a[(i, j)] - b[(i, j)]).abs();
            assert!(d <= 1e-10 * scale, "({i},{j}): {} vs {}", a[(i, j)], b[(i, j)]);
        }
    }
}

#[test]
fn dense_cr1_matches_cluster_loop_on_thirty_observations() {
    let n = 30;
    let k = 3;
    let mut state = 7u64;
    let mut draw = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![1.0, draw(), draw()]).collect();
    let resid: Vec<f64> = (0..n).map(|_| draw()).collect();
    let clusters: Vec<u64> = (0..n as u64).map(|i| i % 7).collect();

    let x = Matrix::from_rows(&rows).unwrap();
    let ours = cluster_vcov(&x, &resid, &clusters, VcovKind::Cr1).unwrap();
    let xn = DMatrix::from_fn(n, k, |i, j| rows[i][j]);
    let oracle = literal_cr1(&xn, &DVector::from_vec(resid), &clusters);
    assert_matrix_close(&ours, &oracle);
}

#[test]
fn event_study_cr1_matches_cluster_loop() {
    for seed in 0..20 {
        let (obs, spec) = random_panel(seed, false);
        let fit = fit_event_study(&obs, &spec).unwrap();
        let k = fit.layout.k();
        let n = obs.len();
        let mut x = DMatrix::zeros(n, k);
        for (i, o) in obs.iter().enumerate() {
            let (cols, len) = fit.layout.design_row(o.group, o.t).unwrap();
            for &c in &cols[..len] {
                x[(i, c)] = 1.0;
            }
        }
        let e = DVector::from_vec(fit.residuals.clone());
        let clusters: Vec<u64> = obs.iter().map(|o| o.cluster).collect();
        assert_matrix_close(&fit.vcov, &literal_cr1(&x, &e, &clusters));
    }
}

#[test]
fn singleton_clusters_give_hc1() {
    let (mut obs, spec) = random_panel(3, false);
    for (i, o) in obs.iter_mut().enumerate() {
        o.cluster = i as u64;
    }
    let cr1 = fit_event_study(&obs, &spec).unwrap();
    let mut hc = spec.clone();
    hc.vcov = VcovKind::Hc1;
    let hc1 = fit_event_study(&obs, &hc).unwrap();
    for i in 0..cr1.layout.k() {
        let a = cr1.vcov[(i, i)];
        let b = hc1.vcov[(i, i)];
        assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-12));
    }
}
