//! Equal-count binned scatter of prefecture effects against the Kaitz index.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KaitzPoint {
    pub prefecture_id: u32,
    pub kaitz: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    pub delta_e: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterBin {
    /// Mean Kaitz index of the bin's points.
    pub center: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    pub delta_e: f64,
    pub count: usize,
}

/// Sort by Kaitz (ties by prefecture) and cut into `n_bins` groups whose
/// sizes differ by at most one.
pub fn binned_scatter(points: &[KaitzPoint], n_bins: usize) -> Result<Vec<ScatterBin>> {
    if n_bins == 0 {
        return Err(Error::Config("binned scatter needs at least one bin".into()));
    }
    if n_bins > points.len() {
        return Err(Error::Config(format!(
            "{n_bins} bins requested for {} points",
            points.len()
        )));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.kaitz.total_cmp(&b.kaitz).then(a.prefecture_id.cmp(&b.prefecture_id)));
    let mut distinct = sorted.iter().map(|p| p.kaitz).collect::<Vec<_>>();
    distinct.dedup();
    if distinct.len() < n_bins {
        return Err(Error::Config(format!(
            "{n_bins} bins requested but only {} distinct Kaitz values",
            distinct.len()
        )));
    }
    let n = sorted.len();
    Ok((0..n_bins)
        .map(|k| {
            let chunk = &sorted[k * n / n_bins..(k + 1) * n / n_bins];
            let c = chunk.len() as f64;
            let mean = |f: fn(&KaitzPoint) -> f64| chunk.iter().map(f).sum::<f64>() / c;
            ScatterBin {
                center: mean(|p| p.kaitz),
                delta_a: mean(|p| p.delta_a),
                delta_b: mean(|p| p.delta_b),
                delta_e: mean(|p| p.delta_e),
                count: chunk.len(),
            }
        })
        .collect())
}

/// Least-squares slope of `y` on `x`; `None` when `x` has no spread.
pub fn ols_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let sxx: f64 = x[..n].iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x[..n].iter().zip(&y[..n]).map(|(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
