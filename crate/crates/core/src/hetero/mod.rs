//! Heterogeneity: stratified event studies, Kaitz index and binned scatters.

pub mod kaitz;
pub mod scatter;
pub mod stratify;

pub use kaitz::{kaitz_index, lower_median, KaitzTable};
pub use scatter::{binned_scatter, ols_slope, KaitzPoint, ScatterBin};
pub use stratify::{
    run_stratified, Dimension, HeteroOptions, SkippedStratum, StratifiedRun, StratumId, StratumResult,
};

use crate::scalar::Scalar;

/// Join prefecture-level decompositions with their Kaitz index.
pub fn kaitz_points<T: Scalar>(run: &StratifiedRun<T>, kaitz: &KaitzTable) -> Vec<KaitzPoint> {
    run.results
        .iter()
        .filter_map(|r| {
            let StratumId::Prefecture(p) = r.id else {
                return None;
            };
            let d = &r.decomposition;
            Some(KaitzPoint {
                prefecture_id: p,
                kaitz: kaitz.kaitz(p)?,
                delta_a: d.delta_a.estimate.as_f64(),
                delta_b: d.delta_b.map_or(f64::NAN, |b| b.estimate.as_f64()),
                delta_e: d.delta_e.estimate.as_f64(),
            })
        })
        .collect()
}
