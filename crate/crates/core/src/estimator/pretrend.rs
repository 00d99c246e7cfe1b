//! Pre-period coefficient tests.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use super::event_study::EventStudyFit;
use crate::error::Result;
use crate::linalg::psd_pinv;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PretrendRow<T> {
    pub l: i32,
    pub e: i32,
    pub estimate: T,
    pub se: T,
    /// Zero when both estimate and SE vanish, absent when only the SE does.
    pub z: Option<T>,
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PretrendReport<T> {
    pub rows: Vec<PretrendRow<T>>,
    /// `μ_preᵀ V_pre⁺ μ_pre`.
    pub wald: T,
    /// Rank of `V_pre`.
    pub df: usize,
    pub p_value: Option<f64>,
}

impl<T: Scalar> PretrendReport<T> {
    pub fn rejects(&self, level: f64) -> bool {
        self.p_value.is_some_and(|p| p < level)
    }
}

pub fn pretrend_report<T: Scalar>(fit: &EventStudyFit<T>) -> Result<PretrendReport<T>> {
    let layout = &fit.layout;
    let normal = Normal::standard();
    let mut rows = Vec::new();
    let mut idx = Vec::new();
    for &e in &layout.groups {
        for l in layout.pre_periods() {
            let i = layout.mu_index(l, e).expect("pre period of the layout");
            idx.push(i);
            let estimate = fit.coef[i];
            let se = fit.se(i);
            let z = if se > T::zero() {
                Some(estimate / se)
            } else if estimate == T::zero() {
                Some(T::zero())
            } else {
                None
            };
            let p_value = z.map(|z| 2.0 * (1.0 - normal.cdf(z.as_f64().abs())));
            rows.push(PretrendRow {
                l,
                e,
                estimate,
                se,
                z,
                p_value,
            });
        }
    }
    rows.sort_by_key(|r| (r.e, r.l));

    let v = fit.vcov.select(&idx);
    let mu: Vec<T> = idx.iter().map(|&i| fit.coef[i]).collect();
    let (pinv, df) = psd_pinv(&v)?;
    let wald = if df == 0 { T::zero() } else { pinv.quad_form(&mu).max(T::zero()) };
    let p_value = (df > 0)
        .then(|| ChiSquared::new(df as f64).ok())
        .flatten()
        .map(|chi| 1.0 - chi.cdf(wald.as_f64()));
    Ok(PretrendReport { rows, wald, df, p_value })
}
