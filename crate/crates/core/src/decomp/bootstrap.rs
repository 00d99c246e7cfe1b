//! Cluster bootstrap for nonlinear functions of the event-study fit.

use rand::Rng;
use rayon::prelude::*;

use super::elasticity::{battery_point, ElasticityInputs, ElasticityReport};
use crate::error::{Error, Result};
use crate::estimator::{fit_point, EventStudySpec, PointFit};
use crate::model::outcome::Observation;
use crate::rng::substream;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
    /// Attempts per replicate before giving up on empty cells.
    pub max_redraws: usize,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: 999,
            seed: 20231001,
            max_redraws: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult<T> {
    /// `replicates[r][j]`: statistic `j` in replicate `r`.
    pub replicates: Vec<Vec<T>>,
    /// Standard deviation over finite replicates.
    pub se: Vec<T>,
    /// 2.5% and 97.5% percentiles.
    pub ci_low: Vec<T>,
    pub ci_high: Vec<T>,
    /// Finite replicates per statistic.
    pub valid: Vec<usize>,
    /// Resamples discarded because a required cell came out empty.
    pub redraws: usize,
}

/// Type-7 quantile of sorted data.
fn quantile<T: Scalar>(sorted: &[T], p: f64) -> T {
    if sorted.is_empty() {
        return T::nan();
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = T::lit(h - lo as f64);
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Resample whole clusters with replacement, refit the cell-mean estimator
/// and evaluate `statistic` on each replicate.
///
/// Replicate `r` draws from its own substream, so results do not depend on
/// the number of worker threads.
pub fn bootstrap_inference<T, F>(
    obs: &[Observation<T>],
    spec: &EventStudySpec,
    cfg: &BootstrapConfig,
    statistic: F,
) -> Result<BootstrapResult<T>>
where
    T: Scalar,
    F: Fn(&PointFit<T>) -> Vec<T> + Sync,
{
    if cfg.replicates < 99 {
        return Err(Error::Config(format!("bootstrap needs at least 99 replicates, got {}", cfg.replicates)));
    }
    let mut order: Vec<usize> = (0..obs.len()).collect();
    order.sort_by_key(|&i| obs[i].cluster);
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if pos == 0 || obs[order[pos - 1]].cluster != obs[i].cluster {
            clusters.push(Vec::new());
        }
        clusters.last_mut().expect("pushed above").push(i);
    }
    let g = clusters.len();
    if g < 2 {
        return Err(Error::Estimation("bootstrap needs at least two clusters".into()));
    }

    let draws: Vec<(Vec<T>, usize)> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| -> Result<(Vec<T>, usize)> {
            let mut sample = Vec::with_capacity(obs.len());
            for attempt in 0..cfg.max_redraws {
                let mut rng = substream(cfg.seed, r as u64, attempt as u64);
                sample.clear();
                for _ in 0..g {
                    let c = rng.random_range(0..g);
                    sample.extend(clusters[c].iter().map(|&i| obs[i]));
                }
                match fit_point(&sample, spec) {
                    Ok(pf) => return Ok((statistic(&pf), attempt)),
                    Err(Error::Estimation(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
            Err(Error::Estimation(format!(
                "bootstrap replicate {r} hit empty cells {} times",
                cfg.max_redraws
            )))
        })
        .collect::<Result<_>>()?;

    let redraws = draws.iter().map(|d| d.1).sum();
    let replicates: Vec<Vec<T>> = draws.into_iter().map(|d| d.0).collect();
    let m = replicates.first().map_or(0, Vec::len);
    let mut se = Vec::with_capacity(m);
    let mut ci_low = Vec::with_capacity(m);
    let mut ci_high = Vec::with_capacity(m);
    let mut valid = Vec::with_capacity(m);
    for j in 0..m {
        let mut xs: Vec<T> = replicates.iter().map(|r| r[j]).filter(|v| v.is_finite()).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        let n = xs.len();
        valid.push(n);
        if n < 2 {
            se.push(T::nan());
        } else {
            let mean = xs.iter().copied().sum::<T>() / T::count(n as u64);
            let ss: T = xs.iter().map(|&v| (v - mean) * (v - mean)).sum();
            se.push((ss / T::count(n as u64 - 1)).sqrt());
        }
        ci_low.push(quantile(&xs, 0.025));
        ci_high.push(quantile(&xs, 0.975));
    }
    Ok(BootstrapResult {
        replicates,
        se,
        ci_low,
        ci_high,
        valid,
        redraws,
    })
}

/// Bootstrap the elasticity battery and store the SEs in `report`.
///
/// The pre-event moments in `inputs` are held fixed across replicates.
pub fn attach_bootstrap<T: Scalar>(
    report: &mut ElasticityReport<T>,
    obs: &[Observation<T>],
    spec: &EventStudySpec,
    cfg: &BootstrapConfig,
    inputs: &ElasticityInputs<T>,
) -> Result<BootstrapResult<T>> {
    let res = bootstrap_inference(obs, spec, cfg, |pf| {
        battery_point(&pf.layout, pf.mu_block(), inputs)
            .map(|a| a.to_vec())
            .unwrap_or_else(|_| vec![T::nan(); 6])
    })?;
    let se = |j: usize| res.se[j].is_finite().then_some(res.se[j]);
    report.missing_jobs.se_bootstrap = se(0);
    report.excess_jobs.se_bootstrap = se(1);
    report.pct_affected_wage.se_bootstrap = se(2);
    report.pct_affected_employment.se_bootstrap = se(3);
    report.elasticity_mw.se_bootstrap = se(4);
    report.own_wage_elasticity.se_bootstrap = se(5);
    Ok(res)
}
