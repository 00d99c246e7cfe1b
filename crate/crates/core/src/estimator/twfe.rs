//! Unit and time fixed-effects regression for weekly earnings.

use std::collections::{BTreeMap, BTreeSet};

use statrs::distribution::{ContinuousCDF, Normal};

use super::vcov::{cluster_vcov, VcovKind};
use crate::error::{Error, Result};
use crate::linalg::{least_squares_qr, Matrix};
use crate::model::types::{ContractRecord, StudyWindow};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwfeObservation<T> {
    pub unit: u32,
    pub time: usize,
    pub y: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeEffect<T> {
    pub time: usize,
    pub estimate: T,
    pub se: T,
    pub ci_low: T,
    pub ci_high: T,
}

#[derive(Debug, Clone)]
pub struct TwoWayFeFit<T> {
    /// First observed period; its effect is zero by construction.
    pub reference_time: usize,
    /// `a_u + b_ref` for every unit.
    pub unit_effects: Vec<(u32, T)>,
    /// `b_t − b_ref`, reference included with zero effect and zero width.
    pub time_effects: Vec<TimeEffect<T>>,
    /// `SSR / (n − k)`.
    pub residual_variance: T,
    /// Periods inside the observed range with no observation at all.
    pub dropped_periods: Vec<usize>,
    pub n_obs: usize,
}

/// Week index of a date, counted from the window's first day.
pub fn week_of(window: &StudyWindow, date: chrono::NaiveDate) -> Option<usize> {
    let d = (date - window.first_day()).num_days();
    (d >= 0 && date < window.end_day()).then(|| d as usize / 7)
}

/// Prefecture-week earnings Σ wage × hours over matched contracts.
///
/// Every prefecture with any in-window record gets a row for every week in
/// which some prefecture has a record, zero when it had no matches.
pub fn weekly_earnings(records: &[ContractRecord], window: &StudyWindow) -> Vec<TwfeObservation<f64>> {
    let mut sums: BTreeMap<(u32, usize), f64> = BTreeMap::new();
    let mut units = BTreeSet::new();
    let mut weeks = BTreeSet::new();
    for r in records {
        let Some(w) = week_of(window, r.date) else { continue };
        units.insert(r.prefecture_id);
        weeks.insert(w);
        if r.matched {
            *sums.entry((r.prefecture_id, w)).or_default() += r.earnings();
        }
    }
    let mut out = Vec::with_capacity(units.len() * weeks.len());
    for &u in &units {
        for &w in &weeks {
            out.push(TwfeObservation {
                unit: u,
                time: w,
                y: sums.get(&(u, w)).copied().unwrap_or(0.0),
            });
        }
    }
    out
}

/// OLS of `y` on unit and period dummies with HC1 standard errors and 95%
/// normal confidence intervals for the period effects.
pub fn fit_two_way_fe<T: Scalar>(data: &[TwfeObservation<T>]) -> Result<TwoWayFeFit<T>> {
    let units: Vec<u32> = data.iter().map(|d| d.unit).collect::<BTreeSet<_>>().into_iter().collect();
    let times: Vec<usize> = data.iter().map(|d| d.time).collect::<BTreeSet<_>>().into_iter().collect();
    let (Some(&first), Some(&last)) = (times.first(), times.last()) else {
        return Err(Error::Estimation("no observations for the two-way regression".into()));
    };
    let dropped_periods: Vec<usize> = (first..=last).filter(|t| times.binary_search(t).is_err()).collect();

    let nu = units.len();
    let k = nu + times.len() - 1;
    let n = data.len();
    if n <= k {
        return Err(Error::Estimation(format!("{n} observations for {k} fixed effects")));
    }
    let mut x = Matrix::zeros(n, k);
    let mut y = Vec::with_capacity(n);
    for (i, d) in data.iter().enumerate() {
        let u = units.binary_search(&d.unit).expect("unit collected above");
        x[(i, u)] = T::one();
        let tp = times.binary_search(&d.time).expect("period collected above");
        if tp > 0 {
            x[(i, nu + tp - 1)] = T::one();
        }
        y.push(d.y);
    }
    let ls = least_squares_qr(&x, &y, T::epsilon() * T::lit(1e3))?;
    let fitted = x.mul_vec(&ls.coef);
    let resid: Vec<T> = y.iter().zip(&fitted).map(|(&a, &b)| a - b).collect();
    let ssr: T = resid.iter().map(|&e| e * e).sum();
    let own: Vec<u64> = (0..n as u64).collect();
    let vcov = cluster_vcov(&x, &resid, &own, VcovKind::Hc1)?;

    let z = T::lit(Normal::standard().inverse_cdf(0.975));
    let mut time_effects = Vec::with_capacity(times.len());
    time_effects.push(TimeEffect {
        time: first,
        estimate: T::zero(),
        se: T::zero(),
        ci_low: T::zero(),
        ci_high: T::zero(),
    });
    for (j, &t) in times.iter().enumerate().skip(1) {
        let c = nu + j - 1;
        let est = ls.coef[c];
        let se = vcov[(c, c)].max(T::zero()).sqrt();
        time_effects.push(TimeEffect {
            time: t,
            estimate: est,
            se,
            ci_low: est - z * se,
            ci_high: est + z * se,
        });
    }
    Ok(TwoWayFeFit {
        reference_time: first,
        unit_effects: units.iter().zip(&ls.coef).map(|(&u, &a)| (u, a)).collect(),
        time_effects,
        residual_variance: ssr / T::count((n - k) as u64),
        dropped_periods,
        n_obs: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn additive_model_is_recovered_exactly() {
        let a = [10.0f64, -3.0, 7.5];
        let b = [0.0f64, 2.0, -1.0, 4.0];
        let mut data = Vec::new();
        for (u, &au) in a.iter().enumerate() {
            for (t, &bt) in b.iter().enumerate() {
                data.push(TwfeObservation {
                    unit: u as u32,
                    time: t,
                    y: au + bt,
                });
            }
        }
        let fit = fit_two_way_fe(&data).unwrap();
        for (eff, &bt) in fit.time_effects.iter().zip(&b) {
            assert!((eff.estimate - (bt - b[0])).abs() < 1e-12);
        }
        assert!(fit.residual_variance.abs() < 1e-20);
    }

    #[test]
    fn constant_earnings_give_zero_effects() {
        let data: Vec<_> = (0..3u32)
            .flat_map(|u| (0..5).map(move |t| TwfeObservation { unit: u, time: t, y: 42.0f64 }))
            .collect();
        let fit = fit_two_way_fe(&data).unwrap();
        assert!(fit.time_effects.iter().all(|e| e.estimate.abs() < 1e-12));
    }

    #[test]
    fn gap_weeks_are_reported() {
        let data: Vec<_> = (0..3u32)
            .flat_map(|u| [0usize, 1, 3].into_iter().map(move |t| TwfeObservation { unit: u, time: t, y: (u as f64) + t as f64 }))
            .collect();
        let fit = fit_two_way_fe(&data).unwrap();
        assert_eq!(fit.dropped_periods, vec![2]);
        assert_eq!(fit.time_effects.len(), 3);
    }

    #[test]
    fn week_index_counts_from_window_start() {
        let w = StudyWindow::default_2023();
        let d = chrono::NaiveDate::from_ymd_opt(2023, 4, 8).unwrap();
        assert_eq!(week_of(&w, d), Some(1));
        assert_eq!(week_of(&w, chrono::NaiveDate::from_ymd_opt(2023, 3, 31).unwrap()), None);
    }
}
