//! Platform-level tightness and finding rates.

use std::collections::BTreeMap;

use super::panel::PrefectureMonthTotals;
use super::types::StudyWindow;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroSeries {
    pub t: usize,
    pub users: u64,
    pub vacancies: u64,
    pub hires: u64,
    /// V/U
    pub tightness: Option<f64>,
    /// H/U
    pub job_finding: Option<f64>,
    /// H/V
    pub worker_finding: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Monthly V, H from the totals and U from `users`; rates with a zero
/// denominator are absent.
pub fn macro_metrics(
    totals: &[PrefectureMonthTotals],
    users: &BTreeMap<usize, u64>,
    window: &StudyWindow,
) -> Result<Vec<MacroSeries>> {
    let mut vh: BTreeMap<usize, (u64, u64)> = BTreeMap::new();
    for x in totals {
        let e = vh.entry(x.t).or_default();
        e.0 += x.postings;
        e.1 += x.matches;
    }
    (1..=window.months)
        .map(|t| {
            let u = *users
                .get(&t)
                .ok_or_else(|| Error::Config(format!("no user count for {}", window.month_at(t))))?;
            let (v, h) = vh.get(&t).copied().unwrap_or((0, 0));
            Ok(MacroSeries {
                t,
                users: u,
                vacancies: v,
                hires: h,
                tightness: ratio(v, u),
                job_finding: ratio(h, u),
                worker_finding: ratio(h, v),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn totals(v: u64, h: u64) -> Vec<PrefectureMonthTotals> {
        vec![PrefectureMonthTotals {
            prefecture_id: 1,
            t: 1,
            postings: v,
            matches: h,
            earnings_sum: 0.0,
        }]
    }

    fn window() -> StudyWindow {
        StudyWindow::new(StudyWindow::default_2023().start, 3, 2).unwrap()
    }

    #[test]
    fn rates() {
        let users = BTreeMap::from([(1, 100), (2, 0), (3, 10)]);
        let m = macro_metrics(&totals(80, 64), &users, &window()).unwrap();
        assert_eq!(m[0].tightness, Some(0.8));
        assert_eq!(m[0].job_finding, Some(0.64));
        assert_eq!(m[0].worker_finding, Some(0.8));
        assert_eq!(m[1].tightness, None);
        assert_eq!(m[2].worker_finding, None);
        assert_eq!(m[2].tightness, Some(0.0));
    }

    #[test]
    fn all_filled_means_unit_worker_finding() {
        let users = BTreeMap::from([(1, 50), (2, 1), (3, 1)]);
        let m = macro_metrics(&totals(40, 40), &users, &window()).unwrap();
        assert_eq!(m[0].worker_finding, Some(1.0));
    }

    #[test]
    fn missing_users_month_is_an_error() {
        let users = BTreeMap::from([(1, 50)]);
        assert!(macro_metrics(&totals(40, 40), &users, &window()).is_err());
    }
}
