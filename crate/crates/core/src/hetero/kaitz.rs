//! Minimum-to-median wage ratio per prefecture.

use std::collections::BTreeMap;

use crate::model::{ContractRecord, MinWageSchedule, StudyWindow};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KaitzTable {
    /// `(median wage, new_mw / median)` per prefecture.
    pub values: BTreeMap<u32, (u32, f64)>,
    /// Prefectures in the schedule without matched contracts in the month.
    pub missing: Vec<(u32, String)>,
}

impl KaitzTable {
    pub fn kaitz(&self, prefecture_id: u32) -> Option<f64> {
        self.values.get(&prefecture_id).map(|v| v.1)
    }
}

/// Lower-middle element for even counts, so the result is always an
/// observed wage and independent of input order.
pub fn lower_median(values: &mut [u32]) -> Option<u32> {
    if values.is_empty() {
        return None;
    }
    let k = (values.len() - 1) / 2;
    let (_, m, _) = values.select_nth_unstable(k);
    Some(*m)
}

/// Kaitz index in window month `t` from matched contracts' hourly wages.
pub fn kaitz_index(records: &[ContractRecord], schedule: &MinWageSchedule, window: &StudyWindow, t: usize) -> KaitzTable {
    let mut wages: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for r in records {
        if r.matched && window.index_of(r.date) == Some(t) {
            wages.entry(r.prefecture_id).or_default().push(r.hourly_wage);
        }
    }
    let mut out = KaitzTable::default();
    for entry in schedule.iter() {
        let p = entry.prefecture_id;
        match wages.get_mut(&p).and_then(|w| lower_median(w)) {
            Some(m) => {
                out.values.insert(p, (m, entry.new_mw as f64 / m as f64));
            }
            None => out.missing.push((p, format!("no matched contracts in month t={t}"))),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MinWageEntry, Occupation, YearMonth};
    use chrono::NaiveDate;

    fn rec(wage: u32, matched: bool) -> ContractRecord {
        ContractRecord {
            record_id: format!("r{wage}"),
            prefecture_id: 13,
            date: NaiveDate::from_ymd_opt(2023, 10, 3).unwrap(),
            hourly_wage: wage,
            posted_hours: 4.0,
            transport_reimbursement: 0,
            occupation: Occupation::Retail,
            start_time: 600,
            matched,
        }
    }

    fn schedule() -> MinWageSchedule {
        MinWageSchedule::new([
            MinWageEntry {
                prefecture_id: 13,
                old_mw: 1072,
                new_mw: 1113,
                event_month: YearMonth::new(2023, 10).unwrap(),
            },
            MinWageEntry {
                prefecture_id: 14,
                old_mw: 1071,
                new_mw: 1112,
                event_month: YearMonth::new(2023, 10).unwrap(),
            },
        ])
        .unwrap()
    }

    #[test]
    fn three_wages() {
        let w = StudyWindow::default_2023();
        let recs = vec![rec(1500, true), rec(1113, true), rec(1200, true), rec(900, false)];
        let k = kaitz_index(&recs, &schedule(), &w, 7);
        assert_eq!(k.values[&13].0, 1200);
        assert!((k.kaitz(13).unwrap() - 0.9275).abs() < 1e-12);
        assert_eq!(k.missing.len(), 1);
        assert_eq!(k.missing[0].0, 14);
    }

    #[test]
    fn even_count_takes_lower_middle() {
        assert_eq!(lower_median(&mut [4, 1, 3, 2]), Some(2));
        assert_eq!(lower_median(&mut []), None);
    }

    #[test]
    fn all_at_minimum_gives_one() {
        let w = StudyWindow::default_2023();
        let recs = vec![rec(1113, true); 5];
        assert_eq!(kaitz_index(&recs, &schedule(), &w, 7).kaitz(13), Some(1.0));
    }
}
