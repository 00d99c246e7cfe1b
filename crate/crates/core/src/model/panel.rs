//! Aggregation of contract records into the (prefecture, wage-bin, month)
//! panel and the (prefecture, month) normalisers.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::binning::{BinningRule, ExposureGroup};
use super::types::{ContractRecord, MinWageSchedule, StudyWindow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BinKey {
    pub prefecture_id: u32,
    pub bin_lower: i32,
    pub group: ExposureGroup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PanelCell {
    pub key: BinKey,
    pub t: usize,
    /// Matched postings (Y).
    pub employment: u64,
    /// All postings.
    pub vacancies: u64,
    /// Reimbursement summed over matched postings, JPY.
    pub reimbursement_sum: u64,
    /// Matched postings with a positive reimbursement.
    pub reimbursement_positive: u64,
    /// Hourly wages summed over matched postings, JPY.
    pub wage_sum: u64,
}

impl PanelCell {
    fn empty(key: BinKey, t: usize) -> Self {
        Self {
            key,
            t,
            employment: 0,
            vacancies: 0,
            reimbursement_sum: 0,
            reimbursement_positive: 0,
            wage_sum: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrefectureMonthTotals {
    pub prefecture_id: u32,
    pub t: usize,
    /// All postings (N).
    pub postings: u64,
    pub matches: u64,
    /// Σ wage × hours over matched postings.
    pub earnings_sum: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PanelStats {
    pub records_used: usize,
    pub skipped_out_of_window: usize,
    /// Records above the wage sanity ceiling (kept, only flagged).
    pub above_ceiling: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PanelOptions {
    pub wage_ceiling: u32,
}

impl Default for PanelOptions {
    fn default() -> Self {
        Self { wage_ceiling: 5000 }
    }
}

/// Zero-filled wage-bin panel.
///
/// Every prefecture with in-window records gets a cell for each month and
/// each bin of its finite-band grid plus every bin observed in any month.
#[derive(Debug, Clone)]
pub struct Panel {
    pub rule: BinningRule,
    pub window: StudyWindow,
    /// Sorted by `(prefecture, bin, t)`.
    pub cells: Vec<PanelCell>,
    /// Sorted by `(prefecture, t)`.
    pub totals: Vec<PrefectureMonthTotals>,
    /// New minimum wage of every prefecture in the panel.
    pub new_mw: BTreeMap<u32, u32>,
    pub stats: PanelStats,
}

impl Panel {
    pub fn totals_for(&self, prefecture_id: u32, t: usize) -> Option<&PrefectureMonthTotals> {
        self.totals
            .binary_search_by(|x| (x.prefecture_id, x.t).cmp(&(prefecture_id, t)))
            .ok()
            .map(|i| &self.totals[i])
    }

    pub fn prefectures(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = self.totals.iter().map(|x| x.prefecture_id).collect();
        set.into_iter().collect()
    }
}

#[derive(Default)]
struct MonthAcc {
    bins: BTreeMap<i32, PanelCell>,
    postings: u64,
    matches: u64,
    earnings: f64,
}

pub fn build_panel(
    records: &[ContractRecord],
    schedule: &MinWageSchedule,
    window: &StudyWindow,
    rule: &BinningRule,
    opts: &PanelOptions,
) -> Result<Panel> {
    rule.validate()?;
    schedule.check_window(window)?;

    let mut stats = PanelStats::default();
    let mut buckets: BTreeMap<(u32, usize), Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        r.validate().map_err(|e| Error::Schema {
            row: i + 1,
            column: None,
            message: e.to_string(),
        })?;
        let Some(t) = window.index_of(r.date) else {
            stats.skipped_out_of_window += 1;
            continue;
        };
        if schedule.get(r.prefecture_id).is_none() {
            return Err(Error::schema(
                i + 1,
                "prefecture_id",
                format!("prefecture {} has no minimum wage entry", r.prefecture_id),
            ));
        }
        if r.hourly_wage > opts.wage_ceiling {
            stats.above_ceiling += 1;
        }
        stats.records_used += 1;
        buckets.entry((r.prefecture_id, t)).or_default().push(i);
    }

    // Each (prefecture, month) is reduced on its own in record order, so the
    // floating point earnings sums do not depend on the thread count.
    let reduced: Vec<((u32, usize), MonthAcc)> = buckets
        .into_par_iter()
        .map(|((p, t), idx)| {
            let mw = schedule.get(p).expect("checked above").new_mw;
            let mut acc = MonthAcc::default();
            for i in idx {
                let r = &records[i];
                let (bin, group) = rule.classify(r.hourly_wage, mw)?;
                let key = BinKey {
                    prefecture_id: p,
                    bin_lower: bin,
                    group,
                };
                let cell = acc.bins.entry(bin).or_insert_with(|| PanelCell::empty(key, t));
                cell.vacancies += 1;
                acc.postings += 1;
                if r.matched {
                    cell.employment += 1;
                    cell.wage_sum += r.hourly_wage as u64;
                    cell.reimbursement_sum += r.transport_reimbursement as u64;
                    if r.transport_reimbursement > 0 {
                        cell.reimbursement_positive += 1;
                    }
                    acc.matches += 1;
                    acc.earnings += r.earnings();
                }
            }
            Ok(((p, t), acc))
        })
        .collect::<Result<_>>()?;

    let mut by_pref: BTreeMap<u32, BTreeMap<usize, MonthAcc>> = BTreeMap::new();
    for ((p, t), acc) in reduced {
        by_pref.entry(p).or_default().insert(t, acc);
    }

    let mut cells = Vec::new();
    let mut totals = Vec::new();
    for (p, months) in &by_pref {
        let mw = schedule.get(*p).expect("checked above").new_mw;
        let mut support: BTreeSet<i32> = rule.finite_grid(mw).collect();
        for acc in months.values() {
            support.extend(acc.bins.keys().copied());
        }
        for &bin in &support {
            let key = BinKey {
                prefecture_id: *p,
                bin_lower: bin,
                group: rule.assign_group(bin, mw)?,
            };
            for t in 1..=window.months {
                let cell = months
                    .get(&t)
                    .and_then(|acc| acc.bins.get(&bin))
                    .copied()
                    .unwrap_or_else(|| PanelCell::empty(key, t));
                cells.push(cell);
            }
        }
        for t in 1..=window.months {
            let (postings, matches, earnings_sum) = months
                .get(&t)
                .map_or((0, 0, 0.0), |a| (a.postings, a.matches, a.earnings));
            totals.push(PrefectureMonthTotals {
                prefecture_id: *p,
                t,
                postings,
                matches,
                earnings_sum,
            });
        }
    }

    Ok(Panel {
        rule: *rule,
        window: *window,
        cells,
        totals,
        new_mw: by_pref
            .keys()
            .map(|p| (*p, schedule.get(*p).expect("checked above").new_mw))
            .collect(),
        stats,
    })
}
