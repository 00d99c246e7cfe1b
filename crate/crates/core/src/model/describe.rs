//! Descriptive employment distributions and before/after change grids.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use super::types::{ContractRecord, StudyWindow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Wage,
    Hours,
    Reimbursement,
}

impl Axis {
    pub fn label(self) -> &'static str {
        match self {
            Axis::Wage => "wage",
            Axis::Hours => "hours",
            Axis::Reimbursement => "reimbursement",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "wage" => Ok(Axis::Wage),
            "hours" => Ok(Axis::Hours),
            "reimbursement" => Ok(Axis::Reimbursement),
            _ => Err(Error::Config(format!("unknown axis `{s}`"))),
        }
    }
}

/// Bin widths of the descriptive tables. Wage bins sit on multiples of the
/// width so that pooled tables line up across prefectures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescribeBins {
    pub wage: f64,
    pub hours: f64,
    pub reimbursement: f64,
}

impl Default for DescribeBins {
    fn default() -> Self {
        Self {
            wage: 10.0,
            hours: 1.0,
            reimbursement: 100.0,
        }
    }
}

impl DescribeBins {
    fn value(axis: Axis, r: &ContractRecord) -> f64 {
        match axis {
            Axis::Wage => r.hourly_wage as f64,
            Axis::Hours => r.posted_hours,
            Axis::Reimbursement => r.transport_reimbursement as f64,
        }
    }

    fn width(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Wage => self.wage,
            Axis::Hours => self.hours,
            Axis::Reimbursement => self.reimbursement,
        }
    }

    /// Lower bin edge as an integer multiple of the width.
    fn slot(&self, axis: Axis, r: &ContractRecord) -> i64 {
        (Self::value(axis, r) / self.width(axis)).floor() as i64
    }

    fn edge(&self, axis: Axis, slot: i64) -> f64 {
        slot as f64 * self.width(axis)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistRow {
    pub axis: Axis,
    pub bin: f64,
    pub t: usize,
    pub employment: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChangeRow {
    pub wage_bin: f64,
    pub other_bin: f64,
    pub count_a: u64,
    pub count_b: u64,
    /// `count_b − count_a`.
    pub diff: i64,
}

fn matched_in_window<'a>(
    records: &'a [ContractRecord],
    window: &'a StudyWindow,
    prefecture: Option<u32>,
) -> impl Iterator<Item = (usize, &'a ContractRecord)> + 'a {
    records.iter().filter_map(move |r| {
        if !r.matched || prefecture.is_some_and(|p| p != r.prefecture_id) {
            return None;
        }
        window.index_of(r.date).map(|t| (t, r))
    })
}

/// Employment counts per bin and month, zero filled over the observed support.
pub fn distribution_table(
    records: &[ContractRecord],
    window: &StudyWindow,
    axis: Axis,
    bins: &DescribeBins,
    prefecture: Option<u32>,
) -> Vec<DistRow> {
    let mut counts: BTreeMap<(i64, usize), u64> = BTreeMap::new();
    let mut support = BTreeSet::new();
    for (t, r) in matched_in_window(records, window, prefecture) {
        let s = bins.slot(axis, r);
        support.insert(s);
        *counts.entry((s, t)).or_default() += 1;
    }
    let mut rows = Vec::with_capacity(support.len() * window.months);
    for &s in &support {
        for t in 1..=window.months {
            rows.push(DistRow {
                axis,
                bin: bins.edge(axis, s),
                t,
                employment: counts.get(&(s, t)).copied().unwrap_or(0),
            });
        }
    }
    rows
}

/// Wage × `other` grid of employment changes from month `t_a` to `t_b`.
pub fn change_grid(
    records: &[ContractRecord],
    window: &StudyWindow,
    other: Axis,
    t_a: usize,
    t_b: usize,
    bins: &DescribeBins,
    prefecture: Option<u32>,
) -> Result<Vec<ChangeRow>> {
    for t in [t_a, t_b] {
        if !(1..=window.months).contains(&t) {
            return Err(Error::Config(format!("month {t} is outside the study window")));
        }
    }
    if other == Axis::Wage {
        return Err(Error::Config("change grid needs a non-wage second axis".into()));
    }
    let mut counts: BTreeMap<(i64, i64), (u64, u64)> = BTreeMap::new();
    for (t, r) in matched_in_window(records, window, prefecture) {
        let key = (bins.slot(Axis::Wage, r), bins.slot(other, r));
        let c = counts.entry(key).or_default();
        if t == t_a {
            c.0 += 1;
        }
        if t == t_b {
            c.1 += 1;
        }
    }
    Ok(counts
        .into_iter()
        .filter(|(_, (a, b))| a + b > 0)
        .map(|((w, o), (a, b))| ChangeRow {
            wage_bin: bins.edge(Axis::Wage, w),
            other_bin: bins.edge(other, o),
            count_a: a,
            count_b: b,
            diff: b as i64 - a as i64,
        })
        .collect())
}
