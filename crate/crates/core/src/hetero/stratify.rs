//! Separate event studies per prefecture, occupation or time slot.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::decomp::{aggregate, DecompScope, DecompositionResult};
use crate::error::{Error, Result};
use crate::estimator::{fit_event_study, EventStudyFit, EventStudySpec};
use crate::model::{
    build_panel, outcome_series, BinningRule, ContractRecord, ExposureGroup, MinWageSchedule, Occupation,
    OutcomeKind, OutcomeOptions, PanelOptions, StudyWindow, TimeSlot,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Prefecture,
    Occupation,
    TimeSlot,
}

impl Dimension {
    pub fn label(self) -> &'static str {
        match self {
            Dimension::Prefecture => "prefecture",
            Dimension::Occupation => "occupation",
            Dimension::TimeSlot => "timeslot",
        }
    }

    pub fn stratum_of(self, r: &ContractRecord) -> StratumId {
        match self {
            Dimension::Prefecture => StratumId::Prefecture(r.prefecture_id),
            Dimension::Occupation => StratumId::Occupation(r.occupation),
            Dimension::TimeSlot => StratumId::TimeSlot(r.time_slot()),
        }
    }
}

impl FromStr for Dimension {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "prefecture" => Ok(Self::Prefecture),
            "occupation" => Ok(Self::Occupation),
            "timeslot" | "time_slot" => Ok(Self::TimeSlot),
            _ => Err(Error::Config(format!("unknown stratification dimension `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StratumId {
    Prefecture(u32),
    Occupation(Occupation),
    TimeSlot(TimeSlot),
}

impl fmt::Display for StratumId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StratumId::Prefecture(p) => write!(f, "{p}"),
            StratumId::Occupation(o) => f.write_str(o.label()),
            StratumId::TimeSlot(s) => f.write_str(s.label()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HeteroOptions {
    pub rule: BinningRule,
    pub spec: EventStudySpec,
    pub outcome: OutcomeKind,
    pub outcome_opts: OutcomeOptions,
    pub panel_opts: PanelOptions,
    /// Minimum records in every (group, month) cell of a stratum.
    pub min_cell_records: u64,
}

impl HeteroOptions {
    pub fn new(window: StudyWindow, rule: BinningRule) -> Self {
        Self {
            rule,
            spec: EventStudySpec::new(window, &rule),
            outcome: OutcomeKind::EmploymentShare,
            outcome_opts: OutcomeOptions::default(),
            panel_opts: PanelOptions::default(),
            min_cell_records: 30,
        }
    }

    fn scope(&self) -> DecompScope {
        if self.outcome.is_amenity() {
            DecompScope::Amenity
        } else {
            DecompScope::Employment
        }
    }
}

#[derive(Debug, Clone)]
pub struct StratumResult<T> {
    pub id: StratumId,
    /// In-window records of the stratum.
    pub n_records: usize,
    pub fit: EventStudyFit<T>,
    pub decomposition: DecompositionResult<T>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedStratum {
    pub id: StratumId,
    pub n_records: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct StratifiedRun<T> {
    pub dimension: Dimension,
    /// Sorted by stratum id.
    pub results: Vec<StratumResult<T>>,
    pub skipped: Vec<SkippedStratum>,
}

impl<T: Scalar> StratifiedRun<T> {
    pub fn get(&self, id: StratumId) -> Option<&StratumResult<T>> {
        self.results.iter().find(|r| r.id == id)
    }

    /// Record-weighted mean of the stratum Δe estimates.
    pub fn weighted_delta_e(&self) -> Option<T> {
        let n: usize = self.results.iter().map(|r| r.n_records).sum();
        (n > 0).then(|| {
            self.results
                .iter()
                .map(|r| r.decomposition.delta_e.estimate * T::count(r.n_records as u64))
                .sum::<T>()
                / T::count(n as u64)
        })
    }
}

enum Outcome<T> {
    Done(StratumResult<T>),
    Skipped(SkippedStratum),
}

/// Split the records along `dimension` and run the full pipeline on each part.
///
/// Strata with a thin (group, month) cell, or whose design turns out to be
/// degenerate, are listed in `skipped` rather than failing the whole run.
pub fn run_stratified<T: Scalar>(
    records: &[ContractRecord],
    schedule: &MinWageSchedule,
    window: &StudyWindow,
    dimension: Dimension,
    opts: &HeteroOptions,
) -> Result<StratifiedRun<T>> {
    let mut parts: BTreeMap<StratumId, Vec<ContractRecord>> = BTreeMap::new();
    for r in records {
        parts.entry(dimension.stratum_of(r)).or_default().push(r.clone());
    }
    let parts: Vec<_> = parts.into_iter().collect();
    let outcomes = parts
        .par_iter()
        .map(|(id, recs)| run_one(*id, recs, schedule, window, opts))
        .collect::<Result<Vec<_>>>()?;

    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Done(r) => results.push(r),
            Outcome::Skipped(s) => skipped.push(s),
        }
    }
    Ok(StratifiedRun {
        dimension,
        results,
        skipped,
    })
}

fn run_one<T: Scalar>(
    id: StratumId,
    records: &[ContractRecord],
    schedule: &MinWageSchedule,
    window: &StudyWindow,
    opts: &HeteroOptions,
) -> Result<Outcome<T>> {
    let panel = build_panel(records, schedule, window, &opts.rule, &opts.panel_opts)?;
    let n_records = panel.stats.records_used;
    let skip = |reason: String| {
        Ok(Outcome::Skipped(SkippedStratum {
            id,
            n_records,
            reason,
        }))
    };

    let mut counts: BTreeMap<(ExposureGroup, usize), u64> = BTreeMap::new();
    for c in &panel.cells {
        if c.key.group != ExposureGroup::Excluded {
            *counts.entry((c.key.group, c.t)).or_default() += c.vacancies;
        }
    }
    let required = opts
        .spec
        .groups
        .iter()
        .map(|&e| ExposureGroup::Finite(e))
        .chain([ExposureGroup::Infinite]);
    for g in required {
        for t in 1..=window.months {
            let n = counts.get(&(g, t)).copied().unwrap_or(0);
            if n < opts.min_cell_records {
                return skip(format!(
                    "cell e={g}, t={t} has {n} records, below the minimum of {}",
                    opts.min_cell_records
                ));
            }
        }
    }

    let series = outcome_series::<T>(&panel, opts.outcome, &opts.outcome_opts)?;
    let fit = match fit_event_study(&series.observations, &opts.spec) {
        Ok(f) => f,
        Err(Error::Estimation(msg)) => return skip(msg),
        Err(e) => return Err(e),
    };
    let decomposition = aggregate(&fit, opts.scope())?;
    Ok(Outcome::Done(StratumResult {
        id,
        n_records,
        fit,
        decomposition,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::{generate, DgpConfig};
    use crate::estimator::fit_event_study;

    fn sim(n_pref: usize, total: f64) -> (DgpConfig, crate::dgp::SimOutput) {
        let mut c = DgpConfig::default();
        c.prefectures.truncate(n_pref);
        c.set_total_postings(total);
        let out = generate(&c).unwrap();
        (c, out)
    }

    #[test]
    fn single_prefecture_matches_pooled_fit() {
        let (c, out) = sim(1, 30_000.0);
        let opts = HeteroOptions::new(c.window, c.rule);
        let run = run_stratified::<f64>(&out.records, &out.schedule, &c.window, Dimension::Prefecture, &opts).unwrap();
        assert_eq!(run.results.len(), 1);

        let panel = build_panel(&out.records, &out.schedule, &c.window, &c.rule, &PanelOptions::default()).unwrap();
        let s = outcome_series::<f64>(&panel, OutcomeKind::EmploymentShare, &OutcomeOptions::default()).unwrap();
        let pooled = fit_event_study(&s.observations, &opts.spec).unwrap();
        assert_eq!(run.results[0].fit.coef, pooled.coef);
        assert_eq!(run.results[0].fit.vcov, pooled.vcov);
    }

    #[test]
    fn strata_partition_the_records() {
        let (c, out) = sim(2, 40_000.0);
        let opts = HeteroOptions::new(c.window, c.rule);
        let run = run_stratified::<f64>(&out.records, &out.schedule, &c.window, Dimension::TimeSlot, &opts).unwrap();
        let used: usize = run.results.iter().map(|r| r.n_records).sum::<usize>()
            + run.skipped.iter().map(|s| s.n_records).sum::<usize>();
        assert_eq!(used, out.records.len());
        let ids: Vec<_> = run.results.iter().map(|r| r.id).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
    }

    #[test]
    fn thin_strata_are_skipped_with_reason() {
        let (c, out) = sim(2, 20_000.0);
        let opts = HeteroOptions::new(c.window, c.rule);
        let run = run_stratified::<f64>(&out.records, &out.schedule, &c.window, Dimension::Occupation, &opts).unwrap();
        let pro = run
            .skipped
            .iter()
            .find(|s| s.id == StratumId::Occupation(Occupation::Professional))
            .expect("3% occupation is thin at this size");
        assert!(pro.reason.contains("below the minimum"));
    }

    #[test]
    fn dimension_parses() {
        assert_eq!("timeslot".parse::<Dimension>().unwrap(), Dimension::TimeSlot);
        assert!("industry".parse::<Dimension>().is_err());
    }
}
