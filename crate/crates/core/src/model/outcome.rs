//! Left-hand-side series built from the panel.

use std::fmt;
use std::str::FromStr;

use super::binning::ExposureGroup;
use super::panel::Panel;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OutcomeKind {
    EmploymentShare,
    VacancyShare,
    /// Reimbursement JPY over matched postings, zero when no allowance.
    ReimbAmount,
    /// Matched postings offering any reimbursement.
    ReimbProvision,
}

impl OutcomeKind {
    pub const ALL: [OutcomeKind; 4] = [
        OutcomeKind::EmploymentShare,
        OutcomeKind::VacancyShare,
        OutcomeKind::ReimbAmount,
        OutcomeKind::ReimbProvision,
    ];

    pub fn label(self) -> &'static str {
        match self {
            OutcomeKind::EmploymentShare => "employment_share",
            OutcomeKind::VacancyShare => "vacancy_share",
            OutcomeKind::ReimbAmount => "reimb_amount",
            OutcomeKind::ReimbProvision => "reimb_provision",
        }
    }

    pub fn is_amenity(self) -> bool {
        matches!(self, OutcomeKind::ReimbAmount | OutcomeKind::ReimbProvision)
    }
}

impl fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for OutcomeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        OutcomeKind::ALL
            .into_iter()
            .find(|k| k.label() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown outcome `{s}`")))
    }
}

/// Denominator of the amenity outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmenityDenominator {
    /// Prefecture-month postings N, as for employment.
    #[default]
    Postings,
    /// Matched postings of the same cell (per-match average).
    CellMatches,
}

impl FromStr for AmenityDenominator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "postings" => Ok(Self::Postings),
            "cell_matches" => Ok(Self::CellMatches),
            _ => Err(Error::Config(format!("unknown amenity denominator `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    #[default]
    Unweighted,
    /// Weight each observation by the cell's employment count.
    Employment,
}

impl FromStr for Weighting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "unweighted" => Ok(Self::Unweighted),
            "employment" => Ok(Self::Employment),
            _ => Err(Error::Config(format!("unknown weighting `{s}`"))),
        }
    }
}

/// What an observation's cluster id encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClusterLevel {
    /// The prefecture's 10-JPY wage bin, i.e. the panel unit.
    #[default]
    WageBin,
    /// Bin offset from the new minimum wage, pooled over prefectures.
    RelativeBin,
    Prefecture,
}

impl FromStr for ClusterLevel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "wage_bin" => Ok(Self::WageBin),
            "relative_bin" => Ok(Self::RelativeBin),
            "prefecture" => Ok(Self::Prefecture),
            _ => Err(Error::Config(format!("unknown cluster level `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OutcomeOptions {
    pub amenity_denominator: AmenityDenominator,
    pub weighting: Weighting,
    pub cluster: ClusterLevel,
    /// Use the raw count (or sum) instead of dividing by a denominator.
    pub raw: bool,
}

/// One (wage bin, month) regression observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation<T> {
    pub prefecture_id: u32,
    pub bin_lower: i32,
    pub group: ExposureGroup,
    pub t: usize,
    pub y: T,
    pub weight: T,
    pub cluster: u64,
}

#[derive(Debug, Clone)]
pub struct OutcomeSeries<T> {
    pub kind: OutcomeKind,
    pub observations: Vec<Observation<T>>,
    /// Cells dropped because their denominator was zero.
    pub dropped_zero_denominator: usize,
    /// Cells in the excluded band.
    pub excluded: usize,
}

pub fn cluster_id(level: ClusterLevel, prefecture_id: u32, bin_lower: i32, new_mw: u32, bin_width: i32) -> u64 {
    match level {
        ClusterLevel::WageBin => ((prefecture_id as u64) << 32) | (bin_lower as u32 as u64),
        ClusterLevel::RelativeBin => ((bin_lower - new_mw as i32).div_euclid(bin_width)) as i64 as u64,
        ClusterLevel::Prefecture => prefecture_id as u64,
    }
}

pub fn outcome_series<T: Scalar>(
    panel: &Panel,
    kind: OutcomeKind,
    opts: &OutcomeOptions,
) -> Result<OutcomeSeries<T>> {
    let mut observations = Vec::with_capacity(panel.cells.len());
    let mut dropped = 0;
    let mut excluded = 0;
    for cell in &panel.cells {
        if cell.key.group == ExposureGroup::Excluded {
            excluded += 1;
            continue;
        }
        let p = cell.key.prefecture_id;
        let totals = panel.totals_for(p, cell.t).ok_or_else(|| {
            Error::Internal(format!("no totals for prefecture {p} month {}", cell.t))
        })?;
        let per_match = kind.is_amenity() && opts.amenity_denominator == AmenityDenominator::CellMatches;
        let denom = if per_match { cell.employment } else { totals.postings };
        if denom == 0 {
            dropped += 1;
            continue;
        }
        let denom = if opts.raw { 1 } else { denom };
        let numer = match kind {
            OutcomeKind::EmploymentShare => cell.employment,
            OutcomeKind::VacancyShare => cell.vacancies,
            OutcomeKind::ReimbAmount => cell.reimbursement_sum,
            OutcomeKind::ReimbProvision => cell.reimbursement_positive,
        };
        let weight = match opts.weighting {
            Weighting::Unweighted => T::one(),
            Weighting::Employment => T::count(cell.employment),
        };
        let mw = panel.new_mw[&p];
        observations.push(Observation {
            prefecture_id: p,
            bin_lower: cell.key.bin_lower,
            group: cell.key.group,
            t: cell.t,
            y: T::count(numer) / T::count(denom),
            weight,
            cluster: cluster_id(opts.cluster, p, cell.key.bin_lower, mw, panel.rule.bin_width),
        });
    }
    Ok(OutcomeSeries {
        kind,
        observations,
        dropped_zero_denominator: dropped,
        excluded,
    })
}
