//! Record generation.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use super::config::{DgpConfig, PrefectureSpec, WagePmf};
use super::truth::{true_cell_means, GroundTruth};
use crate::error::{Error, Result};
use crate::model::types::{ContractRecord, MinWageSchedule, Occupation, TimeSlot, YearMonth};
use crate::rng::substream;

#[derive(Debug, Clone)]
pub struct SimOutput {
    /// Sorted by prefecture, month, then posting index.
    pub records: Vec<ContractRecord>,
    pub schedule: MinWageSchedule,
    pub users: BTreeMap<YearMonth, u64>,
    pub truth: GroundTruth,
}

/// Draws postings for one prefecture.
#[derive(Debug, Clone)]
pub struct PostingSampler<'a> {
    cfg: &'a DgpConfig,
    pref: PrefectureSpec,
    pmf: WagePmf,
    occupations: WeightedIndex<f64>,
    slots: WeightedIndex<f64>,
    hours: WeightedIndex<f64>,
}

impl<'a> PostingSampler<'a> {
    pub fn new(cfg: &'a DgpConfig, pref: PrefectureSpec) -> Result<Self> {
        let bad = |what: &str| Error::Config(format!("invalid {what} weights"));
        Ok(Self {
            cfg,
            pref,
            pmf: WagePmf::new(&pref, &cfg.wage, cfg.upper_shift_for(pref.id)),
            occupations: WeightedIndex::new(cfg.occupation_weights).map_err(|_| bad("occupation"))?,
            slots: WeightedIndex::new(cfg.time_slot_weights).map_err(|_| bad("time slot"))?,
            hours: WeightedIndex::new(cfg.hours.iter().map(|h| h.1)).map_err(|_| bad("hours"))?,
        })
    }

    pub fn pmf(&self) -> &WagePmf {
        &self.pmf
    }

    /// One posting in month `t`.
    pub fn draw<R: Rng>(&self, rng: &mut R, t: usize, index: usize) -> ContractRecord {
        let cfg = self.cfg;
        let p = &self.pref;
        let month = cfg.window.month_at(t);
        let day = rng.random_range(1..=month.days());
        let occupation = Occupation::ALL[self.occupations.sample(rng)];
        let slot = TimeSlot::ALL[self.slots.sample(rng)];
        let start_time = slot.start_minute() + 30 * rng.random_range(0..12u16);
        let posted_hours = cfg.hours[self.hours.sample(rng)].0;
        let mut wage = self.pmf.sample(rng.random::<f64>());

        let mut destroyed = false;
        if t >= cfg.window.event_index && wage < p.new_mw {
            let m = cfg.missing_for_occupation(p.id, occupation);
            let x = cfg.excess_for(p.id);
            let u: f64 = rng.random();
            if u < m {
                destroyed = true;
            } else if u < m + x {
                wage = if rng.random::<f64>() < cfg.exact_mw_share {
                    p.new_mw
                } else {
                    p.new_mw + rng.random_range(0..cfg.rule.group_width as u32)
                };
            }
        }
        let matched = !destroyed && rng.random::<f64>() < cfg.match_prob;

        let r = &cfg.reimbursement;
        let u: f64 = rng.random();
        let transport_reimbursement = if u < r.zero_prob {
            0
        } else if u < r.zero_prob + r.point_mass_500_prob {
            500
        } else {
            r.grid_step * rng.random_range(0..=r.grid_max / r.grid_step)
        };

        ContractRecord {
            record_id: format!("p{:02}-t{:02}-{:06}", p.id, t, index),
            prefecture_id: p.id,
            date: NaiveDate::from_ymd_opt(month.year, month.month, day).expect("day within month"),
            hourly_wage: wage,
            posted_hours,
            transport_reimbursement,
            occupation,
            start_time,
            matched,
        }
    }

    /// All postings of month `t`, from the `(seed, prefecture, t)` substream.
    pub fn month(&self, t: usize) -> Vec<ContractRecord> {
        let cfg = self.cfg;
        let mut rng = substream(cfg.seed, self.pref.id as u64, t as u64);
        let lambda = self.pref.postings_per_month * (1.0 + cfg.posting_growth).powi(t as i32 - 1);
        let n = if lambda > 0.0 {
            Poisson::new(lambda).expect("positive mean").sample(&mut rng) as usize
        } else {
            0
        };
        (0..n).map(|i| self.draw(&mut rng, t, i)).collect()
    }
}

/// Generate records, schedule, user counts and the closed-form truth.
///
/// Prefecture-months are generated in parallel from independent substreams
/// and concatenated in canonical order, so the output does not depend on the
/// thread count.
pub fn generate(cfg: &DgpConfig) -> Result<SimOutput> {
    cfg.validate()?;
    let mut prefs = cfg.prefectures.clone();
    prefs.sort_by_key(|p| p.id);
    let samplers = prefs
        .iter()
        .map(|&p| PostingSampler::new(cfg, p))
        .collect::<Result<Vec<_>>>()?;
    let months = cfg.window.months;
    let jobs: Vec<(usize, usize)> = (0..samplers.len())
        .flat_map(|s| (1..=months).map(move |t| (s, t)))
        .collect();
    let chunks: Vec<Vec<ContractRecord>> = jobs.par_iter().map(|&(s, t)| samplers[s].month(t)).collect();

    let mut per_month = vec![0u64; months + 1];
    for (&(_, t), c) in jobs.iter().zip(&chunks) {
        per_month[t] += c.len() as u64;
    }
    let users = (1..=months)
        .map(|t| {
            (
                cfg.window.month_at(t),
                (per_month[t] as f64 * cfg.users_per_posting).round() as u64,
            )
        })
        .collect();
    let records = chunks.into_iter().flatten().collect();
    Ok(SimOutput {
        records,
        schedule: cfg.schedule()?,
        users,
        truth: true_cell_means(cfg)?,
    })
}
