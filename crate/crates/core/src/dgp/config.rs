//! Generator configuration.

use std::collections::BTreeMap;

use statrs::distribution::{ContinuousCDF, Normal};

use super::prefectures::JAPAN_2023;
use crate::error::{Error, Result};
use crate::model::binning::BinningRule;
use crate::model::types::{MinWageEntry, MinWageSchedule, Occupation, StudyWindow};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrefectureSpec {
    pub id: u32,
    pub old_mw: u32,
    pub new_mw: u32,
    /// Poisson mean of postings per month (λ_p).
    pub postings_per_month: f64,
}

/// Baseline wage distribution of one prefecture.
///
/// A point mass at the old minimum, a uniform band on `[old_mw, new_mw − 1]`
/// and the remaining probability on an integer log-normal truncated to
/// `[new_mw, wage_cap]` with log-location `ln(new_mw) + upper_shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WageMixture {
    pub mass_at_mw: f64,
    pub below_mw_mass: f64,
    pub upper_shift: f64,
    pub upper_scale: f64,
    pub wage_cap: u32,
}

impl WageMixture {
    /// Share of postings paid below the new minimum wage before the event.
    pub fn below_share(&self) -> f64 {
        self.mass_at_mw + self.below_mw_mass
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReimbursementSpec {
    pub zero_prob: f64,
    pub point_mass_500_prob: f64,
    /// The rest is uniform on `{0, step, …, max}`.
    pub grid_step: u32,
    pub grid_max: u32,
}

/// Per-prefecture overrides; `None` keeps the global value.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PrefectureOverride {
    pub missing_frac: Option<f64>,
    pub excess_frac: Option<f64>,
    pub upper_shift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgpConfig {
    pub seed: u64,
    pub prefectures: Vec<PrefectureSpec>,
    pub window: StudyWindow,
    pub rule: BinningRule,
    pub wage: WageMixture,
    /// m: post-event probability that a below-minimum posting goes unfilled.
    pub missing_frac: f64,
    /// x: post-event probability that it is re-posted at or above the minimum.
    pub excess_frac: f64,
    /// Share of re-posted jobs placed exactly at the new minimum; the rest
    /// are uniform on `[new_mw, new_mw + group_width − 1]`.
    pub exact_mw_share: f64,
    pub match_prob: f64,
    pub reimbursement: ReimbursementSpec,
    /// `(hours, weight)`.
    pub hours: Vec<(f64, f64)>,
    pub occupation_weights: [f64; 9],
    /// Morning, afternoon, evening, late night.
    pub time_slot_weights: [f64; 4],
    /// Registered users per posting, for the macro series.
    pub users_per_posting: f64,
    /// Monthly growth rate of λ_p.
    pub posting_growth: f64,
    pub overrides: BTreeMap<u32, PrefectureOverride>,
    /// Occupation-specific m replacing `missing_frac`.
    pub occupation_missing: Option<[f64; 9]>,
}

impl Default for DgpConfig {
    fn default() -> Self {
        let mut cfg = Self {
            seed: 20231001,
            prefectures: Vec::new(),
            window: StudyWindow::default_2023(),
            rule: BinningRule::default(),
            wage: WageMixture {
                mass_at_mw: 0.35,
                below_mw_mass: 0.25,
                upper_shift: 0.10,
                upper_scale: 0.20,
                wage_cap: 2000,
            },
            missing_frac: 0.0,
            excess_frac: 0.0,
            exact_mw_share: 0.7,
            match_prob: 0.8,
            reimbursement: ReimbursementSpec {
                zero_prob: 0.3,
                point_mass_500_prob: 0.45,
                grid_step: 100,
                grid_max: 1500,
            },
            hours: vec![(2.0, 0.05), (3.0, 0.15), (4.0, 0.25), (5.0, 0.2), (6.0, 0.15), (7.0, 0.1), (8.0, 0.1)],
            occupation_weights: [0.25, 0.2, 0.12, 0.08, 0.03, 0.18, 0.04, 0.04, 0.06],
            time_slot_weights: [0.35, 0.3, 0.25, 0.1],
            users_per_posting: 0.6,
            posting_growth: 0.0,
            overrides: BTreeMap::new(),
            occupation_missing: None,
        };
        cfg.prefectures = Self::japan_prefectures(1_000_000.0 / 12.0);
        cfg.calibrate(-0.030, 0.012).expect("default calibration is feasible");
        cfg
    }
}

impl DgpConfig {
    /// The 47 prefectures with `monthly_total` postings split by population.
    pub fn japan_prefectures(monthly_total: f64) -> Vec<PrefectureSpec> {
        let pop: f64 = JAPAN_2023.iter().map(|p| p.4).sum();
        JAPAN_2023
            .iter()
            .map(|&(id, _, old_mw, new_mw, w)| PrefectureSpec {
                id,
                old_mw,
                new_mw,
                postings_per_month: monthly_total * w / pop,
            })
            .collect()
    }

    /// Placebo world: no post-event change.
    pub fn placebo() -> Self {
        Self {
            missing_frac: 0.0,
            excess_frac: 0.0,
            ..Self::default()
        }
    }

    /// Per-bin employment share of the below-minimum band before the event,
    /// `q·b / bins_per_group`.
    pub fn below_bin_share(&self) -> f64 {
        self.match_prob * self.wage.below_share() / self.rule.bins_per_group() as f64
    }

    /// Choose m and x so that the true per-bin effects are `delta_b` below
    /// and `delta_a` above the new minimum.
    pub fn calibrate(&mut self, delta_b: f64, delta_a: f64) -> Result<()> {
        let s = self.below_bin_share();
        if s <= 0.0 {
            return Err(Error::Config("no employment below the new minimum to calibrate against".into()));
        }
        let x = delta_a / s;
        let m = -delta_b / s - x;
        if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&m) || m + x > 1.0 {
            return Err(Error::Config(format!(
                "targets delta_b={delta_b}, delta_a={delta_a} need m={m:.4}, x={x:.4} outside the feasible set"
            )));
        }
        self.missing_frac = m;
        self.excess_frac = x;
        Ok(())
    }

    /// Scale every λ_p so that the expected total postings over the window is
    /// `total`.
    pub fn set_total_postings(&mut self, total: f64) {
        let current = self.expected_postings();
        if current > 0.0 {
            let f = total / current;
            for p in &mut self.prefectures {
                p.postings_per_month *= f;
            }
        }
    }

    pub fn expected_postings(&self) -> f64 {
        let months: f64 = (0..self.window.months)
            .map(|t| (1.0 + self.posting_growth).powi(t as i32))
            .sum();
        self.prefectures.iter().map(|p| p.postings_per_month).sum::<f64>() * months
    }

    pub fn missing_for(&self, prefecture: u32) -> f64 {
        self.overrides
            .get(&prefecture)
            .and_then(|o| o.missing_frac)
            .unwrap_or(self.missing_frac)
    }

    pub fn excess_for(&self, prefecture: u32) -> f64 {
        self.overrides
            .get(&prefecture)
            .and_then(|o| o.excess_frac)
            .unwrap_or(self.excess_frac)
    }

    pub fn upper_shift_for(&self, prefecture: u32) -> f64 {
        self.overrides
            .get(&prefecture)
            .and_then(|o| o.upper_shift)
            .unwrap_or(self.wage.upper_shift)
    }

    /// Missing probability of one occupation in one prefecture.
    pub fn missing_for_occupation(&self, prefecture: u32, occ: Occupation) -> f64 {
        match &self.occupation_missing {
            Some(m) => m[occ.index()],
            None => self.missing_for(prefecture),
        }
    }

    /// Occupation-weighted average missing probability in a prefecture.
    pub fn effective_missing(&self, prefecture: u32) -> f64 {
        match &self.occupation_missing {
            Some(m) => {
                let tot: f64 = self.occupation_weights.iter().sum();
                m.iter().zip(&self.occupation_weights).map(|(a, w)| a * w).sum::<f64>() / tot
            }
            None => self.missing_for(prefecture),
        }
    }

    pub fn schedule(&self) -> Result<MinWageSchedule> {
        let ev = self.window.event_month();
        MinWageSchedule::new(self.prefectures.iter().map(|p| MinWageEntry {
            prefecture_id: p.id,
            old_mw: p.old_mw,
            new_mw: p.new_mw,
            event_month: ev,
        }))
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, v: f64| -> Result<()> {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} = {v} is not a probability")))
            }
        };
        if self.prefectures.is_empty() {
            return Err(Error::Config("generator needs at least one prefecture".into()));
        }
        self.rule.validate()?;
        prob("missing_frac", self.missing_frac)?;
        prob("excess_frac", self.excess_frac)?;
        prob("exact_mw_share", self.exact_mw_share)?;
        prob("match_prob", self.match_prob)?;
        prob("mass_at_mw", self.wage.mass_at_mw)?;
        prob("below_mw_mass", self.wage.below_mw_mass)?;
        prob("below share", self.wage.below_share())?;
        prob("reimbursement zero_prob", self.reimbursement.zero_prob)?;
        prob("reimbursement point_mass_500_prob", self.reimbursement.point_mass_500_prob)?;
        prob(
            "reimbursement point masses",
            self.reimbursement.zero_prob + self.reimbursement.point_mass_500_prob,
        )?;
        if self.reimbursement.grid_step == 0 {
            return Err(Error::Config("reimbursement grid step must be positive".into()));
        }
        if !(self.wage.upper_scale > 0.0) {
            return Err(Error::Config("upper tail scale must be positive".into()));
        }
        if self.hours.is_empty() || self.hours.iter().any(|&(h, w)| !(h > 0.0) || !(w >= 0.0)) {
            return Err(Error::Config("hours grid needs positive hours and non-negative weights".into()));
        }
        for (name, ws) in [
            ("occupation", &self.occupation_weights[..]),
            ("time slot", &self.time_slot_weights[..]),
        ] {
            if ws.iter().any(|&w| !(w >= 0.0)) || ws.iter().sum::<f64>() <= 0.0 {
                return Err(Error::Config(format!("{name} weights must be non-negative with positive sum")));
            }
        }
        if !(self.users_per_posting >= 0.0) || !(self.posting_growth > -1.0) {
            return Err(Error::Config("users_per_posting must be >= 0 and posting_growth > -1".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for p in &self.prefectures {
            if !seen.insert(p.id) {
                return Err(Error::Config(format!("prefecture {} listed twice", p.id)));
            }
            if p.new_mw <= p.old_mw || p.old_mw == 0 {
                return Err(Error::Config(format!("prefecture {}: need new_mw > old_mw > 0", p.id)));
            }
            if p.new_mw - p.old_mw > self.rule.group_width as u32 {
                return Err(Error::Config(format!(
                    "prefecture {}: increase {} exceeds one exposure group",
                    p.id,
                    p.new_mw - p.old_mw
                )));
            }
            if self.wage.wage_cap < p.new_mw {
                return Err(Error::Config(format!("wage cap below the new minimum in prefecture {}", p.id)));
            }
            if !(p.postings_per_month >= 0.0) {
                return Err(Error::Config(format!("prefecture {}: negative posting rate", p.id)));
            }
            let m = self.missing_for(p.id);
            let x = self.excess_for(p.id);
            prob("missing_frac override", m)?;
            prob("excess_frac override", x)?;
            if m + x > 1.0 {
                return Err(Error::Config(format!("prefecture {}: m + x = {} exceeds 1", p.id, m + x)));
            }
            if let Some(occ) = &self.occupation_missing {
                for &mo in occ {
                    prob("occupation missing_frac", mo)?;
                    if mo + x > 1.0 {
                        return Err(Error::Config(format!("occupation m + x = {} exceeds 1", mo + x)));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Baseline probability of every integer wage in `[old_mw, wage_cap]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WagePmf {
    pub first: u32,
    pub probs: Vec<f64>,
    /// Running sums of `probs`, last entry 1.
    pub cumulative: Vec<f64>,
}

impl WagePmf {
    pub fn new(p: &PrefectureSpec, mix: &WageMixture, upper_shift: f64) -> Self {
        let first = p.old_mw;
        let n = (mix.wage_cap - first + 1) as usize;
        let mut probs = vec![0.0; n];
        probs[0] += mix.mass_at_mw;
        let band = (p.new_mw - p.old_mw) as f64;
        for w in p.old_mw..p.new_mw {
            probs[(w - first) as usize] += mix.below_mw_mass / band;
        }
        let upper = 1.0 - mix.below_share();
        let loc = (p.new_mw as f64).ln() + upper_shift;
        let z = Normal::new(loc, mix.upper_scale).expect("scale validated positive");
        let cdf = |w: f64| z.cdf(w.ln());
        let lo = cdf(p.new_mw as f64 - 0.5);
        let total = cdf(mix.wage_cap as f64 + 0.5) - lo;
        for w in p.new_mw..=mix.wage_cap {
            let mass = cdf(w as f64 + 0.5) - cdf(w as f64 - 0.5);
            probs[(w - first) as usize] += upper * mass / total;
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = probs
            .iter()
            .map(|&q| {
                acc += q;
                acc
            })
            .collect();
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        Self { first, probs, cumulative }
    }

    pub fn prob(&self, wage: u32) -> f64 {
        wage.checked_sub(self.first)
            .and_then(|i| self.probs.get(i as usize))
            .copied()
            .unwrap_or(0.0)
    }

    /// Wage for a uniform draw `u ∈ [0, 1)`.
    pub fn sample(&self, u: f64) -> u32 {
        let i = self.cumulative.partition_point(|&c| c <= u);
        self.first + i.min(self.probs.len() - 1) as u32
    }

    /// Probability of `[lo, hi]`.
    pub fn mass(&self, lo: i64, hi: i64) -> f64 {
        let lo = lo.max(self.first as i64);
        let hi = hi.min(self.first as i64 + self.probs.len() as i64 - 1);
        if hi < lo {
            return 0.0;
        }
        (lo..=hi).map(|w| self.probs[(w - self.first as i64) as usize]).sum()
    }

    pub fn median(&self) -> u32 {
        self.sample(0.5)
    }
}
