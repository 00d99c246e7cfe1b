//! Closed-form population values of the generator.
//!
//! The employment outcome of a bin is matched postings over prefecture-month
//! postings. The posting count is unaffected by the revision (destroyed jobs
//! stay posted but unfilled), so each cell mean follows directly from the
//! wage pmf, the match probability and the post-event fates.

use super::config::{DgpConfig, WagePmf};
use crate::error::{Error, Result};
use crate::model::binning::ExposureGroup;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrueCell {
    pub group: ExposureGroup,
    pub t: usize,
    /// Expected per-bin outcome, averaged over the group's bins.
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub cell_means: Vec<TrueCell>,
    /// `(l, e, μ)` against the month before the event.
    pub mu: Vec<(i32, i32, f64)>,
    pub delta_a: f64,
    pub delta_b: f64,
    pub delta_e: f64,
    /// Per-group change; group −1 carries Δb.
    pub delta_a_e: Vec<(i32, f64)>,
}

impl GroundTruth {
    pub fn cell(&self, group: ExposureGroup, t: usize) -> Option<f64> {
        self.cell_means
            .iter()
            .find(|c| c.group == group && c.t == t)
            .map(|c| c.mean)
    }

    pub fn mu_at(&self, l: i32, e: i32) -> Option<f64> {
        self.mu.iter().find(|m| m.0 == l && m.1 == e).map(|m| m.2)
    }
}

/// Population cell means and effects.
///
/// The control-group level uses every bin from the spill threshold up to the
/// wage cap, whereas an estimated panel only contains observed bins. Its
/// level is therefore approximate; its month-to-month change is exactly zero
/// either way, so μ is unaffected.
pub fn true_cell_means(cfg: &DgpConfig) -> Result<GroundTruth> {
    cfg.validate()?;
    let rule = &cfg.rule;
    let q = cfg.match_prob;
    let b = cfg.wage.below_share();
    let bpg = rule.bins_per_group() as f64;
    let groups: Vec<i32> = rule.finite_groups().collect();
    let np = cfg.prefectures.len() as f64;

    // Per-bin levels before the event, and the post-event shift of groups −1 and 0.
    let mut pre = vec![0.0; groups.len()];
    let mut shift_below = 0.0;
    let mut shift_at = 0.0;
    let (mut inf_mass, mut inf_bins) = (0.0, 0.0);
    for p in &cfg.prefectures {
        let pmf = WagePmf::new(p, &cfg.wage, cfg.upper_shift_for(p.id));
        let mw = p.new_mw as i64;
        let g = rule.group_width as i64;
        for (k, &e) in groups.iter().enumerate() {
            let lo = mw + g * e as i64;
            pre[k] += q * pmf.mass(lo, lo + g - 1) / bpg / np;
        }
        let m = cfg.effective_missing(p.id);
        let x = cfg.excess_for(p.id);
        shift_below += -(m + x) * q * b / bpg / np;
        shift_at += x * q * b / bpg / np;

        let spill = mw + rule.spill_offset as i64;
        let cap = cfg.wage.wage_cap as i64;
        if cap >= spill {
            inf_mass += q * pmf.mass(spill, cap);
            inf_bins += ((cap - spill) / rule.bin_width as i64 + 1) as f64;
        }
    }
    if inf_bins == 0.0 {
        return Err(Error::Config("wage cap leaves no control-group bins".into()));
    }
    let inf_level = inf_mass / inf_bins;

    let w = &cfg.window;
    let mut cell_means = Vec::new();
    for t in 1..=w.months {
        let post = t >= w.event_index;
        for (k, &e) in groups.iter().enumerate() {
            let add = match (post, e) {
                (true, -1) => shift_below,
                (true, 0) => shift_at,
                _ => 0.0,
            };
            cell_means.push(TrueCell {
                group: ExposureGroup::Finite(e),
                t,
                mean: pre[k] + add,
            });
        }
        cell_means.push(TrueCell {
            group: ExposureGroup::Infinite,
            t,
            mean: inf_level,
        });
    }

    let mut mu = Vec::new();
    for t in (1..=w.months).filter(|&t| t != w.event_index - 1) {
        let l = w.relative(t);
        for &e in &groups {
            let v = match (t >= w.event_index, e) {
                (true, -1) => shift_below,
                (true, 0) => shift_at,
                _ => 0.0,
            };
            mu.push((l, e, v));
        }
    }
    let delta_a_e = groups
        .iter()
        .map(|&e| {
            let v = match e {
                -1 => shift_below,
                0 => shift_at,
                _ => 0.0,
            };
            (e, v)
        })
        .collect();
    Ok(GroundTruth {
        cell_means,
        mu,
        delta_a: shift_at,
        delta_b: shift_below,
        delta_e: shift_at + shift_below,
        delta_a_e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::config::PrefectureOverride;
    use crate::dgp::generate::PostingSampler;
    use crate::rng::substream;

    #[test]
    fn default_truth_matches_calibration() {
        let t = true_cell_means(&DgpConfig::default()).unwrap();
        assert!((t.delta_b + 0.030).abs() < 1e-12);
        assert!((t.delta_a - 0.012).abs() < 1e-12);
        assert!((t.delta_e + 0.018).abs() < 1e-12);
        assert_eq!(t.mu_at(-6, 2), Some(0.0));
        assert!((t.mu_at(3, -1).unwrap() + 0.03).abs() < 1e-12);
        let pre = t.cell(ExposureGroup::Finite(-1), 6).unwrap();
        assert!((pre - 0.048).abs() < 1e-12);
    }

    #[test]
    fn overrides_average_over_prefectures() {
        let mut c = DgpConfig::default();
        c.prefectures.truncate(2);
        let id = c.prefectures[0].id;
        c.overrides.insert(
            id,
            PrefectureOverride {
                missing_frac: Some(0.0),
                excess_frac: Some(0.0),
                upper_shift: None,
            },
        );
        let t = true_cell_means(&c).unwrap();
        assert!((t.delta_b + 0.015).abs() < 1e-12);
        assert!((t.delta_a - 0.006).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_agrees_with_closed_form() {
        let mut c = DgpConfig::default();
        c.prefectures.truncate(1);
        let p = c.prefectures[0];
        let truth = true_cell_means(&c).unwrap();
        let sampler = PostingSampler::new(&c, p).unwrap();
        let mut rng = substream(7, 0, 0);
        let n = 400_000;
        let t = c.window.event_index + 1;
        let (mut below, mut at) = (0usize, 0usize);
        for i in 0..n {
            let r = sampler.draw(&mut rng, t, i);
            if !r.matched {
                continue;
            }
            if r.hourly_wage < p.new_mw {
                below += 1;
            } else if r.hourly_wage < p.new_mw + 100 {
                at += 1;
            }
        }
        let bpg = c.rule.bins_per_group() as f64;
        let got_below = below as f64 / n as f64 / bpg;
        let got_at = at as f64 / n as f64 / bpg;
        let want_below = truth.cell(ExposureGroup::Finite(-1), t).unwrap();
        let want_at = truth.cell(ExposureGroup::Finite(0), t).unwrap();
        assert!((got_below - want_below).abs() < 1e-3, "{got_below} vs {want_below}");
        assert!((got_at - want_at).abs() < 1e-3, "{got_at} vs {want_at}");
    }
}
