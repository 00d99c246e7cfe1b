//! Employment elasticities with respect to the minimum wage and to the
//! affected workers' wage.

use std::str::FromStr;

use super::aggregate::{dot, mu_weights, DecompScope, Quantity};
use crate::error::{Error, Result};
use crate::estimator::{EventStudyFit, Layout};
use crate::linalg::Matrix;
use crate::model::binning::ExposureGroup;
use crate::model::panel::Panel;
use crate::model::types::MinWageSchedule;
use crate::scalar::Scalar;

/// How prefecture-level moments are averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MwWeighting {
    /// Weighted by pre-event postings.
    #[default]
    Postings,
    Unweighted,
}

impl FromStr for MwWeighting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "postings" => Ok(Self::Postings),
            "unweighted" => Ok(Self::Unweighted),
            _ => Err(Error::Config(format!("unknown averaging `{s}`"))),
        }
    }
}

/// Wage attached to each exposure group in the wage bill change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WageValuation {
    /// `MW + 100e + 99`.
    #[default]
    UpperEdge,
    /// `MW + 100e + 49.5`.
    Midpoint,
}

impl FromStr for WageValuation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "upper_edge" => Ok(Self::UpperEdge),
            "midpoint" => Ok(Self::Midpoint),
            _ => Err(Error::Config(format!("unknown wage valuation `{s}`"))),
        }
    }
}

/// Pre-event moments of the band just below the new minimum wage.
///
/// Shares and wage bills are per wage bin (group total over bins per group)
/// so they are in the same units as the μ coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticityInputs<T> {
    pub pct_mw_change: T,
    /// b̄: employment share of group −1.
    pub b_bar: T,
    /// wb̄: wage bill of group −1 over postings.
    pub wb_bar: T,
    /// Average new minimum wage.
    pub mw_bar: T,
    pub group_width: T,
    pub valuation: WageValuation,
}

impl<T: Scalar> ElasticityInputs<T> {
    /// Wage assigned to group `e`.
    pub fn group_wage(&self, e: i32) -> T {
        let offset = match self.valuation {
            WageValuation::UpperEdge => self.group_width - T::one(),
            WageValuation::Midpoint => (self.group_width - T::one()) * T::lit(0.5),
        };
        self.mw_bar + self.group_width * T::lit(e as f64) + offset
    }

    /// w̄: average wage of group −1 before the event.
    pub fn w_bar_pre(&self) -> Option<T> {
        (self.b_bar > T::zero()).then(|| self.wb_bar / self.b_bar)
    }
}

/// Moments from the month before the event.
pub fn elasticity_inputs<T: Scalar>(
    panel: &Panel,
    schedule: &MinWageSchedule,
    weighting: MwWeighting,
    valuation: WageValuation,
) -> Result<ElasticityInputs<T>> {
    let t_ref = panel.window.event_index - 1;
    let bpg = panel.rule.bins_per_group() as f64;
    let mut acc = [0.0f64; 5];
    for p in panel.prefectures() {
        let entry = schedule
            .get(p)
            .ok_or_else(|| Error::Config(format!("prefecture {p} has no schedule entry")))?;
        let n = panel.totals_for(p, t_ref).map_or(0, |x| x.postings);
        if n == 0 {
            continue;
        }
        let (emp, bill) = panel
            .cells
            .iter()
            .filter(|c| c.key.prefecture_id == p && c.t == t_ref && c.key.group == ExposureGroup::Finite(-1))
            .fold((0u64, 0u64), |(e, b), c| (e + c.employment, b + c.wage_sum));
        let w = match weighting {
            MwWeighting::Postings => n as f64,
            MwWeighting::Unweighted => 1.0,
        };
        let nf = n as f64;
        acc[0] += w;
        acc[1] += w * entry.pct_change();
        acc[2] += w * emp as f64 / nf / bpg;
        acc[3] += w * bill as f64 / nf / bpg;
        acc[4] += w * entry.new_mw as f64;
    }
    if acc[0] == 0.0 {
        return Err(Error::Estimation(format!("no postings in the pre-event month t={t_ref}")));
    }
    Ok(ElasticityInputs {
        pct_mw_change: T::lit(acc[1] / acc[0]),
        b_bar: T::lit(acc[2] / acc[0]),
        wb_bar: T::lit(acc[3] / acc[0]),
        mw_bar: T::lit(acc[4] / acc[0]),
        group_width: T::lit(panel.rule.group_width as f64),
        valuation,
    })
}

/// Elasticity quantities from already aggregated components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Components<T> {
    pub delta_b: T,
    pub delta_a: T,
    pub pct_mw_change: T,
    pub b_bar: T,
    pub pct_affected_wage: Option<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticityPoint<T> {
    pub delta_e: T,
    pub pct_affected_employment: Option<T>,
    pub elasticity_mw: Option<T>,
    pub own_wage_elasticity: Option<T>,
}

fn ratio<T: Scalar>(a: T, b: T) -> Option<T> {
    (b != T::zero()).then(|| a / b)
}

pub fn elasticities_from_components<T: Scalar>(c: &Components<T>) -> ElasticityPoint<T> {
    let delta_e = c.delta_a + c.delta_b;
    let pae = ratio(delta_e, c.b_bar);
    ElasticityPoint {
        delta_e,
        pct_affected_employment: pae,
        elasticity_mw: ratio(delta_e, c.pct_mw_change),
        own_wage_elasticity: pae.zip(c.pct_affected_wage).and_then(|(a, w)| ratio(a, w)),
    }
}

/// `(Δwb, %Δw)`; `%Δw` is absent when b̄ or the post-event employment of
/// the band vanishes.
pub fn affected_wage_change<T: Scalar>(
    inputs: &ElasticityInputs<T>,
    delta_e: T,
    delta_a_e: &[(i32, T)],
) -> (T, Option<T>) {
    let delta_wb: T = delta_a_e.iter().map(|&(e, d)| inputs.group_wage(e) * d).sum();
    let pct = inputs.w_bar_pre().and_then(|w_pre| {
        let den = inputs.b_bar + delta_e;
        (den != T::zero() && w_pre != T::zero()).then(|| (inputs.wb_bar + delta_wb) / den / w_pre - T::one())
    });
    (delta_wb, pct)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stat<T> {
    pub estimate: Option<T>,
    pub se_delta: Option<T>,
    pub se_bootstrap: Option<T>,
    /// Why the estimate is absent.
    pub reason: Option<String>,
}

impl<T: Scalar> Stat<T> {
    fn fixed(v: T) -> Self {
        Self {
            estimate: Some(v),
            se_delta: None,
            se_bootstrap: None,
            reason: None,
        }
    }

    fn with_grad(v: Option<T>, grad: Option<Vec<T>>, vcov: &Matrix<T>, reason: &str) -> Self {
        Self {
            estimate: v,
            se_delta: v.and(grad).map(|g| vcov.quad_form(&g).max(T::zero()).sqrt()),
            se_bootstrap: None,
            reason: v.is_none().then(|| reason.to_string()),
        }
    }
}

/// Missing/excess jobs, affected wages and the three elasticities.
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticityReport<T> {
    pub inputs: ElasticityInputs<T>,
    pub missing_jobs: Stat<T>,
    pub excess_jobs: Stat<T>,
    pub delta_e: Stat<T>,
    pub delta_wb: Stat<T>,
    pub w_bar_pre: Option<T>,
    pub pct_affected_wage: Stat<T>,
    pub pct_affected_employment: Stat<T>,
    pub elasticity_mw: Stat<T>,
    pub own_wage_elasticity: Stat<T>,
    pub b_bar: Stat<T>,
    pub pct_mw_change: Stat<T>,
}

impl<T: Scalar> ElasticityReport<T> {
    /// Rows in table order with display labels.
    pub fn rows(&self) -> Vec<(&'static str, &Stat<T>)> {
        vec![
            ("Missing jobs", &self.missing_jobs),
            ("Excess jobs", &self.excess_jobs),
            ("Affected wages", &self.pct_affected_wage),
            ("Affected employment", &self.pct_affected_employment),
            ("Elasticity w.r.t MW", &self.elasticity_mw),
            ("Own-wage elasticity", &self.own_wage_elasticity),
            ("Job below new MW", &self.b_bar),
            ("% MW changes", &self.pct_mw_change),
        ]
    }
}

/// Point values of the battery for one μ block. Undefined entries are NaN.
///
/// Order: Δb, Δa, %Δw, affected employment, elasticity w.r.t. MW, own-wage
/// elasticity.
pub fn battery_point<T: Scalar>(layout: &Layout, mu: &[T], inputs: &ElasticityInputs<T>) -> Result<[T; 6]> {
    let s = DecompScope::Employment;
    let q = |q| -> Result<T> { Ok(dot(&mu_weights(layout, s, q)?, mu)) };
    let (db, da) = (q(Quantity::DeltaB)?, q(Quantity::DeltaA)?);
    let mut dae = Vec::new();
    for &e in &layout.groups {
        dae.push((e, q(Quantity::DeltaAE(e))?));
    }
    let dae = substitute_below(dae, db);
    let de = da + db;
    let (_, pdw) = affected_wage_change(inputs, de, &dae);
    let pt = elasticities_from_components(&Components {
        delta_b: db,
        delta_a: da,
        pct_mw_change: inputs.pct_mw_change,
        b_bar: inputs.b_bar,
        pct_affected_wage: pdw,
    });
    let nan = T::nan();
    Ok([
        db,
        da,
        pdw.unwrap_or(nan),
        pt.pct_affected_employment.unwrap_or(nan),
        pt.elasticity_mw.unwrap_or(nan),
        pt.own_wage_elasticity.unwrap_or(nan),
    ])
}

/// The wage bill uses Δb in place of the e = −1 group average.
fn substitute_below<T: Scalar>(mut dae: Vec<(i32, T)>, db: T) -> Vec<(i32, T)> {
    for x in dae.iter_mut() {
        if x.0 == -1 {
            x.1 = db;
        }
    }
    dae
}

/// Point estimates with delta-method standard errors; bootstrap SEs are
/// filled in separately by [`super::bootstrap::attach_bootstrap`].
pub fn elasticities<T: Scalar>(fit: &EventStudyFit<T>, inputs: &ElasticityInputs<T>) -> Result<ElasticityReport<T>> {
    let layout = &fit.layout;
    let s = DecompScope::Employment;
    let mu = fit.mu_block();
    let v = fit.mu_vcov();
    let wa = mu_weights(layout, s, Quantity::DeltaA)?;
    let wb = mu_weights(layout, s, Quantity::DeltaB)?;
    let we: Vec<T> = wa.iter().zip(&wb).map(|(&a, &b)| a + b).collect();
    let (da, db) = (dot(&wa, mu), dot(&wb, mu));
    let de = da + db;

    // d(Δwb)/dμ.
    let mut wwb = vec![T::zero(); mu.len()];
    let mut dae = Vec::new();
    for &e in &layout.groups {
        let w = if e == -1 { wb.clone() } else { mu_weights(layout, s, Quantity::DeltaAE(e))? };
        let val = inputs.group_wage(e);
        for (acc, &x) in wwb.iter_mut().zip(&w) {
            *acc = *acc + val * x;
        }
        dae.push((e, dot(&w, mu)));
    }
    let (delta_wb, pdw) = affected_wage_change(inputs, de, &dae);
    let pt = elasticities_from_components(&Components {
        delta_b: db,
        delta_a: da,
        pct_mw_change: inputs.pct_mw_change,
        b_bar: inputs.b_bar,
        pct_affected_wage: pdw,
    });

    let scaled = |w: &[T], c: T| w.iter().map(|&x| x * c).collect::<Vec<T>>();
    let b = inputs.b_bar;
    let g_pae = (b != T::zero()).then(|| scaled(&we, T::one() / b));
    let g_emw = (inputs.pct_mw_change != T::zero()).then(|| scaled(&we, T::one() / inputs.pct_mw_change));
    // %Δw = (wb̄ + Δwb) / ((b̄ + Δe) w̄) − 1.
    let g_pdw = pdw.and_then(|_| {
        let w_pre = inputs.w_bar_pre()?;
        let den = b + de;
        let num = inputs.wb_bar + delta_wb;
        Some(
            wwb.iter()
                .zip(&we)
                .map(|(&dw, &dd)| (dw * den - num * dd) / (den * den) / w_pre)
                .collect::<Vec<T>>(),
        )
    });
    let g_own = match (pt.pct_affected_employment, pdw, &g_pae, &g_pdw) {
        (Some(pae), Some(p), Some(ga), Some(gp)) if p != T::zero() => Some(
            ga.iter()
                .zip(gp)
                .map(|(&a, &w)| a / p - pae * w / (p * p))
                .collect::<Vec<T>>(),
        ),
        _ => None,
    };

    let reason_b = "no employment below the new minimum wage before the event";
    Ok(ElasticityReport {
        inputs: *inputs,
        missing_jobs: Stat::with_grad(Some(db), Some(wb.clone()), &v, ""),
        excess_jobs: Stat::with_grad(Some(da), Some(wa.clone()), &v, ""),
        delta_e: Stat::with_grad(Some(de), Some(we.clone()), &v, ""),
        delta_wb: Stat::with_grad(Some(delta_wb), Some(wwb), &v, ""),
        w_bar_pre: inputs.w_bar_pre(),
        pct_affected_wage: Stat::with_grad(pdw, g_pdw, &v, reason_b),
        pct_affected_employment: Stat::with_grad(pt.pct_affected_employment, g_pae, &v, reason_b),
        elasticity_mw: Stat::with_grad(pt.elasticity_mw, g_emw, &v, "minimum wage did not change"),
        own_wage_elasticity: Stat::with_grad(
            pt.own_wage_elasticity,
            g_own,
            &v,
            "affected wage change is zero or undefined",
        ),
        b_bar: Stat::fixed(inputs.b_bar),
        pct_mw_change: Stat::fixed(inputs.pct_mw_change),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reported_components() {
        let c = Components {
            delta_b: -0.03f64,
            delta_a: 0.012,
            pct_mw_change: 0.047,
            b_bar: 0.068,
            pct_affected_wage: Some(0.366),
        };
        let p = elasticities_from_components(&c);
        assert!((p.delta_e + 0.018).abs() < 1e-15);
        assert!((p.elasticity_mw.unwrap() + 0.383).abs() < 1e-3);
        assert!((p.pct_affected_employment.unwrap() + 0.2647).abs() < 1e-4);
    }

    #[test]
    fn zero_share_is_undefined() {
        let c = Components {
            delta_b: -0.03f64,
            delta_a: 0.012,
            pct_mw_change: 0.047,
            b_bar: 0.0,
            pct_affected_wage: Some(0.366),
        };
        let p = elasticities_from_components(&c);
        assert_eq!(p.pct_affected_employment, None);
        assert_eq!(p.own_wage_elasticity, None);
    }

    #[test]
    fn wage_change_is_zero_without_effects() {
        let inputs = ElasticityInputs {
            pct_mw_change: 0.04f64,
            b_bar: 0.05,
            wb_bar: 0.05 * 1050.0,
            mw_bar: 1100.0,
            group_width: 100.0,
            valuation: WageValuation::UpperEdge,
        };
        let (dwb, pct) = affected_wage_change(&inputs, 0.0, &[(-1, 0.0), (0, 0.0)]);
        assert_eq!(dwb, 0.0);
        assert!(pct.unwrap().abs() < 1e-15);
        assert_eq!(inputs.group_wage(-1), 1099.0);
        assert_eq!(inputs.group_wage(2), 1399.0);
    }
}
