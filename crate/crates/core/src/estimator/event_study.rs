//! Saturated event-study difference-in-differences over exposure groups.
//!
//! The design has an intercept (group ∞ in the reference month), one dummy
//! per finite group, one per non-reference month, and one interaction per
//! finite group and non-reference month. Because every (group, month) cell
//! gets its own parameter the least-squares solution is a set of contrasts
//! of cell means, which the `CellMeans` path computes directly.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::vcov::{sandwich, VcovKind};
use crate::error::{Error, Result};
use crate::linalg::{least_squares_qr, spd_inverse, Matrix};
use crate::model::binning::{BinningRule, ExposureGroup};
use crate::model::outcome::Observation;
use crate::model::types::StudyWindow;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitMethod {
    #[default]
    CellMeans,
    /// Dense dummy regression solved by Householder QR.
    DummyOls,
}

impl FromStr for FitMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "cell_means" => Ok(FitMethod::CellMeans),
            "dummy_ols" => Ok(FitMethod::DummyOls),
            _ => Err(Error::Config(format!("unknown fit method `{s}`"))),
        }
    }
}

impl fmt::Display for FitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitMethod::CellMeans => "cell_means",
            FitMethod::DummyOls => "dummy_ols",
        })
    }
}

/// Column layout of the saturated design.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    /// Finite exposure groups, ascending.
    pub groups: Vec<i32>,
    pub months: usize,
    pub event_index: usize,
    /// Omitted month; `reference_t − event_index` is the reference `l`.
    pub reference_t: usize,
}

impl Layout {
    pub fn new(window: &StudyWindow, groups: Vec<i32>, reference_l: i32) -> Result<Self> {
        let reference_t = window
            .t_of_relative(reference_l)
            .ok_or_else(|| Error::Config(format!("reference period l={reference_l} lies outside the window")))?;
        if groups.is_empty() {
            return Err(Error::Config("at least one finite exposure group is required".into()));
        }
        let mut groups = groups;
        groups.sort_unstable();
        groups.dedup();
        Ok(Self {
            groups,
            months: window.months,
            event_index: window.event_index,
            reference_t,
        })
    }

    pub fn reference_l(&self) -> i32 {
        self.relative(self.reference_t)
    }

    pub fn relative(&self, t: usize) -> i32 {
        t as i32 - self.event_index as i32
    }

    pub fn t_of(&self, l: i32) -> Option<usize> {
        let t = self.event_index as i32 + l;
        (1..=self.months as i32).contains(&t).then_some(t as usize)
    }

    fn n_groups(&self) -> usize {
        self.groups.len()
    }

    fn n_free_months(&self) -> usize {
        self.months - 1
    }

    /// Total number of coefficients.
    pub fn k(&self) -> usize {
        1 + self.n_groups() + self.n_free_months() * (1 + self.n_groups())
    }

    pub fn n_mu(&self) -> usize {
        self.n_groups() * self.n_free_months()
    }

    pub fn mu_offset(&self) -> usize {
        1 + self.n_groups() + self.n_free_months()
    }

    fn group_pos(&self, e: i32) -> Option<usize> {
        self.groups.binary_search(&e).ok()
    }

    fn month_pos(&self, t: usize) -> Option<usize> {
        if t == 0 || t > self.months || t == self.reference_t {
            None
        } else if t < self.reference_t {
            Some(t - 1)
        } else {
            Some(t - 2)
        }
    }

    pub fn alpha_index(&self, e: i32) -> Option<usize> {
        self.group_pos(e).map(|g| 1 + g)
    }

    pub fn lambda_index(&self, t: usize) -> Option<usize> {
        self.month_pos(t).map(|m| 1 + self.n_groups() + m)
    }

    /// Position of `μ_{l,e}` inside the μ block (not the full coefficient
    /// vector).
    pub fn mu_pos(&self, l: i32, e: i32) -> Option<usize> {
        let g = self.group_pos(e)?;
        let m = self.month_pos(self.t_of(l)?)?;
        Some(g * self.n_free_months() + m)
    }

    pub fn mu_index(&self, l: i32, e: i32) -> Option<usize> {
        self.mu_pos(l, e).map(|p| self.mu_offset() + p)
    }

    /// `(l, e)` of every μ in block order.
    pub fn mu_cells(&self) -> Vec<(i32, i32)> {
        let mut out = Vec::with_capacity(self.n_mu());
        for &e in &self.groups {
            for t in 1..=self.months {
                if t != self.reference_t {
                    out.push((self.relative(t), e));
                }
            }
        }
        out
    }

    /// Event-time periods `l ≥ 0`.
    pub fn post_periods(&self) -> Vec<i32> {
        (self.event_index..=self.months).map(|t| self.relative(t)).collect()
    }

    /// Periods `l < 0` other than the reference.
    pub fn pre_periods(&self) -> Vec<i32> {
        (1..self.event_index)
            .filter(|&t| t != self.reference_t)
            .map(|t| self.relative(t))
            .collect()
    }

    /// Nonzero columns of an observation's design row (all equal to one).
    pub fn design_row(&self, group: ExposureGroup, t: usize) -> Option<([usize; 4], usize)> {
        let mut cols = [0usize; 4];
        let mut len = 1;
        let tpos = self.month_pos(t);
        if t == 0 || t > self.months {
            return None;
        }
        match group {
            ExposureGroup::Infinite => {
                if let Some(m) = tpos {
                    cols[len] = 1 + self.n_groups() + m;
                    len += 1;
                }
            }
            ExposureGroup::Finite(e) => {
                let g = self.group_pos(e)?;
                cols[len] = 1 + g;
                len += 1;
                if let Some(m) = tpos {
                    cols[len] = 1 + self.n_groups() + m;
                    cols[len + 1] = self.mu_offset() + g * self.n_free_months() + m;
                    len += 2;
                }
            }
            ExposureGroup::Excluded => return None,
        }
        Some((cols, len))
    }

    pub fn column_labels(&self) -> Vec<String> {
        let mut out = vec!["intercept".to_string()];
        out.extend(self.groups.iter().map(|e| format!("alpha[e={e}]")));
        out.extend(
            (1..=self.months)
                .filter(|&t| t != self.reference_t)
                .map(|t| format!("lambda[t={t}]")),
        );
        out.extend(self.mu_cells().into_iter().map(|(l, e)| format!("mu[l={l},e={e}]")));
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventStudySpec {
    pub window: StudyWindow,
    pub groups: Vec<i32>,
    /// Omitted event-time period, `−1` by default.
    pub reference_l: i32,
    pub method: FitMethod,
    pub vcov: VcovKind,
}

impl EventStudySpec {
    pub fn new(window: StudyWindow, rule: &BinningRule) -> Self {
        Self {
            window,
            groups: rule.finite_groups().collect(),
            reference_l: -1,
            method: FitMethod::CellMeans,
            vcov: VcovKind::Cr1,
        }
    }

    pub fn layout(&self) -> Result<Layout> {
        Layout::new(&self.window, self.groups.clone(), self.reference_l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMean<T> {
    pub group: ExposureGroup,
    pub t: usize,
    pub mean: T,
    /// Sum of observation weights.
    pub weight: T,
    pub n_obs: usize,
}

/// Point estimates without inference, as used by resampling.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFit<T> {
    pub layout: Layout,
    pub coef: Vec<T>,
    /// Sorted by `(group, t)`.
    pub cell_means: Vec<CellMean<T>>,
}

impl<T: Scalar> PointFit<T> {
    pub fn mu_block(&self) -> &[T] {
        &self.coef[self.layout.mu_offset()..]
    }

    pub fn mu(&self, l: i32, e: i32) -> Option<T> {
        self.layout.mu_index(l, e).map(|i| self.coef[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuCell<T> {
    pub l: i32,
    pub e: i32,
    pub estimate: T,
    pub se: T,
}

#[derive(Debug, Clone)]
pub struct EventStudyFit<T> {
    pub layout: Layout,
    pub method: FitMethod,
    pub vcov_kind: VcovKind,
    /// Intercept, α_e, λ_t, μ_{l,e} in [`Layout`] order.
    pub coef: Vec<T>,
    /// Covariance of the full coefficient vector.
    pub vcov: Matrix<T>,
    /// One per used observation, in input order (excluded-band rows skipped).
    pub residuals: Vec<T>,
    pub cell_means: Vec<CellMean<T>>,
    pub n_obs: usize,
    pub n_clusters: usize,
}

impl<T: Scalar> EventStudyFit<T> {
    pub fn intercept(&self) -> T {
        self.coef[0]
    }

    pub fn alpha(&self, e: i32) -> Option<T> {
        self.layout.alpha_index(e).map(|i| self.coef[i])
    }

    /// λ_t; zero for the reference month.
    pub fn lambda(&self, t: usize) -> Option<T> {
        if t == self.layout.reference_t {
            return Some(T::zero());
        }
        self.layout.lambda_index(t).map(|i| self.coef[i])
    }

    pub fn mu(&self, l: i32, e: i32) -> Option<T> {
        self.layout.mu_index(l, e).map(|i| self.coef[i])
    }

    pub fn se(&self, index: usize) -> T {
        self.vcov[(index, index)].max(T::zero()).sqrt()
    }

    pub fn mu_se(&self, l: i32, e: i32) -> Option<T> {
        self.layout.mu_index(l, e).map(|i| self.se(i))
    }

    pub fn mu_block(&self) -> &[T] {
        &self.coef[self.layout.mu_offset()..]
    }

    pub fn mu_vcov(&self) -> Matrix<T> {
        let off = self.layout.mu_offset();
        let idx: Vec<usize> = (off..self.layout.k()).collect();
        self.vcov.select(&idx)
    }

    pub fn mu_grid(&self) -> Vec<MuCell<T>> {
        self.layout
            .mu_cells()
            .into_iter()
            .zip(self.mu_block())
            .enumerate()
            .map(|(p, ((l, e), &estimate))| MuCell {
                l,
                e,
                estimate,
                se: self.se(self.layout.mu_offset() + p),
            })
            .collect()
    }

    pub fn cell_mean(&self, group: ExposureGroup, t: usize) -> Option<&CellMean<T>> {
        self.cell_means.iter().find(|c| c.group == group && c.t == t)
    }
}

type CellKey = (ExposureGroup, usize);

fn cell_table<T: Scalar>(obs: &[&Observation<T>], layout: &Layout) -> Result<BTreeMap<CellKey, CellMean<T>>> {
    let mut acc: BTreeMap<CellKey, (T, T, usize)> = BTreeMap::new();
    for o in obs {
        let a = acc.entry((o.group, o.t)).or_insert((T::zero(), T::zero(), 0));
        a.0 = a.0 + o.weight * o.y;
        a.1 = a.1 + o.weight;
        a.2 += 1;
    }
    let mut out = BTreeMap::new();
    let groups = layout
        .groups
        .iter()
        .map(|&e| ExposureGroup::Finite(e))
        .chain(std::iter::once(ExposureGroup::Infinite));
    for g in groups {
        for t in 1..=layout.months {
            match acc.get(&(g, t)) {
                Some(&(swy, sw, n)) if sw > T::zero() => {
                    out.insert(
                        (g, t),
                        CellMean {
                            group: g,
                            t,
                            mean: swy / sw,
                            weight: sw,
                            n_obs: n,
                        },
                    );
                }
                _ => {
                    return Err(Error::Estimation(format!(
                        "empty cell e={g}, t={t} (l={})",
                        layout.relative(t)
                    )))
                }
            }
        }
    }
    Ok(out)
}

fn usable<'a, T: Scalar>(obs: &'a [Observation<T>], layout: &Layout) -> Result<Vec<&'a Observation<T>>> {
    let mut out = Vec::with_capacity(obs.len());
    for o in obs {
        match o.group {
            ExposureGroup::Excluded => continue,
            ExposureGroup::Finite(e) if layout.group_pos(e).is_none() => {
                return Err(Error::Estimation(format!("observation in unknown exposure group {e}")))
            }
            _ => {}
        }
        if o.t == 0 || o.t > layout.months {
            return Err(Error::Estimation(format!("observation month {} outside the window", o.t)));
        }
        if !(o.weight >= T::zero()) || !o.y.is_finite() {
            return Err(Error::Estimation("non-finite outcome or negative weight".into()));
        }
        out.push(o);
    }
    Ok(out)
}

fn coef_from_cells<T: Scalar>(layout: &Layout, cells: &BTreeMap<CellKey, CellMean<T>>) -> Vec<T> {
    let ybar = |g: ExposureGroup, t: usize| cells[&(g, t)].mean;
    let r = layout.reference_t;
    let inf = ExposureGroup::Infinite;
    let mut coef = vec![T::zero(); layout.k()];
    coef[0] = ybar(inf, r);
    for &e in &layout.groups {
        let g = ExposureGroup::Finite(e);
        coef[layout.alpha_index(e).unwrap()] = ybar(g, r) - ybar(inf, r);
    }
    for t in 1..=layout.months {
        let Some(li) = layout.lambda_index(t) else { continue };
        let dinf = ybar(inf, t) - ybar(inf, r);
        coef[li] = dinf;
        for &e in &layout.groups {
            let g = ExposureGroup::Finite(e);
            let mi = layout.mu_index(layout.relative(t), e).unwrap();
            coef[mi] = (ybar(g, t) - ybar(g, r)) - dinf;
        }
    }
    coef
}

/// Cell-mean point estimates only. Shares the cell checks of the full fit.
pub fn fit_point<T: Scalar>(obs: &[Observation<T>], spec: &EventStudySpec) -> Result<PointFit<T>> {
    let layout = spec.layout()?;
    let used = usable(obs, &layout)?;
    let cells = cell_table(&used, &layout)?;
    Ok(PointFit {
        coef: coef_from_cells(&layout, &cells),
        cell_means: cells.into_values().collect(),
        layout,
    })
}

pub fn fit_event_study<T: Scalar>(obs: &[Observation<T>], spec: &EventStudySpec) -> Result<EventStudyFit<T>> {
    let layout = spec.layout()?;
    let used = usable(obs, &layout)?;
    let cells = cell_table(&used, &layout)?;
    let n = used.len();
    let k = layout.k();
    if n <= k {
        return Err(Error::Estimation(format!("{n} observations for {k} parameters")));
    }
    let rows: Vec<([usize; 4], usize)> = used
        .iter()
        .map(|o| layout.design_row(o.group, o.t).expect("row of a usable observation"))
        .collect();

    let (coef, residuals, bread) = match spec.method {
        FitMethod::CellMeans => {
            let coef = coef_from_cells(&layout, &cells);
            let residuals: Vec<T> = used.iter().map(|o| o.y - cells[&(o.group, o.t)].mean).collect();
            let mut xtwx = Matrix::zeros(k, k);
            for (o, (cols, len)) in used.iter().zip(&rows) {
                for &a in &cols[..*len] {
                    for &b in &cols[..*len] {
                        xtwx[(a, b)] = xtwx[(a, b)] + o.weight;
                    }
                }
            }
            (coef, residuals, spd_inverse(&xtwx)?)
        }
        FitMethod::DummyOls => {
            let mut x = Matrix::zeros(n, k);
            let mut y = Vec::with_capacity(n);
            for (i, (o, (cols, len))) in used.iter().zip(&rows).enumerate() {
                let sw = o.weight.sqrt();
                for &c in &cols[..*len] {
                    x[(i, c)] = sw;
                }
                y.push(sw * o.y);
            }
            let tol = T::epsilon() * T::lit(1e3);
            let ls = least_squares_qr(&x, &y, tol)?;
            let residuals: Vec<T> = used
                .iter()
                .zip(&rows)
                .map(|(o, (cols, len))| o.y - cols[..*len].iter().map(|&c| ls.coef[c]).sum::<T>())
                .collect();
            (ls.coef, residuals, ls.xtx_inv)
        }
    };

    let clusters: Vec<u64> = used.iter().map(|o| o.cluster).collect();
    let (vcov, n_clusters) = sandwich(n, &bread, &clusters, spec.vcov, |i, out| {
        let s = used[i].weight * residuals[i];
        let (cols, len) = &rows[i];
        out.extend(cols[..*len].iter().map(|&c| (c, s)));
    })?;

    Ok(EventStudyFit {
        layout,
        method: spec.method,
        vcov_kind: spec.vcov,
        coef,
        vcov,
        residuals,
        cell_means: cells.into_values().collect(),
        n_obs: n,
        n_clusters,
    })
}
