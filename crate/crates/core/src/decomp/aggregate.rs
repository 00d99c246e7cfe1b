//! Missing and excess jobs from the event-study coefficients.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimator::{EventStudyFit, Layout};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Which groups enter the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecompScope {
    /// Excess jobs from `e ≥ 0`, missing jobs from `e = −1`.
    #[default]
    Employment,
    /// Only `e ≥ 0`; the band below the new minimum has no employment to
    /// attach an amenity to once the revision binds.
    Amenity,
}

impl FromStr for DecompScope {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "employment" => Ok(Self::Employment),
            "amenity" => Ok(Self::Amenity),
            _ => Err(Error::Config(format!("unknown decomposition scope `{s}`"))),
        }
    }
}

/// A linear function of the μ grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// Δa, averaged over post periods.
    DeltaA,
    DeltaB,
    DeltaE,
    DeltaAL(i32),
    DeltaBL(i32),
    DeltaEL(i32),
    /// Post-period average of μ_{l,e} for one group.
    DeltaAE(i32),
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::DeltaA => write!(f, "delta_a"),
            Quantity::DeltaB => write!(f, "delta_b"),
            Quantity::DeltaE => write!(f, "delta_e"),
            Quantity::DeltaAL(l) => write!(f, "delta_a[l={l}]"),
            Quantity::DeltaBL(l) => write!(f, "delta_b[l={l}]"),
            Quantity::DeltaEL(l) => write!(f, "delta_e[l={l}]"),
            Quantity::DeltaAE(e) => write!(f, "delta_a[e={e}]"),
        }
    }
}

fn post_periods(layout: &Layout) -> Result<Vec<i32>> {
    let post = layout.post_periods();
    if post.is_empty() {
        return Err(Error::Estimation("fit has no post-event periods".into()));
    }
    if post.contains(&layout.reference_l()) {
        return Err(Error::Estimation(format!(
            "post-period coefficients at l={} are missing (reference period)",
            layout.reference_l()
        )));
    }
    Ok(post)
}

/// Weights over the μ block that define `q`.
pub fn mu_weights<T: Scalar>(layout: &Layout, scope: DecompScope, q: Quantity) -> Result<Vec<T>> {
    let post = post_periods(layout)?;
    let mut w = vec![T::zero(); layout.n_mu()];
    let upper: Vec<i32> = layout.groups.iter().copied().filter(|&e| e >= 0).collect();
    let below = -1;
    let need_below = || -> Result<()> {
        if scope == DecompScope::Amenity {
            return Err(Error::Estimation(format!("{q} is not defined for amenity outcomes")));
        }
        if !layout.groups.contains(&below) {
            return Err(Error::Estimation("fit has no e=-1 group".into()));
        }
        Ok(())
    };
    let mut add = |l: i32, e: i32, c: T| -> Result<()> {
        let p = layout
            .mu_pos(l, e)
            .ok_or_else(|| Error::Estimation(format!("missing coefficient mu[l={l},e={e}]")))?;
        w[p] = w[p] + c;
        Ok(())
    };
    let avg = T::one() / T::count(post.len() as u64);
    let check_l = |l: i32| -> Result<()> {
        if post.contains(&l) {
            Ok(())
        } else {
            Err(Error::Estimation(format!("l={l} is not a post-event period")))
        }
    };
    match q {
        Quantity::DeltaAL(l) => {
            check_l(l)?;
            for &e in &upper {
                add(l, e, T::one())?;
            }
        }
        Quantity::DeltaBL(l) => {
            check_l(l)?;
            need_below()?;
            add(l, below, T::one())?;
        }
        Quantity::DeltaEL(l) => {
            check_l(l)?;
            for &e in &upper {
                add(l, e, T::one())?;
            }
            if scope == DecompScope::Employment {
                need_below()?;
                add(l, below, T::one())?;
            }
        }
        Quantity::DeltaA => {
            for &l in &post {
                for &e in &upper {
                    add(l, e, avg)?;
                }
            }
        }
        Quantity::DeltaB => {
            need_below()?;
            for &l in &post {
                add(l, below, avg)?;
            }
        }
        Quantity::DeltaE => {
            for &l in &post {
                for &e in &upper {
                    add(l, e, avg)?;
                }
                if scope == DecompScope::Employment {
                    need_below()?;
                    add(l, below, avg)?;
                }
            }
        }
        Quantity::DeltaAE(e) => {
            if e < 0 && scope == DecompScope::Amenity {
                return Err(Error::Estimation(format!("{q} is not defined for amenity outcomes")));
            }
            for &l in &post {
                add(l, e, avg)?;
            }
        }
    }
    Ok(w)
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub estimate: T,
    pub se: T,
}

impl<T: Scalar> Estimate<T> {
    fn of(w: &[T], mu: &[T], v: &Matrix<T>) -> Self {
        Self {
            estimate: dot(w, mu),
            se: v.quad_form(w).max(T::zero()).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult<T> {
    pub scope: DecompScope,
    pub post_periods: Vec<i32>,
    pub delta_a_l: Vec<Estimate<T>>,
    /// Empty for the amenity scope.
    pub delta_b_l: Vec<Estimate<T>>,
    pub delta_e_l: Vec<Estimate<T>>,
    pub delta_a: Estimate<T>,
    pub delta_b: Option<Estimate<T>>,
    pub delta_e: Estimate<T>,
    /// `(e, Δa_e)` for every group in scope.
    pub delta_a_e: Vec<(i32, Estimate<T>)>,
}

/// Decomposition with delta-method standard errors `√(cᵀVc)`.
pub fn aggregate<T: Scalar>(fit: &EventStudyFit<T>, scope: DecompScope) -> Result<DecompositionResult<T>> {
    let layout = &fit.layout;
    let post = post_periods(layout)?;
    let mu = fit.mu_block();
    let v = fit.mu_vcov();
    let est = |q: Quantity| -> Result<Estimate<T>> { Ok(Estimate::of(&mu_weights(layout, scope, q)?, mu, &v)) };

    let delta_a_l = post.iter().map(|&l| est(Quantity::DeltaAL(l))).collect::<Result<Vec<_>>>()?;
    let delta_e_l = post.iter().map(|&l| est(Quantity::DeltaEL(l))).collect::<Result<Vec<_>>>()?;
    let (delta_b_l, delta_b) = match scope {
        DecompScope::Employment => (
            post.iter().map(|&l| est(Quantity::DeltaBL(l))).collect::<Result<Vec<_>>>()?,
            Some(est(Quantity::DeltaB)?),
        ),
        DecompScope::Amenity => (Vec::new(), None),
    };
    let delta_a_e = layout
        .groups
        .iter()
        .filter(|&&e| e >= 0 || scope == DecompScope::Employment)
        .map(|&e| est(Quantity::DeltaAE(e)).map(|x| (e, x)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DecompositionResult {
        scope,
        post_periods: post,
        delta_a_l,
        delta_b_l,
        delta_e_l,
        delta_a: est(Quantity::DeltaA)?,
        delta_b,
        delta_e: est(Quantity::DeltaE)?,
        delta_a_e,
    })
}

/// Point value of `q` for a bare μ block, as used inside resampling loops.
pub fn point_value<T: Scalar>(layout: &Layout, mu: &[T], scope: DecompScope, q: Quantity) -> Result<T> {
    Ok(dot(&mu_weights(layout, scope, q)?, mu))
}
