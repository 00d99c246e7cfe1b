mod common;

use common::{random_panel, rel_close};
use mwbunch::estimator::{fit_event_study, EventStudySpec, FitMethod};
use mwbunch::model::ExposureGroup;
use proptest::prelude::*;
use std::collections::BTreeMap;

fn both(spec: &EventStudySpec) -> (EventStudySpec, EventStudySpec) {
    let mut ols = spec.clone();
    ols.method = FitMethod::DummyOls;
    (spec.clone(), ols)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dummy_ols_equals_cell_means(seed in any::<u64>(), weighted in any::<bool>()) {
        let (obs, spec) = random_panel(seed, weighted);
        let (cm, ols) = both(&spec);
        let a = fit_event_study(&obs, &cm).unwrap();
        let b = fit_event_study(&obs, &ols).unwrap();
        for (x, y) in a.coef.iter().zip(&b.coef) {
            prop_assert!(rel_close(*x, *y, 1e-10), "{x} vs {y}");
        }
        for i in 0..a.coef.len() {
            for j in 0..a.coef.len() {
                prop_assert!(rel_close(a.vcov[(i, j)], b.vcov[(i, j)], 1e-8));
            }
        }
    }

    #[test]
    fn mu_is_the_cell_mean_contrast(seed in any::<u64>()) {
        let (obs, spec) = random_panel(seed, false);
        let fit = fit_event_study(&obs, &spec).unwrap();
        let mut means: BTreeMap<(ExposureGroup, usize), (f64, f64)> = BTreeMap::new();
        for o in &obs {
            let m = means.entry((o.group, o.t)).or_default();
            m.0 += o.y;
            m.1 += 1.0;
        }
        let m = |g, t| { let v = means[&(g, t)]; v.0 / v.1 };
        let r = spec.window.event_index - 1;
        for c in fit.mu_grid() {
            let t = fit.layout.t_of(c.l).unwrap();
            let g = ExposureGroup::Finite(c.e);
            let did = (m(g, t) - m(g, r)) - (m(ExposureGroup::Infinite, t) - m(ExposureGroup::Infinite, r));
            prop_assert!((c.estimate - did).abs() < 1e-12);
        }
    }

    #[test]
    fn residuals_sum_to_zero_in_every_cell(seed in any::<u64>()) {
        let (obs, spec) = random_panel(seed, false);
        let fit = fit_event_study(&obs, &spec).unwrap();
        let mut sums: BTreeMap<(ExposureGroup, usize), f64> = BTreeMap::new();
        for (o, r) in obs.iter().zip(&fit.residuals) {
            *sums.entry((o.group, o.t)).or_default() += r;
        }
        prop_assert!(sums.values().all(|s| s.abs() < 1e-12));
    }

    #[test]
    fn duplicating_within_clusters_keeps_estimates(seed in any::<u64>()) {
        let (obs, spec) = random_panel(seed, false);
        let doubled: Vec<_> = obs.iter().chain(obs.iter()).copied().collect();
        let a = fit_event_study(&obs, &spec).unwrap();
        let b = fit_event_study(&doubled, &spec).unwrap();
        for (x, y) in a.mu_block().iter().zip(b.mu_block()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn f32_and_f64_agree_on_point_estimates() {
    let (obs, spec) = random_panel(11, false);
    let obs32: Vec<_> = obs
        .iter()
        .map(|o| mwbunch::model::Observation {
            prefecture_id: o.prefecture_id,
            bin_lower: o.bin_lower,
            group: o.group,
            t: o.t,
            y: o.y as f32,
            weight: o.weight as f32,
            cluster: o.cluster,
        })
        .collect();
    let a = fit_event_study(&obs, &spec).unwrap();
    let b = fit_event_study(&obs32, &spec).unwrap();
    for (x, y) in a.mu_block().iter().zip(b.mu_block()) {
        assert!((x - *y as f64).abs() < 1e-5);
    }
}
