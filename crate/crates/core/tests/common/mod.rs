#![allow(dead_code)]

use mwbunch::estimator::{EventStudySpec, FitMethod, VcovKind};
use mwbunch::model::{ExposureGroup, Observation, StudyWindow, YearMonth};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A small random saturated panel: every listed bin is observed in every
/// month, with at least two control bins so that n > k.
pub fn random_panel(seed: u64, weighted: bool) -> (Vec<Observation<f64>>, EventStudySpec) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let months = rng.random_range(3..=5);
    let event_index = rng.random_range(2..=months);
    let top = rng.random_range(-1..=2);
    let groups: Vec<i32> = (-1..=top).collect();
    let window = StudyWindow::new(YearMonth::new(2023, 4).unwrap(), months, event_index).unwrap();
    let spec = EventStudySpec {
        window,
        groups: groups.clone(),
        reference_l: -1,
        method: FitMethod::CellMeans,
        vcov: VcovKind::Cr1,
    };

    let mut bins: Vec<ExposureGroup> = Vec::new();
    for &e in &groups {
        for _ in 0..rng.random_range(1..=3) {
            bins.push(ExposureGroup::Finite(e));
        }
    }
    for _ in 0..rng.random_range(2..=4) {
        bins.push(ExposureGroup::Infinite);
    }

    let mut obs = Vec::new();
    for (b, &group) in bins.iter().enumerate() {
        for t in 1..=months {
            obs.push(Observation {
                prefecture_id: 1,
                bin_lower: 10 * b as i32,
                group,
                t,
                y: rng.random::<f64>() * 0.1,
                weight: if weighted { rng.random_range(0.5..3.0) } else { 1.0 },
                cluster: b as u64,
            });
        }
    }
    (obs, spec)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-3)
}
