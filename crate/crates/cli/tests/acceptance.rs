//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use mwbunch::decomp::{aggregate, elasticities_from_components, Components, DecompScope};
use mwbunch::dgp::{generate, DgpConfig, PrefectureOverride, SimOutput};
use mwbunch::estimator::{cluster_vcov, fit_event_study, pretrend_report, EventStudySpec, FitMethod, VcovKind};
use mwbunch::hetero::{
    binned_scatter, kaitz_index, kaitz_points, ols_slope, run_stratified, Dimension, HeteroOptions, StratumId,
};
use mwbunch::linalg::Matrix;
use mwbunch::model::{
    build_panel, outcome_series, AmenityDenominator, ExposureGroup, Observation, Occupation, OutcomeKind,
    OutcomeOptions, PanelOptions, StudyWindow, YearMonth,
};
use mwbunch::EventStudyFit64;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fit(c: &DgpConfig, out: &SimOutput, kind: OutcomeKind, opts: &OutcomeOptions) -> EventStudyFit64 {
    let panel = build_panel(&out.records, &out.schedule, &c.window, &c.rule, &PanelOptions::default()).unwrap();
    let s = outcome_series::<f64>(&panel, kind, opts).unwrap();
    fit_event_study(&s.observations, &EventStudySpec::new(c.window, &c.rule)).unwrap()
}

fn identities() -> Outcome {
    let p = elasticities_from_components(&Components::<f64> {
        delta_b: -0.03,
        delta_a: 0.012,
        pct_mw_change: 0.047,
        b_bar: 0.068,
        pct_affected_wage: Some(0.366),
    });
    let (mw, emp, own) = (
        p.elasticity_mw.unwrap(),
        p.pct_affected_employment.unwrap(),
        p.own_wage_elasticity.unwrap(),
    );
    let detail = format!("elasticity_mw {mw:.4}, affected employment {emp:.4}, own-wage {own:.4}");
    check((mw + 0.387).abs() <= 0.01, || detail.clone())?;
    check((emp + 0.268).abs() <= 0.01, || detail.clone())?;
    check((own + 0.732).abs() <= 0.005, || format!("{detail}; own-wage target -0.732 +/- 0.005"))?;
    Ok(detail)
}

fn random_panel(seed: u64) -> (Vec<Observation<f64>>, EventStudySpec) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let months = rng.random_range(3..=6);
    let event_index = rng.random_range(2..=months);
    let top = rng.random_range(-1..=3);
    let groups: Vec<i32> = (-1..=top).collect();
    let window = StudyWindow::new(YearMonth::new(2023, 4).unwrap(), months, event_index).unwrap();
    let spec = EventStudySpec {
        window,
        groups: groups.clone(),
        reference_l: -1,
        method: FitMethod::CellMeans,
        vcov: VcovKind::Cr1,
    };
    let mut bins = Vec::new();
    for &e in &groups {
        for _ in 0..rng.random_range(1..=3) {
            bins.push(ExposureGroup::Finite(e));
        }
    }
    for _ in 0..rng.random_range(2..=4) {
        bins.push(ExposureGroup::Infinite);
    }
    let weighted = rng.random::<bool>();
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

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

fn saturation() -> Outcome {
    let worst = (0..1000u64)
        .into_par_iter()
        .map(|seed| {
            let (obs, spec) = random_panel(seed);
            let a = fit_event_study(&obs, &spec).unwrap();
            let mut ols = spec.clone();
            ols.method = FitMethod::DummyOls;
            let b = fit_event_study(&obs, &ols).unwrap();
            a.coef.iter().zip(&b.coef).map(|(x, y)| rel_gap(*x, *y)).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    check(worst <= 1e-10, || format!("largest relative gap {worst:e}"))?;
    Ok(format!("1000 panels, largest relative gap {worst:.1e}"))
}

fn recovery() -> Outcome {
    let mut c = DgpConfig::default();
    c.seed = 20231001;
    c.set_total_postings(1_000_000.0);
    let out = generate(&c).unwrap();
    let f = fit(&c, &out, OutcomeKind::EmploymentShare, &OutcomeOptions::default());
    let d = aggregate(&f, DecompScope::Employment).unwrap();
    let db = d.delta_b.unwrap().estimate;
    let da = d.delta_a.estimate;
    let mut detail = format!("{} contracts, db {db:.5} (true {:.4}), da {da:.5} (true {:.4})", out.records.len(), out.truth.delta_b, out.truth.delta_a);
    check((db - out.truth.delta_b).abs() <= 0.003, || detail.clone())?;
    check((da - out.truth.delta_a).abs() <= 0.003, || detail.clone())?;

    // Control-group time effects and every pre-period cell should be noise.
    let mut worst: f64 = 0.0;
    for t in 1..=c.window.months {
        if t == f.layout.reference_t {
            continue;
        }
        let i = f.layout.lambda_index(t).unwrap();
        worst = worst.max((f.coef[i] / f.se(i)).abs());
    }
    let pre = pretrend_report(&f).unwrap();
    for r in &pre.rows {
        worst = worst.max(r.z.unwrap().abs());
    }
    detail += &format!(", max |z| over time effects and pre cells {worst:.2}, pretrend p {:.3}", pre.p_value.unwrap());
    check(worst < 4.0 && !pre.rejects(0.001), || detail.clone())?;
    Ok(detail)
}

fn placebo() -> Outcome {
    let runs: Vec<(usize, usize, bool)> = (0..400u64)
        .into_par_iter()
        .map(|seed| {
            let mut c = DgpConfig::placebo();
            c.seed = 1000 + seed;
            c.set_total_postings(100_000.0);
            let out = generate(&c).unwrap();
            let f = fit(&c, &out, OutcomeKind::EmploymentShare, &OutcomeOptions::default());
            let grid = f.mu_grid();
            let covered = grid.iter().filter(|m| m.estimate.abs() <= 1.959964 * m.se).count();
            (covered, grid.len(), pretrend_report(&f).unwrap().rejects(0.05))
        })
        .collect();
    let covered: usize = runs.iter().map(|r| r.0).sum();
    let cells: usize = runs.iter().map(|r| r.1).sum();
    let rejected = runs.iter().filter(|r| r.2).count();
    let coverage = covered as f64 / cells as f64;
    let rate = rejected as f64 / runs.len() as f64;
    let detail = format!("400 seeds, coverage {:.1}%, pretrend rejection {:.1}%", 100.0 * coverage, 100.0 * rate);
    check((0.93..=0.97).contains(&coverage) && (0.03..=0.08).contains(&rate), || detail.clone())?;
    Ok(detail)
}

fn vcov_oracle() -> Outcome {
    let (n, k) = (30, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![1.0, rng.random::<f64>(), rng.random::<f64>() - 0.5, rng.random_range(0.0..3.0)])
        .collect();
    let resid: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let clusters: Vec<u64> = (0..n as u64).map(|i| i % 6).collect();
    let ours = cluster_vcov(&Matrix::from_rows(&rows).unwrap(), &resid, &clusters, VcovKind::Cr1).unwrap();

    let x = DMatrix::from_fn(n, k, |i, j| rows[i][j]);
    let bread = (x.transpose() * &x).try_inverse().unwrap();
    let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, &c) in clusters.iter().enumerate() {
        groups.entry(c).or_default().push(i);
    }
    let mut meat = DMatrix::zeros(k, k);
    for members in groups.values() {
        let mut s = DVector::zeros(k);
        for &i in members {
            s += x.row(i).transpose() * resid[i];
        }
        meat += &s * s.transpose();
    }
    let g = groups.len() as f64;
    let scale = g / (g - 1.0) * (n as f64 - 1.0) / (n - k) as f64;
    let oracle = (&bread * meat * &bread) * scale;

    let mut worst: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            worst = worst.max(rel_gap(ours[(i, j)], oracle[(i, j)]));
        }
    }
    check(worst <= 1e-10, || format!("largest relative gap {worst:e}"))?;
    Ok(format!("30 observations, 6 clusters, largest relative gap {worst:.1e}"))
}

fn amenity_null() -> Outcome {
    let mut c = DgpConfig::default();
    c.seed = 7;
    c.set_total_postings(1_000_000.0);
    let out = generate(&c).unwrap();
    let opts = OutcomeOptions {
        amenity_denominator: AmenityDenominator::CellMatches,
        ..Default::default()
    };
    let mut parts = Vec::new();
    for kind in [OutcomeKind::ReimbAmount, OutcomeKind::ReimbProvision] {
        let d = aggregate(&fit(&c, &out, kind, &opts), DecompScope::Amenity).unwrap();
        let z = d.delta_a.estimate / d.delta_a.se;
        parts.push(format!("{kind} {:.4} (z {z:.2})", d.delta_a.estimate));
        check(z.abs() < 3.0, || parts.join(", "))?;
    }
    Ok(parts.join(", "))
}

fn heterogeneity() -> Outcome {
    // Bite-proportional world: a thinner upper tail means a higher Kaitz
    // index and a larger loss below the minimum.
    let mut c = DgpConfig::default();
    c.seed = 88;
    c.wage.mass_at_mw = 0.1;
    c.wage.below_mw_mass = 0.1;
    let ids: Vec<u32> = c.prefectures.iter().map(|p| p.id).collect();
    let last = (ids.len() - 1) as f64;
    for (rank, &id) in ids.iter().enumerate() {
        let pos = ((rank * 17) % ids.len()) as f64 / last;
        c.overrides.insert(
            id,
            PrefectureOverride {
                upper_shift: Some(0.05 + 0.35 * pos),
                missing_frac: Some(0.7 - 0.6 * pos),
                excess_frac: Some(0.2),
            },
        );
    }
    c.set_total_postings(2_000_000.0);
    let out = generate(&c).unwrap();
    let opts = HeteroOptions::new(c.window, c.rule);
    let run = run_stratified::<f64>(&out.records, &out.schedule, &c.window, Dimension::Prefecture, &opts)
        .map_err(|e| e.to_string())?;
    let k = kaitz_index(&out.records, &out.schedule, &c.window, c.window.event_index);
    let points = kaitz_points(&run, &k);
    let bins = binned_scatter(&points, 10).map_err(|e| e.to_string())?;
    let slope = ols_slope(
        &bins.iter().map(|b| b.center).collect::<Vec<_>>(),
        &bins.iter().map(|b| b.delta_e).collect::<Vec<_>>(),
    )
    .ok_or("degenerate scatter")?;
    let mut detail = format!("{} prefectures, binned slope of de on Kaitz {slope:.4}", points.len());
    check(slope < 0.0, || detail.clone())?;

    // Occupation-specific losses in three tiers.
    let tier = |o: Occupation| match o.index() % 3 {
        0 => 0.6,
        1 => 0.3,
        _ => 0.0,
    };
    let mut c = DgpConfig::default();
    c.seed = 89;
    c.set_total_postings(1_000_000.0);
    c.occupation_missing = Some(Occupation::ALL.map(tier));
    let out = generate(&c).unwrap();
    let run = run_stratified::<f64>(&out.records, &out.schedule, &c.window, Dimension::Occupation, &opts)
        .map_err(|e| e.to_string())?;
    let est: Vec<(Occupation, f64)> = Occupation::ALL
        .iter()
        .filter_map(|&o| {
            run.get(StratumId::Occupation(o))
                .map(|r| (o, r.decomposition.delta_b.as_ref().unwrap().estimate))
        })
        .collect();
    let mut pairs = 0;
    for &(a, da) in &est {
        for &(b, db) in &est {
            if tier(a) > tier(b) {
                pairs += 1;
                check(da < db, || format!("{a} ({da:.4}) should lose more than {b} ({db:.4})"))?;
            }
        }
    }
    detail += &format!("; occupation ordering holds on {pairs} pairs across {} occupations", est.len());
    Ok(detail)
}

fn run_cli(dir: &Path, jobs: usize, args: &[&str]) -> Result<(), String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mwbunch"));
    cmd.arg("--out-dir")
        .arg(dir)
        .args(["--jobs", &jobs.to_string(), "--seed", "42"])
        .args([
            "--set",
            "sim.prefectures=first 6",
            "--set",
            "sim.total_postings=80000",
            "--set",
            "bootstrap_replicates=99",
            "--set",
            "scatter_bins=3",
        ])
        .args(args)
        .env_remove("MWBUNCH_OUT_DIR");
    let out = cmd.output().map_err(|e| e.to_string())?;
    check(out.status.success(), || {
        format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr))
    })?;
    if args == ["print-config"] {
        // The effective config names the temporary directory itself.
        let text = String::from_utf8_lossy(&out.stdout).replace(&dir.display().to_string(), "<dir>");
        std::fs::write(dir.join("print-config.txt"), text).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_type().unwrap().is_file())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect()
}

fn determinism() -> Outcome {
    let commands: [&[&str]; 6] = [
        &["simulate"],
        &["estimate"],
        &["hetero"],
        &["describe"],
        &["macro"],
        &["print-config"],
    ];
    let mut snaps = Vec::new();
    for jobs in [1, 4, 4, 3] {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        for args in commands {
            run_cli(dir.path(), jobs, args)?;
        }
        let occ = dir.path().join("occupation");
        std::fs::create_dir(&occ).map_err(|e| e.to_string())?;
        let input = |f: &str| format!("{f}={}", dir.path().join(format!("{f}.csv")).display());
        run_cli(
            &occ,
            jobs,
            &["--set", &input("contracts"), "--set", &input("schedule"), "--set", "dimension=occupation", "hetero"],
        )?;
        let mut s = snapshot(dir.path());
        for (k, v) in snapshot(&occ) {
            s.insert(format!("occupation/{k}"), v);
        }
        snaps.push(s);
    }
    let files = snaps[0].len();
    for s in &snaps[1..] {
        check(s.keys().eq(snaps[0].keys()), || "different file sets".into())?;
        for (name, bytes) in s {
            check(*bytes == snaps[0][name], || format!("{name} differs between runs"))?;
        }
    }
    Ok(format!("{files} files byte-identical over 4 runs with --jobs 1, 4, 4, 3"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 8] = [
        ("identity suite", identities, Duration::from_secs(1)),
        ("saturation identity", saturation, Duration::from_secs(30)),
        ("oracle recovery", recovery, Duration::from_secs(120)),
        ("placebo coverage", placebo, Duration::from_secs(600)),
        ("clustered vcov oracle", vcov_oracle, Duration::from_secs(1)),
        ("amenity null", amenity_null, Duration::from_secs(120)),
        ("heterogeneity ordering", heterogeneity, Duration::from_secs(300)),
        ("determinism", determinism, Duration::MAX),
    ];
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let mut result = f();
        let took = start.elapsed();
        if result.is_ok() && took > budget {
            result = Err(format!("took {took:.1?}, budget {budget:?}"));
        }
        match result {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail} [{took:.2?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail} [{took:.2?}]", i + 1);
            }
        }
    }
    println!("{} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
