//! Subcommand bodies.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use mwbunch::decomp::{
    aggregate, attach_bootstrap, elasticities, elasticity_inputs, DecompScope, DecompositionResult, Estimate,
};
use mwbunch::dgp::generate;
use mwbunch::estimator::{fit_event_study, fit_two_way_fe, pretrend_report, weekly_earnings};
use mwbunch::hetero::{binned_scatter, kaitz_index, kaitz_points, ols_slope, run_stratified, Dimension};
use mwbunch::model::io::{read_contracts, read_schedule, read_users, write_contracts, write_schedule, write_users};
use mwbunch::model::{
    build_panel, change_grid, distribution_table, macro_metrics, outcome_series, Axis, ContractRecord,
    MinWageSchedule, OutcomeKind,
};
use mwbunch::EventStudyFit64;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{num, opt, text, OutDir};

fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read<T>(path: &Path, f: impl FnOnce(File) -> mwbunch::Result<T>) -> CliResult<T> {
    f(open(path)?).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn load(cfg: &RunConfig) -> CliResult<(Vec<ContractRecord>, MinWageSchedule)> {
    let records = read(&cfg.contracts, read_contracts)?;
    let schedule = read(&cfg.schedule, read_schedule)?;
    Ok((records, schedule))
}

fn scope_of(kind: OutcomeKind) -> DecompScope {
    if kind.is_amenity() {
        DecompScope::Amenity
    } else {
        DecompScope::Employment
    }
}

pub fn simulate(cfg: &RunConfig, out: &mut OutDir) -> CliResult<()> {
    let sim = generate(&cfg.dgp)?;
    out.write_with("contracts.csv", |b| write_contracts(b, &sim.records))?;
    out.write_with("schedule.csv", |b| write_schedule(b, &sim.schedule))?;
    out.write_with("users.csv", |b| write_users(b, &sim.users))?;

    let t = &sim.truth;
    let mut rows = vec![
        vec![text("delta_a"), String::new(), String::new(), String::new(), num(t.delta_a)],
        vec![text("delta_b"), String::new(), String::new(), String::new(), num(t.delta_b)],
        vec![text("delta_e"), String::new(), String::new(), String::new(), num(t.delta_e)],
    ];
    for (e, v) in &t.delta_a_e {
        rows.push(vec![text("delta_a_e"), text(e), String::new(), String::new(), num(*v)]);
    }
    for (l, e, v) in &t.mu {
        rows.push(vec![text("mu"), text(e), text(l), String::new(), num(*v)]);
    }
    for c in &t.cell_means {
        rows.push(vec![text("cell_mean"), text(c.group), String::new(), text(c.t), num(c.mean)]);
    }
    out.table("ground_truth.csv", &["quantity", "e", "l", "t", "value"], rows)
}

fn coefficient_rows(fit: &EventStudyFit64, prefix: &[String]) -> Vec<Vec<String>> {
    fit.mu_grid()
        .into_iter()
        .map(|c| {
            let z = if c.se > 0.0 { num(c.estimate / c.se) } else { String::new() };
            let mut row = prefix.to_vec();
            row.extend([text(c.e), text(c.l), num(c.estimate), num(c.se), z]);
            row
        })
        .collect()
}

fn decomposition_rows(d: &DecompositionResult<f64>, prefix: &[String]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    let mut push = |q: &str, l: String, e: String, v: &Estimate<f64>| {
        let mut row = prefix.to_vec();
        row.extend([text(q), l, e, num(v.estimate), num(v.se)]);
        rows.push(row);
    };
    push("delta_a", String::new(), String::new(), &d.delta_a);
    if let Some(b) = &d.delta_b {
        push("delta_b", String::new(), String::new(), b);
    }
    push("delta_e", String::new(), String::new(), &d.delta_e);
    for (i, &l) in d.post_periods.iter().enumerate() {
        push("delta_a_l", text(l), String::new(), &d.delta_a_l[i]);
        if let Some(b) = d.delta_b_l.get(i) {
            push("delta_b_l", text(l), String::new(), b);
        }
        push("delta_e_l", text(l), String::new(), &d.delta_e_l[i]);
    }
    for (e, v) in &d.delta_a_e {
        push("delta_a_e", String::new(), text(e), v);
    }
    rows
}

pub fn estimate(cfg: &RunConfig, out: &mut OutDir) -> CliResult<()> {
    let (records, schedule) = load(cfg)?;
    let panel = build_panel(&records, &schedule, &cfg.window, &cfg.rule, &cfg.panel)?;
    let series = outcome_series::<f64>(&panel, cfg.outcome, &cfg.outcome_opts)?;
    let fit = fit_event_study(&series.observations, &cfg.spec)?;
    let decomposition = aggregate(&fit, scope_of(cfg.outcome))?;
    let pretrends = pretrend_report(&fit)?;
    let label = text(cfg.outcome);

    out.table(
        "coefficients.csv",
        &["outcome", "e", "l", "estimate", "se", "z"],
        coefficient_rows(&fit, std::slice::from_ref(&label)),
    )?;

    let names = fit.layout.column_labels();
    let k = names.len();
    let mut vrows = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            vrows.push(vec![names[i].clone(), names[j].clone(), num(fit.vcov[(i, j)])]);
        }
    }
    out.table("vcov.csv", &["i", "j", "value"], vrows)?;

    out.table(
        "decomposition.csv",
        &["outcome", "quantity", "l", "e", "estimate", "se"],
        decomposition_rows(&decomposition, std::slice::from_ref(&label)),
    )?;

    let mut prows: Vec<Vec<String>> = pretrends
        .rows
        .iter()
        .map(|r| {
            vec![
                text("cell"),
                text(r.l),
                text(r.e),
                num(r.estimate),
                num(r.se),
                opt(r.z),
                String::new(),
                opt(r.p_value),
            ]
        })
        .collect();
    prows.push(vec![
        text("joint_wald"),
        String::new(),
        String::new(),
        num(pretrends.wald),
        String::new(),
        String::new(),
        text(pretrends.df),
        opt(pretrends.p_value),
    ]);
    out.table(
        "pretrends.csv",
        &["test", "l", "e", "estimate", "se", "z", "df", "p_value"],
        prows,
    )?;

    if cfg.outcome == OutcomeKind::EmploymentShare && !cfg.outcome_opts.raw {
        let inputs = elasticity_inputs::<f64>(&panel, &schedule, cfg.mw_weighting, cfg.wage_valuation)?;
        let mut report = elasticities(&fit, &inputs)?;
        if let Some(b) = &cfg.bootstrap {
            attach_bootstrap(&mut report, &series.observations, &cfg.spec, b, &inputs)?;
        }
        let mut erows = Vec::new();
        for (name, stat) in report.rows() {
            erows.push(vec![text(name), opt(stat.estimate), opt(stat.se_delta), text("delta")]);
            if cfg.bootstrap.is_some() {
                erows.push(vec![text(name), opt(stat.estimate), opt(stat.se_bootstrap), text("bootstrap")]);
            }
        }
        out.table("elasticities.csv", &["quantity", "estimate", "se", "method"], erows)?;
    }

    let weekly = weekly_earnings(&records, &cfg.window);
    let twfe = fit_two_way_fe(&weekly)?;
    let wrows = twfe
        .time_effects
        .iter()
        .map(|t| vec![text(t.time), num(t.estimate), num(t.se), num(t.ci_low), num(t.ci_high)])
        .collect();
    out.table(
        "earnings_weekly.csv",
        &["week", "estimate", "se", "ci_low", "ci_high"],
        wrows,
    )
}

pub fn hetero(cfg: &RunConfig, out: &mut OutDir) -> CliResult<()> {
    let (records, schedule) = load(cfg)?;
    let run = run_stratified::<f64>(&records, &schedule, &cfg.window, cfg.dimension, &cfg.hetero_options())?;
    let dim = text(cfg.dimension.label());

    let mut crows = Vec::new();
    let mut drows = Vec::new();
    for r in &run.results {
        let prefix = [dim.clone(), text(r.id)];
        crows.extend(coefficient_rows(&r.fit, &prefix));
        let d = &r.decomposition;
        let (b, bse) = d.delta_b.map_or((String::new(), String::new()), |b| (num(b.estimate), num(b.se)));
        drows.push(vec![
            dim.clone(),
            text(r.id),
            text(r.n_records),
            num(d.delta_a.estimate),
            num(d.delta_a.se),
            b,
            bse,
            num(d.delta_e.estimate),
            num(d.delta_e.se),
        ]);
    }
    out.table(
        "strata_coefficients.csv",
        &["dimension", "stratum", "e", "l", "estimate", "se", "z"],
        crows,
    )?;
    out.table(
        "strata_decomposition.csv",
        &[
            "dimension",
            "stratum",
            "n_records",
            "delta_a",
            "se_delta_a",
            "delta_b",
            "se_delta_b",
            "delta_e",
            "se_delta_e",
        ],
        drows,
    )?;
    let srows = run
        .skipped
        .iter()
        .map(|s| vec![dim.clone(), text(s.id), text(s.n_records), s.reason.clone()])
        .collect();
    out.table("strata_skipped.csv", &["dimension", "stratum", "n_records", "reason"], srows)?;

    if cfg.dimension != Dimension::Prefecture {
        return Ok(());
    }
    let kaitz = kaitz_index(&records, &schedule, &cfg.window, cfg.kaitz_t);
    let points = kaitz_points(&run, &kaitz);
    let by_pref: BTreeMap<u32, _> = points.iter().map(|p| (p.prefecture_id, *p)).collect();
    let mut krows = Vec::new();
    for (p, (median, k)) in &kaitz.values {
        let inverse = if cfg.kaitz_reciprocal { num(1.0 / k) } else { String::new() };
        let (a, b, e) = by_pref
            .get(p)
            .map_or((String::new(), String::new(), String::new()), |x| {
                (num(x.delta_a), num(x.delta_b), num(x.delta_e))
            });
        krows.push(vec![text(p), text(median), num(*k), inverse, a, b, e, String::new()]);
    }
    for (p, reason) in &kaitz.missing {
        let mut row = vec![text(p)];
        row.extend(std::iter::repeat_n(String::new(), 6));
        row.push(reason.clone());
        krows.push(row);
    }
    krows.sort_by_key(|r| r[0].parse::<u32>().unwrap_or(u32::MAX));
    out.table(
        "kaitz.csv",
        &["prefecture_id", "median_wage", "kaitz", "median_to_mw", "delta_a", "delta_b", "delta_e", "note"],
        krows,
    )?;

    if points.len() < cfg.scatter_bins {
        eprintln!(
            "note: {} prefectures with estimates, fewer than scatter_bins = {}; scatter skipped",
            points.len(),
            cfg.scatter_bins
        );
        return Ok(());
    }
    let bins = binned_scatter(&points, cfg.scatter_bins)?;
    let brows = bins
        .iter()
        .enumerate()
        .map(|(i, b)| {
            vec![
                text(i + 1),
                num(b.center),
                num(b.delta_a),
                num(b.delta_b),
                num(b.delta_e),
                text(b.count),
            ]
        })
        .collect();
    out.table(
        "scatter.csv",
        &["bin", "kaitz", "delta_a", "delta_b", "delta_e", "count"],
        brows,
    )?;

    let kx: Vec<f64> = points.iter().map(|p| p.kaitz).collect();
    let bx: Vec<f64> = bins.iter().map(|b| b.center).collect();
    let series: [(&str, Vec<f64>, Vec<f64>); 3] = [
        (
            "delta_a",
            points.iter().map(|p| p.delta_a).collect(),
            bins.iter().map(|b| b.delta_a).collect(),
        ),
        (
            "delta_b",
            points.iter().map(|p| p.delta_b).collect(),
            bins.iter().map(|b| b.delta_b).collect(),
        ),
        (
            "delta_e",
            points.iter().map(|p| p.delta_e).collect(),
            bins.iter().map(|b| b.delta_e).collect(),
        ),
    ];
    let lrows = series
        .iter()
        .map(|(name, py, by)| vec![text(name), opt(ols_slope(&kx, py)), opt(ols_slope(&bx, by))])
        .collect();
    out.table("scatter_slopes.csv", &["quantity", "slope_points", "slope_bins"], lrows)
}

pub fn describe(cfg: &RunConfig, out: &mut OutDir) -> CliResult<()> {
    let records = read(&cfg.contracts, read_contracts)?;
    let w = &cfg.window;
    let mut rows = Vec::new();
    for axis in [Axis::Wage, Axis::Hours, Axis::Reimbursement] {
        for r in distribution_table(&records, w, axis, &cfg.describe_bins, cfg.describe_prefecture) {
            rows.push(vec![
                text(axis),
                num(r.bin),
                text(w.month_at(r.t)),
                text(r.t),
                text(r.employment),
            ]);
        }
    }
    out.table("distribution.csv", &["axis", "bin", "month", "t", "employment"], rows)?;

    let (ta, tb) = cfg.describe_t;
    for (axis, name) in [(Axis::Hours, "change_hours.csv"), (Axis::Reimbursement, "change_reimbursement.csv")] {
        let grid = change_grid(&records, w, axis, ta, tb, &cfg.describe_bins, cfg.describe_prefecture)?;
        let rows = grid
            .iter()
            .map(|c| {
                vec![
                    num(c.wage_bin),
                    num(c.other_bin),
                    text(c.count_a),
                    text(c.count_b),
                    text(c.diff),
                ]
            })
            .collect();
        out.table(name, &["wage_bin", axis.label(), "count_a", "count_b", "diff"], rows)?;
    }
    Ok(())
}

pub fn macro_series(cfg: &RunConfig, out: &mut OutDir) -> CliResult<()> {
    let (records, schedule) = load(cfg)?;
    let users = read(&cfg.users, read_users)?;
    let w = &cfg.window;
    let users: BTreeMap<usize, u64> = users
        .into_iter()
        .filter_map(|(m, u)| w.index_of_month(m).map(|t| (t, u)))
        .collect();
    let panel = build_panel(&records, &schedule, w, &cfg.rule, &cfg.panel)?;
    let series = macro_metrics(&panel.totals, &users, w)?;
    let rows = series
        .iter()
        .map(|m| {
            vec![
                text(w.month_at(m.t)),
                text(m.users),
                text(m.vacancies),
                text(m.hires),
                opt(m.tightness),
                opt(m.job_finding),
                opt(m.worker_finding),
            ]
        })
        .collect();
    out.table(
        "macro.csv",
        &["month", "users", "vacancies", "hires", "tightness", "job_finding", "worker_finding"],
        rows,
    )
}
