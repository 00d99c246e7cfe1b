//! Flat `key = value` run configuration.
//!
//! Values are layered: built-in defaults, then `MWBUNCH_OUT_DIR`, then the
//! config file, then command-line flags.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mwbunch::decomp::{BootstrapConfig, MwWeighting, WageValuation};
use mwbunch::dgp::{DgpConfig, PrefectureOverride};
use mwbunch::estimator::{EventStudySpec, FitMethod, VcovKind};
use mwbunch::hetero::{Dimension, HeteroOptions};
use mwbunch::model::{
    AmenityDenominator, BinningRule, ClusterLevel, DescribeBins, OutcomeKind, OutcomeOptions, PanelOptions,
    StudyWindow, Weighting, YearMonth,
};

use crate::error::{CliError, CliResult};

pub const OUT_DIR_ENV: &str = "MWBUNCH_OUT_DIR";

/// `(key, default, description)` in print order.
const KEYS: &[(&str, &str, &str)] = &[
    ("out_dir", ".", "output directory (must exist)"),
    ("contracts", "", "contracts CSV; empty means <out_dir>/contracts.csv"),
    ("schedule", "", "minimum wage schedule CSV; empty means <out_dir>/schedule.csv"),
    ("users", "", "monthly users CSV; empty means <out_dir>/users.csv"),
    ("seed", "20231001", "seed for simulation and bootstrap"),
    ("window_start", "2023-04", "first study month"),
    ("window_end", "2024-03", "last study month"),
    ("event_month", "2023-10", "month the new minimum wages take effect"),
    ("bin_width", "10", "wage bin width, JPY"),
    ("group_width", "100", "exposure band width, JPY"),
    ("max_e", "3", "highest finite exposure band"),
    ("spill_offset", "400", "distance above the new minimum where the control tail starts"),
    ("wage_ceiling", "5000", "wages above this are flagged, not dropped"),
    ("outcome", "employment_share", "employment_share | vacancy_share | reimb_amount | reimb_provision"),
    ("raw_outcome", "false", "use raw counts instead of shares"),
    ("amenity_denominator", "postings", "postings | cell_matches"),
    ("weighting", "unweighted", "unweighted | employment"),
    ("cluster", "wage_bin", "wage_bin | relative_bin | prefecture"),
    ("vcov", "cr1", "cr0 | cr1 | hc1"),
    ("method", "cell_means", "cell_means | dummy_ols"),
    ("reference_l", "-1", "omitted event time"),
    ("mw_weighting", "postings", "averaging of the minimum wage change: postings | unweighted"),
    ("wage_valuation", "upper_edge", "wage assigned to a band: upper_edge | midpoint"),
    ("bootstrap_replicates", "0", "cluster bootstrap replicates; 0 disables"),
    ("bootstrap_max_redraws", "1000", "resamples discarded before giving up"),
    ("dimension", "prefecture", "hetero strata: prefecture | occupation | timeslot"),
    ("min_cell_records", "30", "records needed in every (band, month) cell of a stratum"),
    ("kaitz_month", "", "month for the Kaitz median; empty means event_month"),
    ("kaitz_reciprocal", "false", "also report median / minimum"),
    ("scatter_bins", "10", "equal-count bins of the Kaitz scatter"),
    ("describe_month_a", "", "first month of the change grids; empty means the month before the event"),
    ("describe_month_b", "", "second month of the change grids; empty means event_month"),
    ("describe_prefecture", "", "restrict descriptive tables to one prefecture"),
    ("describe_hours_width", "1", "hours bin width"),
    ("describe_reimb_width", "100", "reimbursement bin width, JPY"),
    ("sim.prefectures", "all", "all | first N | comma-separated ids"),
    ("sim.total_postings", "1000000", "expected postings over the window"),
    ("sim.delta_b", "-0.03", "target per-bin change below the new minimum"),
    ("sim.delta_a", "0.012", "target per-bin change in the first band above it"),
    ("sim.missing_frac", "", "explicit m; overrides the targets together with sim.excess_frac"),
    ("sim.excess_frac", "", "explicit x"),
    ("sim.exact_mw_share", "0.7", "share of relocated jobs placed exactly at the minimum"),
    ("sim.match_prob", "0.8", "probability a posting is filled"),
    ("sim.mass_at_mw", "0.35", "point mass at the old minimum"),
    ("sim.below_mw_mass", "0.25", "uniform mass between old and new minimum"),
    ("sim.upper_shift", "0.1", "log-location of the upper tail above ln(new minimum)"),
    ("sim.upper_scale", "0.2", "log-scale of the upper tail"),
    ("sim.wage_cap", "2000", "highest simulated wage"),
    ("sim.reimb_zero_prob", "0.3", "share of postings without reimbursement"),
    ("sim.reimb_500_prob", "0.45", "share of postings reimbursing exactly 500"),
    ("sim.users_per_posting", "0.6", "registered users per posting"),
    ("sim.posting_growth", "0", "monthly growth of posting volume"),
    ("sim.occupation_missing", "", "nine comma-separated m values by occupation"),
];

/// Prefix of per-prefecture generator overrides, e.g.
/// `sim.override.13 = missing=0.5,excess=0.1,upper_shift=0.3`.
const OVERRIDE_PREFIX: &str = "sim.override.";

#[derive(Debug, Clone)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            values: KEYS.iter().map(|(k, v, _)| (k.to_string(), v.to_string())).collect(),
        }
    }
}

impl Settings {
    pub fn from_env() -> Self {
        let mut s = Self::default();
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            if !dir.is_empty() {
                s.values.insert("out_dir".into(), dir);
            }
        }
        s
    }

    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let key = key.trim();
        let known = KEYS.iter().any(|(k, _, _)| *k == key)
            || key.strip_prefix(OVERRIDE_PREFIX).is_some_and(|id| id.parse::<u32>().is_ok());
        if !known {
            return Err(CliError::Usage(format!("unknown config key `{key}`")));
        }
        self.values.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    /// `KEY=VALUE` from the command line.
    pub fn set_pair(&mut self, pair: &str) -> CliResult<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected KEY=VALUE, got `{pair}`")))?;
        self.set(k, v)
    }

    pub fn load_file(&mut self, path: &Path) -> CliResult<()> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("{}:{}: expected `key = value`", path.display(), i + 1))
            })?;
            self.set(k, v)
                .map_err(|e| CliError::Usage(format!("{}:{}: {e}", path.display(), i + 1)))?;
        }
        Ok(())
    }

    fn get(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    /// Every effective setting, one `key = value` per line, with comments.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, _, doc) in KEYS {
            let _ = writeln!(out, "# {doc}\n{k} = {}", self.get(k));
        }
        for (k, v) in self.values.range(OVERRIDE_PREFIX.to_string()..) {
            if k.starts_with(OVERRIDE_PREFIX) {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        out
    }

    fn parse<T: FromStr>(&self, key: &str) -> CliResult<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.get(key);
        raw.parse()
            .map_err(|e| CliError::Usage(format!("config `{key}` = `{raw}`: {e}")))
    }

    fn optional<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if self.get(key).is_empty() {
            Ok(None)
        } else {
            self.parse(key).map(Some)
        }
    }

    fn positive(&self, key: &str) -> CliResult<i32> {
        let v: i32 = self.parse(key)?;
        if v <= 0 {
            return Err(CliError::Usage(format!("config `{key}` must be positive")));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    pub contracts: PathBuf,
    pub schedule: PathBuf,
    pub users: PathBuf,
    pub window: StudyWindow,
    pub rule: BinningRule,
    pub panel: PanelOptions,
    pub outcome: OutcomeKind,
    pub outcome_opts: OutcomeOptions,
    pub spec: EventStudySpec,
    pub mw_weighting: MwWeighting,
    pub wage_valuation: WageValuation,
    /// `None` when the bootstrap is disabled.
    pub bootstrap: Option<BootstrapConfig>,
    pub dimension: Dimension,
    pub min_cell_records: u64,
    pub kaitz_t: usize,
    pub kaitz_reciprocal: bool,
    pub scatter_bins: usize,
    pub describe_t: (usize, usize),
    pub describe_prefecture: Option<u32>,
    pub describe_bins: DescribeBins,
    pub dgp: DgpConfig,
}

impl RunConfig {
    pub fn from_settings(s: &Settings) -> CliResult<Self> {
        let out_dir = PathBuf::from(s.get("out_dir"));
        let input = |key: &str, file: &str| {
            let raw = s.get(key);
            if raw.is_empty() {
                out_dir.join(file)
            } else {
                PathBuf::from(raw)
            }
        };
        let (contracts, schedule, users) = (
            input("contracts", "contracts.csv"),
            input("schedule", "schedule.csv"),
            input("users", "users.csv"),
        );

        let start: YearMonth = s.parse("window_start")?;
        let end: YearMonth = s.parse("window_end")?;
        let event: YearMonth = s.parse("event_month")?;
        let months = end.months_since(start) + 1;
        let event_index = event.months_since(start) + 1;
        if months < 1 || event_index < 1 || event_index > months {
            return Err(CliError::Usage(format!(
                "event month {event} must lie in the window {start}..{end}"
            )));
        }
        let window = StudyWindow::new(start, months as usize, event_index as usize)?;
        let month_index = |key: &str, default: usize| -> CliResult<usize> {
            match s.optional::<YearMonth>(key)? {
                None => Ok(default),
                Some(m) => window
                    .index_of_month(m)
                    .ok_or_else(|| CliError::Usage(format!("config `{key}` = {m} is outside the window"))),
            }
        };

        let rule = BinningRule {
            bin_width: s.positive("bin_width")?,
            group_width: s.positive("group_width")?,
            max_e: s.positive("max_e")?,
            spill_offset: s.positive("spill_offset")?,
        };
        rule.validate()?;

        let outcome_opts = OutcomeOptions {
            amenity_denominator: s.parse::<AmenityDenominator>("amenity_denominator")?,
            weighting: s.parse::<Weighting>("weighting")?,
            cluster: s.parse::<ClusterLevel>("cluster")?,
            raw: s.parse("raw_outcome")?,
        };
        let mut spec = EventStudySpec::new(window, &rule);
        spec.method = s.parse::<FitMethod>("method")?;
        spec.vcov = s.parse::<VcovKind>("vcov")?;
        spec.reference_l = s.parse("reference_l")?;
        spec.layout()?;

        let seed: u64 = s.parse("seed")?;
        let replicates: usize = s.parse("bootstrap_replicates")?;
        let bootstrap = if replicates > 0 {
            Some(BootstrapConfig {
                replicates,
                seed,
                max_redraws: s.parse("bootstrap_max_redraws")?,
            })
        } else {
            None
        };

        let describe_bins = DescribeBins {
            hours: s.parse("describe_hours_width")?,
            reimbursement: s.parse("describe_reimb_width")?,
            ..DescribeBins::default()
        };
        if !(describe_bins.hours > 0.0 && describe_bins.reimbursement > 0.0) {
            return Err(CliError::Usage("descriptive bin widths must be positive".into()));
        }

        Ok(Self {
            contracts,
            schedule,
            users,
            window,
            rule,
            panel: PanelOptions {
                wage_ceiling: s.parse("wage_ceiling")?,
            },
            outcome: s.parse("outcome")?,
            outcome_opts,
            spec,
            mw_weighting: s.parse("mw_weighting")?,
            wage_valuation: s.parse("wage_valuation")?,
            bootstrap,
            dimension: s.parse("dimension")?,
            min_cell_records: s.parse("min_cell_records")?,
            kaitz_t: month_index("kaitz_month", window.event_index)?,
            kaitz_reciprocal: s.parse("kaitz_reciprocal")?,
            scatter_bins: s.parse("scatter_bins")?,
            describe_t: (
                month_index("describe_month_a", window.event_index - 1)?,
                month_index("describe_month_b", window.event_index)?,
            ),
            describe_prefecture: s.optional("describe_prefecture")?,
            describe_bins,
            dgp: dgp_config(s, seed, window, rule)?,
            out_dir,
        })
    }

    pub fn hetero_options(&self) -> HeteroOptions {
        HeteroOptions {
            rule: self.rule,
            spec: self.spec.clone(),
            outcome: self.outcome,
            outcome_opts: self.outcome_opts,
            panel_opts: self.panel,
            min_cell_records: self.min_cell_records,
        }
    }
}

fn dgp_config(s: &Settings, seed: u64, window: StudyWindow, rule: BinningRule) -> CliResult<DgpConfig> {
    let mut c = DgpConfig {
        seed,
        window,
        rule,
        ..DgpConfig::default()
    };
    let all = DgpConfig::japan_prefectures(1.0);
    let pick = s.get("sim.prefectures");
    c.prefectures = if pick == "all" {
        all
    } else if let Some(n) = pick.strip_prefix("first ").map(str::trim) {
        let n: usize = n
            .parse()
            .map_err(|_| CliError::Usage(format!("sim.prefectures: bad count `{n}`")))?;
        all.into_iter().take(n).collect()
    } else {
        let ids = pick
            .split(',')
            .map(|x| x.trim().parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| CliError::Usage(format!("sim.prefectures: bad id list `{pick}`")))?;
        all.into_iter().filter(|p| ids.contains(&p.id)).collect()
    };
    c.exact_mw_share = s.parse("sim.exact_mw_share")?;
    c.match_prob = s.parse("sim.match_prob")?;
    c.wage.mass_at_mw = s.parse("sim.mass_at_mw")?;
    c.wage.below_mw_mass = s.parse("sim.below_mw_mass")?;
    c.wage.upper_shift = s.parse("sim.upper_shift")?;
    c.wage.upper_scale = s.parse("sim.upper_scale")?;
    c.wage.wage_cap = s.parse("sim.wage_cap")?;
    c.reimbursement.zero_prob = s.parse("sim.reimb_zero_prob")?;
    c.reimbursement.point_mass_500_prob = s.parse("sim.reimb_500_prob")?;
    c.users_per_posting = s.parse("sim.users_per_posting")?;
    c.posting_growth = s.parse("sim.posting_growth")?;
    c.set_total_postings(s.parse("sim.total_postings")?);

    match (s.optional::<f64>("sim.missing_frac")?, s.optional::<f64>("sim.excess_frac")?) {
        (Some(m), Some(x)) => {
            c.missing_frac = m;
            c.excess_frac = x;
        }
        (None, None) => c.calibrate(s.parse("sim.delta_b")?, s.parse("sim.delta_a")?)?,
        _ => {
            return Err(CliError::Usage(
                "set both sim.missing_frac and sim.excess_frac, or neither".into(),
            ))
        }
    }

    let occ = s.get("sim.occupation_missing");
    if !occ.is_empty() {
        let v = occ
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| CliError::Usage(format!("sim.occupation_missing: bad list `{occ}`")))?;
        let arr: [f64; 9] = v
            .try_into()
            .map_err(|_| CliError::Usage("sim.occupation_missing needs nine values".into()))?;
        c.occupation_missing = Some(arr);
    }

    for (k, v) in &s.values {
        let Some(id) = k.strip_prefix(OVERRIDE_PREFIX) else {
            continue;
        };
        let id: u32 = id.parse().map_err(|_| CliError::Usage(format!("bad override key `{k}`")))?;
        c.overrides.insert(id, parse_override(k, v)?);
    }
    c.validate()?;
    Ok(c)
}

fn parse_override(key: &str, raw: &str) -> CliResult<PrefectureOverride> {
    let mut o = PrefectureOverride::default();
    for part in raw.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || CliError::Usage(format!("`{key}`: cannot read `{part}`"));
        let (name, value) = part.split_once('=').ok_or_else(bad)?;
        let value: f64 = value.trim().parse().map_err(|_| bad())?;
        match name.trim() {
            "missing" => o.missing_frac = Some(value),
            "excess" => o.excess_frac = Some(value),
            "upper_shift" => o.upper_shift = Some(value),
            _ => return Err(bad()),
        }
    }
    Ok(o)
}
