use std::path::Path;
use std::process::{Command, Output};

fn mwbunch(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mwbunch"))
        .arg("--out-dir")
        .arg(dir)
        .args(["--set", "sim.prefectures=first 3", "--set", "sim.total_postings=30000"])
        .args(args)
        .env_remove("MWBUNCH_OUT_DIR")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn simulate_then_estimate_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&mwbunch(dir.path(), &["simulate"])), 0);
    assert_eq!(code(&mwbunch(dir.path(), &["estimate"])), 0);
    for f in ["coefficients.csv", "vcov.csv", "decomposition.csv", "pretrends.csv", "elasticities.csv"] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let dec = std::fs::read_to_string(dir.path().join("decomposition.csv")).unwrap();
    assert!(dec.starts_with("outcome,quantity,l,e,estimate,se\n"));
    assert!(dec.lines().any(|l| l.starts_with("employment_share,delta_b,,")));
    let tmp = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".tmp"))
        .count();
    assert_eq!(tmp, 0);
}

#[test]
fn usage_problems_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&mwbunch(dir.path(), &["--set", "no_such_key=1", "simulate"])), 2);
    assert_eq!(code(&mwbunch(dir.path(), &["--jobs", "0", "simulate"])), 2);
    assert_eq!(code(&mwbunch(&dir.path().join("missing"), &["simulate"])), 2);
    assert_eq!(code(&mwbunch(dir.path(), &["--set", "sim.missing_frac=0.2", "simulate"])), 2);
}

#[test]
fn bad_input_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&mwbunch(dir.path(), &["simulate"])), 0);
    let path = dir.path().join("contracts.csv");
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push_str("bad,13,2023-10-02,notawage,4,500,Retail,09:00,1\n");
    std::fs::write(&path, text).unwrap();
    let out = mwbunch(dir.path(), &["estimate"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("hourly_wage"));
}

#[test]
fn unidentified_design_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&mwbunch(dir.path(), &["simulate"])), 0);
    // Keep only wages below every minimum: no control tail is left to fit.
    let path = dir.path().join("contracts.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    let mut kept = format!("{}\n", lines.next().unwrap());
    for l in lines.filter(|l| l.split(',').nth(3).unwrap().parse::<u32>().unwrap() < 900) {
        kept.push_str(l);
        kept.push('\n');
    }
    std::fs::write(&path, kept).unwrap();
    let out = mwbunch(dir.path(), &["estimate"]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# comment\nscatter_bins = 4\nseed = 5\n").unwrap();
    let out = mwbunch(dir.path(), &["--config", cfg.to_str().unwrap(), "--seed", "9", "print-config"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("\nscatter_bins = 4\n"));
    assert!(text.contains("\nseed = 9\n"));
}
