use std::fs;
use std::path::{Path, PathBuf};

use tempfile::TempDir;

use super::run;

struct Session {
    dir: TempDir,
    count: usize,
}

impl Session {
    fn new() -> Self {
        Session {
            dir: tempfile::tempdir().unwrap(),
            count: 0,
        }
    }

    fn file(&self, name: &str, contents: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        fs::write(&path, contents).unwrap();
        path
    }

    /// Runs with `--out` pointed at a fresh file; returns exit code and output.
    fn run(&mut self, args: &[&str]) -> (i32, String) {
        self.count += 1;
        let out = self.dir.path().join(format!("out{}.txt", self.count));
        let mut full = vec!["triflavor-lgi", "--out", out.to_str().unwrap()];
        full.extend_from_slice(args);
        let code = run(full);
        (code, fs::read_to_string(&out).unwrap_or_default())
    }
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing in\n{text}"))
        .parse()
        .unwrap()
}

fn csv(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn probability_rows() {
    let mut s = Session::new();
    let (code, text) = s.run(&["probability", "--lengths", "0,140.15"]);
    assert_eq!(code, 0);
    assert!(text.starts_with("L_km,P_e,P_mu,P_tau,evaluator\n"));
    let rows = csv(&text);
    assert_eq!(rows[0], ["0", "1", "0", "0", "expansion"]);
    let pe: f64 = rows[1][1].parse().unwrap();
    assert!((pe - 0.984_068_449_822_705_7).abs() < 1e-11);
    let pmu: f64 = rows[1][2].parse().unwrap();
    assert!((pmu - 0.007_522_721_040_475_553).abs() < 1e-13);

    let (code, _) = s.run(&["probability", "--lengths", "-3"]);
    assert_eq!(code, 1);
}

#[test]
fn vacuum_oracle_column_matches_two_flavor_closed_form() {
    // no solar splitting and no matter: P_ee = 1 − sin²2θ13 sin²Δ
    let mut s = Session::new();
    let cfg = s.file("run.toml", "[oscillation]\ndm21_sq = 0.0\n");
    let (code, text) = s.run(&[
        "--vacuum",
        "--config",
        path(&cfg),
        "probability",
        "--lengths",
        "250,900",
        "--both",
    ]);
    assert_eq!(code, 0);
    let s2 = (2.0 * 8.5_f64.to_radians()).sin().powi(2);
    for row in csv(&text) {
        let l: f64 = row[0].parse().unwrap();
        let delta = 2.457e-3 * l * 1.0e3 / 1.973_269_804e-7 / 4.0e9;
        let exact: f64 = row[4].parse().unwrap();
        assert!((exact - (1.0 - s2 * delta.sin().powi(2))).abs() < 1e-10);
    }
}

#[test]
fn correlator_defaults_and_zero_spacing() {
    let mut s = Session::new();
    let (code, text) = s.run(&["correlator"]);
    assert_eq!(code, 0);
    assert!((value(&text, "c_total") - 2.17036).abs() < 5e-4);
    for key in ["c12", "c23", "c34", "c14"] {
        value(&text, key);
    }
    let (_, text) = s.run(&["correlator", "--l1", "512", "--dl", "0"]);
    assert!((value(&text, "c_total") - 2.0).abs() < 1e-12);
}

#[test]
fn oracle_evaluator_switch() {
    let mut s = Session::new();
    let (_, text) = s.run(&["--evaluator", "oracle", "correlator", "--csv"]);
    let row = &csv(&text)[0];
    assert_eq!(row[7], "oracle");
    let c: f64 = row[6].parse().unwrap();
    assert!((c - 2.167_98).abs() < 1e-4, "{c}");
}

#[test]
fn fixed_l1_scan_peaks_near_reference_spacing() {
    let mut s = Session::new();
    let (code, text) = s.run(&["scan", "--fixed-l1", "140.15"]);
    assert_eq!(code, 0);
    let rows = csv(&text);
    assert_eq!(rows.len(), 301);
    let best = rows
        .iter()
        .map(|r| (r[1].parse::<f64>().unwrap(), r[2].parse::<f64>().unwrap()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert!((best.0 - 1255.7).abs() <= 10.0, "{best:?}");
}

#[test]
fn theta13_sweep_is_monotone() {
    let mut s = Session::new();
    let (code, text) = s.run(&["sweep", "--axis", "theta13"]);
    assert_eq!(code, 0);
    assert!(text.starts_with("theta13_deg,l1_star_km,dl_star_km,c_star,refined\n"));
    let c: Vec<f64> = csv(&text).iter().map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(c.len(), 5);
    assert!(c.windows(2).all(|w| w[1] > w[0]), "{c:?}");
}

#[test]
fn sweep_curves_cover_each_value() {
    let mut s = Session::new();
    let (code, text) = s.run(&[
        "sweep",
        "--axis",
        "delta-cp",
        "--values",
        "0,306",
        "--curves-at-l1",
        "140.15",
    ]);
    assert_eq!(code, 0);
    let rows = csv(&text);
    assert_eq!(rows.len(), 2 * 301);
    assert_eq!(rows[0][0], "0");
    assert_eq!(rows[301][0], "306");
}

#[test]
fn simulate_zero_spacing_is_exactly_two() {
    let mut s = Session::new();
    let (code, text) = s.run(&["simulate", "--dl", "0", "--n", "20000", "--seed", "5"]);
    assert_eq!(code, 0);
    assert_eq!(value(&text, "c_total"), 2.0);
    assert_eq!(value(&text, "c_total_err"), 0.0);
    assert_eq!(value(&text, "seed"), 5.0);
    value(&text, "c12.retention_trigger_on_e");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let mut s = Session::new();
    let args = ["simulate", "--n", "50000", "--seed", "17"];
    let (a, b) = (s.run(&args), s.run(&args));
    assert_eq!(a, b);

    let grid = s.file("grid.toml", "[grid]\nl1_steps = 5\ndl_steps = 7\n");
    let args = ["--config", path(&grid), "scan"];
    let (a, b) = (s.run(&args), s.run(&args));
    assert_eq!(a, b);
    assert_eq!(a.1.lines().count(), 36);
}

#[test]
fn exit_codes() {
    let mut s = Session::new();
    assert_eq!(s.run(&["--theta13", "120", "correlator"]).0, 1);
    assert_eq!(s.run(&["correlator", "--l1", "-5"]).0, 1);
    assert_eq!(s.run(&["no-such-command"]).0, 1);

    let bad = s.file("bad.toml", "[oscillation]\nrho = -1.0\n");
    assert_eq!(s.run(&["--config", path(&bad), "correlator"]).0, 1);
    let unknown = s.file("unknown.toml", "[schedule]\nl5 = 3.0\n");
    assert_eq!(s.run(&["--config", path(&unknown), "config"]).0, 1);

    let missing = s.dir.path().join("absent.toml");
    assert_eq!(s.run(&["--config", path(&missing), "config"]).0, 2);
    let code = run(["triflavor-lgi", "--out", "/nonexistent-dir/out.csv", "scan"]);
    assert_eq!(code, 2);
}

#[test]
fn reproduce_reports_every_check() {
    let mut s = Session::new();
    let (code, text) = s.run(&["reproduce"]);
    let verdicts: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("PASS ") || l.starts_with("FAIL "))
        .collect();
    assert_eq!(verdicts.len(), 16);
    assert!(text.contains("PASS full C*"));
    let expected = if verdicts.iter().any(|l| l.starts_with("FAIL")) {
        3
    } else {
        0
    };
    assert_eq!(code, expected);
}

#[test]
fn config_echo_is_normalized() {
    let mut s = Session::new();
    let cfg = s.file(
        "c.toml",
        "[oscillation]\ntheta13_deg = 90.0\ndelta_cp_deg = 180.0\n",
    );
    let (_, text) = s.run(&["--config", path(&cfg), "--alpha", "0.02", "config"]);
    assert!((value(&text, "theta13_rad") - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
    assert!((value(&text, "delta_cp_rad") - std::f64::consts::PI).abs() < 1e-11);
    assert_eq!(value(&text, "alpha"), 0.02);
    assert!((value(&text, "potential_ev") - 1.134e-13).abs() < 1e-24);

    // flags take precedence over the file
    let (_, text) = s.run(&[
        "--config",
        path(&cfg),
        "--theta13",
        "0",
        "--no-cp",
        "config",
    ]);
    assert_eq!(value(&text, "theta13_rad"), 0.0);
    assert_eq!(value(&text, "delta_cp_rad"), 0.0);
}
