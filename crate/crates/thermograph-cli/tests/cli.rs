use std::process::{Command, Output};

fn thermograph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thermograph")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Values of a named CSV column.
fn column(csv: &str, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_reader(csv.as_bytes());
    let k = r.headers().unwrap().iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    r.records().map(|rec| rec.unwrap()[k].to_owned()).collect()
}

fn numbers(csv: &str, name: &str) -> Vec<f64> {
    column(csv, name).iter().map(|s| s.parse().unwrap()).collect()
}

#[test]
fn entropy_of_the_unit_rose() {
    let o = thermograph(&["entropy", "--family", "rose:2", "--len", "1,1"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("1.0986122886681098"));
    assert_eq!(lines.next(), Some("1.0986122886681098,1.0986122886681098"));
}

#[test]
fn entropy_of_the_unit_theta() {
    let o = thermograph(&["entropy", "--family", "theta:2", "--len", "1,1,1"]);
    let h: f64 = stdout(&o).lines().next().unwrap().parse().unwrap();
    assert!((h - 2f64.ln()).abs() < 1e-10);
}

#[test]
fn entropy_from_a_graph_file() {
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("barbell.graph");
    std::fs::write(&path, "graph barbell\nv v1\nv v2\ne a v1 v1\ne b v2 v2\ne c v1 v2\nlen a 1\nlen b 1\nlen c 1\n")
        .unwrap();
    let o = thermograph(&["entropy", "--graph-file", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let h: f64 = stdout(&o).lines().next().unwrap().parse().unwrap();
    // With every length 1, x = e^{-h} is the root in (0, 1) of 1 − 2x + x² − 4x⁴.
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let x = 0.5 * (lo + hi);
        if 1.0 - 2.0 * x + x * x - 4.0 * x.powi(4) > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
    }
    assert!((h + lo.ln()).abs() < 1e-10, "{h} vs {}", -lo.ln());
}

#[test]
fn malformed_input_is_a_config_error() {
    for args in [
        &["entropy", "--family", "rose:2", "--len", "1,x"][..],
        &["entropy", "--family", "rose:2", "--len", "1,1,1"],
        &["entropy", "--family", "rose:"],
        &["entropy", "--family", "rose:2"],
        &["entropy", "--graph-file", "/nonexistent/graph"],
        &["experiment", "nope"],
        &["experiment", "thin-part", "--i", "9"],
        &["verify", "--suite", "nope"],
        &["experiment", "shortcut", "--family", "g:2,3"],
    ] {
        let o = thermograph(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn budget_overflow_exit_code() {
    let five = "2,2,2,2,2";
    let o = thermograph(&["experiment", "shortcut", "--family", "g:5,5", "--from", five, "--to", five]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn thread_count_must_be_positive() {
    let o = Command::new(env!("CARGO_BIN_EXE_thermograph"))
        .args(["entropy", "--family", "rose:2", "--len", "1,1"])
        .env("THERMOGRAPH_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn spectral_suite_passes() {
    let o = thermograph(&["verify", "--suite", "spectral", "--samples", "10"]);
    assert!(o.status.success());
    let csv = stdout(&o);
    let status = column(&csv, "status");
    assert!(!status.is_empty() && status.iter().all(|s| s == "pass"));
}

#[test]
fn over_budget_graph_is_skipped_with_reason() {
    let o = thermograph(&["verify", "--suite", "cycles", "--family", "rose:5", "--samples", "2"]);
    assert!(o.status.success());
    let csv = stdout(&o);
    let rows: Vec<&str> = csv.lines().filter(|l| l.contains(",skip,")).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|l| l.contains("budget")));
}

#[test]
fn escape_rose_total_is_finite() {
    let o = thermograph(&["experiment", "escape-rose", "--r", "3", "--tmax", "1-1e-8"]);
    assert!(o.status.success());
    let csv = stdout(&o);
    assert_eq!(column(&csv, "t").last().unwrap().parse::<f64>().unwrap(), 1.0 - 1e-8);
    assert!(numbers(&csv, "length").last().unwrap().is_finite());
}

#[test]
fn thin_part_diameter_decreases() {
    let o = thermograph(&["experiment", "thin-part", "--r", "3", "--i", "1", "--eps", "0.25,0.125"]);
    assert!(o.status.success());
    let u = numbers(&stdout(&o), "upper");
    assert_eq!(u.len(), 2);
    assert!(u[0] > u[1]);
}

#[test]
fn shortcut_total_decreases() {
    let o = thermograph(&["experiment", "shortcut", "--delta", "0.1,0.01"]);
    assert!(o.status.success());
    let t = numbers(&stdout(&o), "total");
    assert!(t[0] > t[1]);
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("shortcut.csv");
    let o = thermograph(&["experiment", "shortcut", "--delta", "0.1", "--out", path.to_str().unwrap()]);
    assert!(o.status.success() && o.stdout.is_empty());
    let direct = thermograph(&["experiment", "shortcut", "--delta", "0.1"]);
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
}

#[test]
fn every_csv_names_its_config_hash() {
    let o = thermograph(&["experiment", "escape-separating", "--tmax", "0.99"]);
    let csv = stdout(&o);
    assert!(csv.lines().next().unwrap().ends_with(",config_hash"));
    let hashes = column(&csv, "config_hash");
    assert!(hashes.iter().all(|h| h.len() == 16 && h == &hashes[0]));
}
