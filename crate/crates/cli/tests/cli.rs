use std::io::Write;
use std::process::{Command, Output};

use rspacing::uniform::gamma_approx_estimate;

fn rspacing(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rspacing"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn config(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn quantile_matches_library() {
    let o = rspacing(&["quantile", "--n", "10000", "--r", "5", "--p", "0.5,0.95"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "level,quantile,stderr,method");
    let est = gamma_approx_estimate(1e4, 5).unwrap();
    for (line, p) in lines[1..].iter().zip([0.5, 0.95]) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[3], "gamma-tail");
        assert_eq!(fields[2], "", "deterministic method has no stderr");
        let q: f64 = fields[1].parse().unwrap();
        let expect = est.quantile(p).unwrap();
        // six significant digits in the output
        assert!((q / expect - 1.0).abs() < 1e-5, "{q} vs {expect}");
    }
}

#[test]
fn cdf_json_and_method_override() {
    let o = rspacing(&[
        "cdf", "--n", "20", "--x", "0.1,0.2", "--method", "exact-r1", "--output", "json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert_eq!(row["method"], "exact-r1");
        let x = row["x"].as_f64().unwrap();
        let expect = rspacing::exact::exact_max_spacing_cdf_r1(20, x).unwrap();
        assert!((row["cdf"].as_f64().unwrap() - expect).abs() < 1e-12);
    }
}

#[test]
fn simulate_is_thread_count_independent() {
    let base = [
        "simulate",
        "--n",
        "200",
        "--r",
        "2",
        "--replicates",
        "2000",
        "--seed",
        "7",
    ];
    let one = rspacing(&[&base[..], &["--threads", "1"]].concat());
    let three = rspacing(&[&base[..], &["--threads", "3"]].concat());
    assert!(one.status.success(), "{}", stderr(&one));
    assert_eq!(one.stdout, three.stdout);
    assert!(stderr(&one).contains("seed: 7"));
    let other = rspacing(&[&base[..], &["--seed", "8"]].concat());
    assert_ne!(one.stdout, other.stdout);
}

#[test]
fn density_from_config_file() {
    let f = config(r#"{"kind": "truncated_normal", "mean": 0.5, "sd": 1.0}"#);
    let path = f.path().to_str().unwrap();
    let o = rspacing(&["cdf", "--n", "10000", "--x", "0.001", "--config", path]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o)
        .lines()
        .nth(1)
        .unwrap()
        .ends_with(",density-integral"));
}

#[test]
fn corrupted_config_exits_2() {
    let f = config(r#"{"kind": "truncated_normal", "mean": 0.5"#);
    let o = rspacing(&[
        "cdf",
        "--n",
        "100",
        "--x",
        "0.1",
        "--config",
        f.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("invalid density JSON"),
        "{}",
        stderr(&o)
    );
    let unknown = config(r#"{"kind": "cauchy"}"#);
    let o = rspacing(&[
        "cdf",
        "--n",
        "100",
        "--x",
        "0.1",
        "--config",
        unknown.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(rspacing(&["cdf", "--n", "100"]).status.code(), Some(2));
    assert_eq!(
        rspacing(&["quantile", "--n", "100", "--method", "nope"])
            .status
            .code(),
        Some(2)
    );
    let o = rspacing(&[
        "quantile",
        "--n",
        "100",
        "--density",
        r#"{"kind":"triangle"}"#,
        "--method",
        "gamma-tail",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not applicable"), "{}", stderr(&o));
    assert_eq!(rspacing(&["tables", "--table", "9"]).status.code(), Some(2));
}

#[test]
fn plan_reports_fold() {
    let f = config(
        r#"{"genome_length": 3.2e9, "overlap": 50, "read": {"fixed": {"length": 100}},
            "r": 1, "target_prob": 0.95, "location_density": {"kind": "uniform"}}"#,
    );
    let o = rspacing(&[
        "plan",
        "--config",
        f.path().to_str().unwrap(),
        "--output",
        "json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["fold"], 48);
    assert_eq!(v["method"], "gamma-tail");
    assert!(v["prob_at_n_min"].as_f64().unwrap() >= 0.95);
}

#[test]
fn limit_law_cdf() {
    let o = rspacing(&[
        "limit-law",
        "--law",
        "gumbel",
        "--x",
        "0.6931471805599453",
        "--replicates",
        "20000",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o).lines().nth(1).unwrap().to_string();
    let fields: Vec<f64> = line
        .split(',')
        .take(3)
        .map(|s| s.parse().unwrap())
        .collect();
    let exact = rspacing::check::half_power_product();
    assert!((fields[1] - exact).abs() < 4.0 * fields[2], "{line}");
    let missing = rspacing(&["limit-law", "--law", "weibull", "--x", "1"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn triangle_table_marks_inapplicable_cells() {
    let o = rspacing(&["tables", "--table", "4", "--replicates", "300"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("low replicates"));
    let out = stdout(&o);
    let barbe: Vec<&str> = out.lines().filter(|l| l.starts_with("4,barbe,")).collect();
    assert_eq!(barbe.len(), 10);
    assert!(barbe.iter().all(|l| l.contains(",false,")));
    assert!(barbe
        .iter()
        .filter(|l| l.starts_with("4,barbe,,5,"))
        .all(|l| l.contains(",barbe,,,false,")));
}

#[test]
fn check_warns_on_low_replicates() {
    let o = rspacing(&["check", "--replicates", "200"]);
    assert!(matches!(o.status.code(), Some(0 | 1)));
    assert!(stderr(&o).contains("low replicates"));
    let out = stdout(&o);
    assert!(out.starts_with("check,result,detail"));
    assert_eq!(out.lines().count(), 11);
}
