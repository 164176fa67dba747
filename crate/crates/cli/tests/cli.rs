use std::process::{Command, Output};

use mlexp::{h_series, principal_root, ComplexScalar, TruncationPolicy};
use mlexp_cli::{run_argv, CSV_HEADER, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};
use proptest::prelude::*;

fn mlexp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlexp"))
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

#[test]
fn eval_examples() {
    let o = mlexp(&[
        "eval", "--n", "1", "--m", "1", "--lambda", "1", "--x", "1", "--method", "repr", "--x0", "0.3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().next(), Some("2.718281828459045"));

    let o = mlexp(&["eval", "--n", "2", "--m", "1", "--lambda", "0", "--x", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("0.28209479177387814"));
}

#[test]
fn complex_and_negative_parameters() {
    let o = mlexp(&["eval", "--n", "3", "--m", "2", "--lambda", "-0.5+1.5i", "--x", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let first = stdout(&o).lines().next().unwrap().to_string();
    assert!(first.ends_with('i'), "{first}");
}

#[test]
fn exit_codes() {
    // usage errors name the flag
    for (args, flag) in [
        (vec!["eval", "--n", "2", "--m", "2", "--x", "1"], "--m/--n"),
        (vec!["eval", "--x", "1", "--grid", "1:2"], "--grid"),
        (vec!["table", "--grid", "3:1:5"], "--grid"),
        (vec!["eval", "--x", "1", "--nope"], "--nope"),
        (vec!["eval", "--x", "1", "--method", "magic"], "--method"),
        (vec!["validate", "--suite", "everything"], "--suite"),
    ] {
        let o = mlexp(&args);
        assert_eq!(o.status.code(), Some(EXIT_USAGE), "{args:?}");
        assert!(stderr(&o).contains(flag), "{args:?}: {}", stderr(&o));
    }
    let o = mlexp(&[]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));

    // non-converged evaluation
    let o = mlexp(&["eval", "--n", "2", "--lambda", "3", "--x", "10", "--max-terms", "10"]);
    assert_eq!(o.status.code(), Some(EXIT_FAILURE));
    assert!(stderr(&o).contains("did not converge"));

    // numerical overflow
    let o = mlexp(&["eval", "--lambda", "800", "--x", "1", "--method", "repr", "--x0", "0.5"]);
    assert_eq!(o.status.code(), Some(EXIT_FAILURE), "{}", stdout(&o));

    let o = mlexp(&["--version"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
}

#[test]
fn validate_all_json() {
    let o = mlexp(&["validate", "--suite", "all", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["diagnostics"]["passed"], true);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| r["passed"] == true));
    assert!(v["params"]["policy"]["rel_tol"].is_number());
}

#[test]
fn failing_check_is_named() {
    let o = mlexp(&["validate", "--suite", "decomposition", "--max-terms", "10"]);
    assert_eq!(o.status.code(), Some(EXIT_FAILURE));
    assert!(stderr(&o).contains("check failed: decomposition"), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("FAIL decomposition"));
}

#[test]
fn csv_round_trip_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    let o = mlexp(&[
        "table",
        "--n",
        "3",
        "--m",
        "2",
        "--lambda",
        "0.7-0.4i",
        "--grid",
        "0.25:6:37",
        "--method",
        "repr",
        "--x0",
        "0.2",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());

    let mut rd = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
    let mut count = 0;
    for rec in rd.records() {
        let rec = rec.unwrap();
        let lambda = format!("{}{:+}i", &rec[4], rec[5].parse::<f64>().unwrap());
        let again = run_argv([
            "mlexp", "eval", "--n", &rec[2], "--m", &rec[3], "--lambda", &lambda, "--x", &rec[0], "--x0", &rec[1],
            "--method", &rec[6], "--format", "csv",
        ]);
        assert_eq!(again.code, EXIT_OK, "{}", again.messages);
        let mut rd2 = csv::Reader::from_reader(again.output.as_bytes());
        let row = rd2.records().next().unwrap().unwrap();
        let bits = |s: &str| s.parse::<f64>().unwrap().to_bits();
        assert_eq!(bits(&row[7]), bits(&rec[7]));
        assert_eq!(bits(&row[8]), bits(&rec[8]));
        assert_eq!(&row[9], &rec[9]);
        count += 1;
    }
    assert_eq!(count, 37);
}

#[test]
fn study_reports_order() {
    let o = mlexp(&[
        "study",
        "--n",
        "2",
        "--x",
        "2",
        "--x0-seq",
        "0.4,0.2,0.1,0.05",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    let order = v["diagnostics"]["estimated_order"].as_f64().unwrap();
    assert!((1.8..=2.2).contains(&order), "{order}");
}

#[test]
fn table_text_and_json() {
    let o = mlexp(&["table", "--n", "2", "--rho", "-0.7", "--grid", "0.5:2:4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 6);

    let o = mlexp(&["table", "--n", "2", "--grid", "0.5:2:4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let xs: Vec<f64> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["x"].as_f64().unwrap())
        .collect();
    assert_eq!(xs, vec![0.5, 1.0, 1.5, 2.0]);
}

fn eval_value(method: &str, n: u32, m: u32, lambda: &str, x: f64) -> (f64, f64) {
    let out = run_argv([
        "mlexp".to_string(),
        "eval".into(),
        "--n".into(),
        n.to_string(),
        "--m".into(),
        m.to_string(),
        "--lambda".into(),
        lambda.to_string(),
        "--x".into(),
        x.to_string(),
        "--method".into(),
        method.into(),
        "--format".into(),
        "csv".into(),
    ]);
    assert_eq!(out.code, EXIT_OK, "{}", out.messages);
    let mut rd = csv::Reader::from_reader(out.output.as_bytes());
    let row = rd.records().next().unwrap().unwrap();
    (row[7].parse().unwrap(), row[8].parse().unwrap())
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn series_and_decomposition_agree(
        n in 1u32..=6,
        m_seed in 1u32..=6,
        re in -1.5f64..1.5,
        im in -1.5f64..1.5,
        x in 0.05f64..4.0,
    ) {
        let m = (1..=n).rev().find(|&m| m <= m_seed && gcd(m, n) == 1).unwrap_or(1);
        // Both routes round each term to double precision, so agreement is
        // limited to about eps * sum|terms| / |h|. Keep to inputs where that
        // is well below the tolerance and the series fits the term budget.
        let policy = TruncationPolicy::default();
        let rho = principal_root(ComplexScalar::new(re, im), m).unwrap();
        let h = h_series(x, rho, n, &policy).unwrap();
        let magnitude = h_series(x, ComplexScalar::new(rho.norm(), 0.0), n, &policy).unwrap();
        prop_assume!(h.converged && magnitude.value.re <= 1e3 * h.value.norm());
        let lambda = format!("{re}{im:+}i");
        let (sr, si) = eval_value("series", n, m, &lambda, x);
        let (dr, di) = eval_value("decomposition", n, m, &lambda, x);
        let scale = sr.hypot(si).max(1e-300);
        prop_assert!((sr - dr).hypot(si - di) / scale <= 1e-12, "{} vs {}", sr, dr);
    }
}
