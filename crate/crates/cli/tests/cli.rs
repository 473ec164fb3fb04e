use std::process::{Command, Output};

fn berger(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_berger"))
        .args(args)
        .env_remove("BERGER_TOL_NUM")
        .env_remove("BERGER_TOL_SOL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf8")
}

#[test]
fn table_matches_all_cells() {
    let o = berger(&["table"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("16/16 cells match"));

    let o = berger(&["table", "--format", "csv"]);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
    assert!(text.contains("eps = -1,n = 3,cone,cone"));
}

#[test]
fn classify_examples() {
    for (n, eps, kind) in [("3", "-1", "cone"), ("5", "0.7", "two_points"), ("1", "-1", "line"), ("2", "-0.5", "empty")] {
        let o = berger(&["classify", "--n", n, "--eps", eps]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).contains(&format!("kind: {kind}")), "n={n} eps={eps}: {}", stdout(&o));
    }
}

#[test]
fn dims_examples() {
    for (n, row) in [("1", "27,9,1"), ("3", "9,5,3"), ("6", "7,3,1")] {
        let o = berger(&["dims", "--n", n, "--format", "csv"]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        assert_eq!(text.lines().skip(1).filter(|l| l.ends_with(row)).count(), 5, "{text}");
    }
}

#[test]
fn verify_passes() {
    for (n, eps) in [("2", "-1"), ("3", "2"), ("4", "-1"), ("1", "-3/2")] {
        let o = berger(&["verify", "--n", n, "--eps", eps]);
        assert_eq!(o.status.code(), Some(0), "n={n} eps={eps}: {}", stdout(&o));
        assert!(stdout(&o).ends_with("PASS\n"));
    }
}

#[test]
fn sabotaged_convention_fails_with_named_check() {
    let o = berger(&["verify", "--n", "4", "--eps", "-1", "--ricci-convention", "second-slot"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL: calibration"));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("calibration"), "{err}");
}

#[test]
fn tightened_tolerance_fails() {
    let o = berger(&["verify", "--n", "2", "--eps", "2", "--tol-num", "1e-30"]);
    assert_eq!(o.status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_berger"))
        .args(["verify", "--n", "2", "--eps", "2"])
        .env("BERGER_TOL_NUM", "1e-30")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["verify", "--n", "2", "--eps", "0"],
        vec!["verify", "--n", "0", "--eps", "1"],
        vec!["classify", "--n", "2"],
        vec!["frobnicate"],
        vec!["table", "--format", "xml"],
        vec!["verify", "--n", "2", "--eps", "1", "--ricci-convention", "third"],
    ] {
        let o = berger(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    let o = Command::new(env!("CARGO_BIN_EXE_berger"))
        .args(["table"])
        .env("BERGER_TOL_SOL", "nope")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn export_is_deterministic_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = berger(&["export", "--n", "2", "--eps", "-3/2", "--seed", "5", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let ta = std::fs::read(&a).unwrap();
    assert_eq!(ta, std::fs::read(&b).unwrap());

    let v: serde_json::Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(v["ricci_flat"]["ricci_flat"], true);
    assert_eq!(v["seed"], 5);
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        [
            "n",
            "eps",
            "dims",
            "variety",
            "samples",
            "scalar_curvatures",
            "ricci_flat",
            "flat",
            "residuals",
            "tool_version",
            "seed"
        ]
    );

    let o = berger(&["export", "--n", "1", "--eps", "-1"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["variety"]["kind"], "line");
}

#[test]
fn export_numbers_have_at_most_15_digits() {
    let o = berger(&["export", "--n", "3", "--eps", "-1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["flat"]["circle_max_curvature"].as_f64().map(|x| x <= 1e-8), Some(true));
    for token in text.split(|c: char| !(c.is_ascii_digit() || c == '.' || c == 'e' || c == '-')) {
        let mantissa = token.trim_start_matches('-').split('e').next().unwrap();
        let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
        let significant = digits.trim_start_matches('0');
        if !significant.is_empty() && token.parse::<f64>().is_ok() {
            assert!(significant.trim_end_matches('0').len() <= 15, "{token}");
        }
    }
}

#[test]
fn json_formats_parse() {
    for args in [
        vec!["dims", "--n", "2", "--format", "json"],
        vec!["verify", "--n", "2", "--eps", "1", "--format", "json"],
        vec!["classify", "--n", "4", "--eps", "1", "--format", "json"],
        vec!["table", "--format", "json"],
    ] {
        let o = berger(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        let _: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{args:?}: {e}"));
    }
}
