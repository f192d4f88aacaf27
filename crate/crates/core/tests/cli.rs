use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn pgst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pgst"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = pgst(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing_ms");
    v
}

#[test]
fn spectrum_json_and_csv() {
    let r = report(&["spectrum", "--n", "3"]);
    assert_eq!(r["schema_version"], 1);
    let eig = r["results"]["eigenvalues"].as_array().unwrap();
    assert_eq!(eig.len(), 3);
    assert!((eig[0]["theta_numeric"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-15);
    assert_eq!(eig[1]["theta_exact"], "0");

    let csv = pgst(&["spectrum", "--n", "4", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "j,theta_numeric,theta_exact_string");
    assert_eq!(lines.len(), 5);
}

#[test]
fn decide_is_deterministic_and_rechecks() {
    let args = ["decide", "--n", "11", "--state", "1:1,3:1"];
    let a = without_timing(report(&args));
    let b = without_timing(report(&args));
    assert_eq!(a, b);
    assert_eq!(a["results"]["answer"], "yes");
    assert_eq!(a["results"]["cross_check"]["agree"], true);

    let dir = tempfile::tempdir().unwrap();
    let saved = dir.path().join("verdict.json");
    fs::write(&saved, serde_json::to_string(&a).unwrap()).unwrap();
    let checked = report(&["decide", "--check-certificate", saved.to_str().unwrap()]);
    assert_eq!(checked["results"]["valid"], true);

    let mut tampered = a.clone();
    tampered["results"]["answer"] = "no".into();
    fs::write(&saved, serde_json::to_string(&tampered).unwrap()).unwrap();
    let out = pgst(&["decide", "--check-certificate", saved.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(err["error"]["reason"], "certificate_invalid");
}

#[test]
fn violator_certificate_recheck() {
    let r = report(&["decide", "--n", "11", "--state", "1:1", "--method", "general"]);
    let cert = &r["results"]["certificate"];
    assert_eq!(r["results"]["answer"], "no");
    assert_eq!(cert["type"], "violator");
    assert_eq!(cert["sum"], 0);
    assert_eq!(cert["parity_sum"].as_i64().unwrap().rem_euclid(2), 1);

    let dir = tempfile::tempdir().unwrap();
    let saved = dir.path().join("bare.json");
    fs::write(&saved, serde_json::to_string(&r["results"]).unwrap()).unwrap();
    report(&["decide", "--check-certificate", saved.to_str().unwrap()]);
}

#[test]
fn refusals_exit_two_with_reason() {
    for (args, reason) in [
        (
            vec!["decide", "--n", "7", "--state", "1:1", "--method", "r-sets"],
            "m_shape",
        ),
        (
            vec!["decide", "--n", "11", "--state", "1:0.5", "--method", "s-sets"],
            "not_exact",
        ),
        (
            vec!["search-time", "--n", "11", "--state", "1:1", "--epsilon", "0.01"],
            "no_pgst",
        ),
    ] {
        let out = pgst(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(err["error"]["kind"], "refused");
        assert_eq!(err["error"]["reason"], reason, "{args:?}");
    }

    let out = pgst(&["support", "--n", "5", "--state", "1:1,2:x"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(err["error"]["message"].as_str().unwrap().contains("column"));
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let r = report(&[
        "simulate",
        "--n",
        "2",
        "--state",
        "1:1",
        "--t-max",
        "3.2",
        "--dt",
        "0.1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(r["command"], "simulate");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,overlap,fidelity"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 33);
    for row in &rows {
        assert!((row[1] - row[0].sin().abs()).abs() < 1e-12, "{row:?}");
        assert!((row[2] - row[1] * row[1]).abs() < 1e-12);
    }
}

#[test]
fn search_time_and_scan() {
    let r = report(&["search-time", "--n", "3", "--state", "1:1", "--epsilon", "1e-6"]);
    let res = &r["results"];
    assert_eq!(res["complete"], true);
    assert!(res["achieved_overlap"].as_f64().unwrap() > 1.0 - 1e-9);

    let r = report(&[
        "scan",
        "--n",
        "5",
        "--state",
        "1:1",
        "--horizon",
        "50",
        "--step",
        "0.1",
    ]);
    let overlap = r["results"]["overlap_star"].as_f64().unwrap();
    assert!(overlap > 0.99 && overlap < 1.0);
}

#[test]
fn family_lists_and_verifies() {
    let r = report(&["family", "--p", "3", "--t", "2", "--verify"]);
    let instances = r["results"]["instances"].as_array().unwrap();
    assert_eq!(r["results"]["n"], 11);
    assert!(instances.iter().any(|i| i["state_spec"] == "1:1,3:1"));
}

#[test]
fn pretty_output_parses() {
    let out = pgst(&["--pretty", "support", "--n", "8", "--state", "1:1,5:-1,7:1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\n  "));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["results"]["support"], serde_json::json!([3, 6]));
}

#[test]
fn in_process_run_matches_binary() {
    let mut buf = Vec::new();
    let code = pgst::cli::run(["pgst", "decide", "--n", "5", "--state", "1:1"], &mut buf);
    assert_eq!(code, 0);
    let in_process = without_timing(serde_json::from_slice(&buf).unwrap());
    let binary = without_timing(report(&["decide", "--n", "5", "--state", "1:1"]));
    assert_eq!(in_process, binary);
}

fn run_in_process(args: &[&str]) -> (i32, Value) {
    let mut buf = Vec::new();
    let code = pgst::cli::run(std::iter::once("pgst").chain(args.iter().copied()), &mut buf);
    (code, serde_json::from_slice(&buf).unwrap())
}

#[test]
fn every_no_report_rechecks() {
    let dir = tempfile::tempdir().unwrap();
    let saved = dir.path().join("verdict.json");
    let mut rechecked = 0;
    for n in 2..=14 {
        for a in 1..=n {
            let (n, state) = (n.to_string(), format!("{a}:1"));
            let (code, r) = run_in_process(&["decide", "--n", &n, "--state", &state]);
            assert_eq!(code, 0);
            if r["results"]["answer"] != "no" {
                continue;
            }
            fs::write(&saved, serde_json::to_string(&r).unwrap()).unwrap();
            let (code, checked) = run_in_process(&["decide", "--check-certificate", saved.to_str().unwrap()]);
            assert_eq!(code, 0, "n={n} a={a}");
            assert_eq!(checked["results"]["valid"], true);
            rechecked += 1;
        }
    }
    assert!(rechecked > 20);
}

#[test]
fn family_verification_never_says_no() {
    for (p, t) in [("3", "2"), ("3", "3"), ("5", "2"), ("7", "2"), ("3", "4")] {
        let (code, r) = run_in_process(&["family", "--p", p, "--t", t, "--verify"]);
        assert_eq!(code, 0, "p={p} t={t}");
        assert_eq!(r["results"]["all_yes"], true);
        let instances = r["results"]["instances"].as_array().unwrap();
        assert!(!instances.is_empty());
        for instance in instances {
            assert_eq!(instance["s_sets"], "yes", "p={p} t={t} {instance}");
            assert_eq!(instance["general_lattice"], "yes", "p={p} t={t} {instance}");
        }
    }
}
