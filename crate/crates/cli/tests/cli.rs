use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn reskernel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reskernel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn fg_profile_divided_power() {
    let out = reskernel(&["fg-profile", "--preset", "divided-power", "--p", "3", "--max-degree", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["generators"], serde_json::json!({"2": 1, "6": 1, "18": 1}));
    assert_eq!(v["format_version"], 1);
    assert_eq!(v["command"], "fg-profile");
    assert_eq!(v["config"]["preset"], "divided-power");
    assert_eq!(v["config"]["max_degree"], 20);
}

#[test]
fn fg_profile_thompson_and_trivial() {
    let v = json(&reskernel(&["fg-profile", "--preset", "thompson-mod-p", "--max-degree", "20"]));
    assert_eq!(v["generators"], serde_json::json!({"1": 2, "2": 1, "6": 1, "18": 1}));
    let out = reskernel(&["fg-profile", "--preset", "trivial", "--max-degree", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["generators"], serde_json::json!({}));
}

#[test]
fn json_keys_are_sorted() {
    let text = stdout(&reskernel(&["abelian", "--n", "2", "--p", "5"]));
    let keys: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \"") )
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_unstable();
    assert_eq!(keys, sorted);
    assert!(keys.contains(&"format_version"));
}

#[test]
fn abelian_examples() {
    for (p, n) in [("3", "1"), ("3", "4"), ("5", "2")] {
        let out = reskernel(&["abelian", "--p", p, "--n", n]);
        assert_eq!(out.status.code(), Some(0));
        let v = json(&out);
        assert_eq!(v["obstruction_dim"].to_string(), n);
        assert_eq!(v["norm_is_zero"], true);
        assert_eq!(v["dim_E2_11"].to_string(), n);
    }
    let out = reskernel(&["abelian", "--p", "5", "--n", "2", "--format", "csv"]);
    assert_eq!(
        stdout(&out),
        "p,n,dim_E2_11,dim_invariants,dim_image,obstruction_dim,norm_is_zero\n5,2,2,2,2,2,true\n"
    );
}

#[test]
fn tensor_kernel_gamma_csv() {
    let out = reskernel(&["tensor-kernel", "--preset", "divided-power", "--max-degree", "18", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "degree,dim_S,type1,type2,type3,dim_invariants,dim_coinvariants,dim_kernel,min_generators"
    );
    let rows: Vec<Vec<usize>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 19);
    for r in &rows {
        assert_eq!(r[7], r[2] + r[3]);
    }
    assert_eq!(rows[18], vec![18, 24310, 1, 3, 2700, 2704, 2704, 4, 2]);
}

#[test]
fn tensor_kernel_json_and_trivial() {
    let v = json(&reskernel(&["tensor-kernel", "--preset", "exterior-pair", "--max-degree", "6"]));
    assert_eq!(v["rows"][3]["orbit_counts"]["type2"], 2);
    assert_eq!(v["rows"][3]["dim_S"], 816);
    assert_eq!(v["one_module_check"]["passed"], true);
    assert_eq!(v["budget_abort"], Value::Null);

    let v = json(&reskernel(&["tensor-kernel", "--preset", "trivial", "--p", "5", "--max-degree", "4"]));
    assert_eq!(v["kernel_generators"], serde_json::json!({"0": 1}));
}

#[test]
fn oracle_agrees() {
    let out = reskernel(&["oracle", "--preset", "divided-power", "--max-degree", "8"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["agree"], true);
    let out = reskernel(&["oracle", "--preset", "trivial", "--max-degree", "3"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn output_independent_of_jobs() {
    let args = ["tensor-kernel", "--preset", "exterior-pair", "--max-degree", "5"];
    let one = reskernel(&[&args[..], &["--jobs", "1"]].concat());
    let three = reskernel(&[&args[..], &["--jobs", "3"]].concat());
    assert_eq!(one.stdout, three.stdout);
    assert_eq!(one.stdout, reskernel(&[&args[..], &["--jobs", "1"]].concat()).stdout);
}

#[test]
fn spec_file_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("gamma.json");
    fs::write(
        &spec,
        r#"{"p": 3, "truncation": 20, "factors": [{"name": "u", "degree": 2, "kind": "divided_power"}]}"#,
    )
    .unwrap();
    let report = dir.path().join("report.json");
    let out = reskernel(&[
        "fg-profile",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["generators"], serde_json::json!({"2": 1, "6": 1, "18": 1}));

    let cubic = dir.path().join("cubic.json");
    fs::write(
        &cubic,
        r#"{"p": 3, "truncation": 8, "factors": [{"name": "x", "degree": 2, "kind": {"truncated_power": 3}}]}"#,
    )
    .unwrap();
    let v = json(&reskernel(&["fg-profile", "--spec", cubic.to_str().unwrap()]));
    assert_eq!(v["generators"], serde_json::json!({"2": 1}));
    assert_eq!(v["hilbert"], serde_json::json!([1, 0, 1, 0, 1, 0, 0, 0, 0]));
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"p\": 3, \"factors\": 7}").unwrap();
    let even = dir.path().join("even.json");
    fs::write(&even, r#"{"p": 3, "truncation": 4, "factors": [{"name": "a", "degree": 2, "kind": "exterior"}]}"#).unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["fg-profile", "--preset", "divided-power", "--p", "2", "--max-degree", "4"],
        vec!["fg-profile", "--preset", "divided-power", "--p", "9", "--max-degree", "4"],
        vec!["fg-profile", "--preset", "no-such", "--max-degree", "4"],
        vec!["fg-profile", "--preset", "divided-power"],
        vec!["fg-profile", "--max-degree", "4"],
        vec!["fg-profile", "--spec", bad.to_str().unwrap()],
        vec!["fg-profile", "--spec", even.to_str().unwrap()],
        vec!["fg-profile", "--spec", "/nonexistent/spec.json"],
        vec!["abelian", "--p", "4", "--n", "1"],
        vec!["abelian", "--n", "0"],
        vec!["abelian"],
        vec!["frobnicate"],
        vec!["fg-profile", "--bogus"],
        vec!["fg-profile", "--preset", "trivial", "--spec", "x.json", "--max-degree", "2"],
    ];
    for args in cases {
        let out = reskernel(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(reskernel(&["--help"]).status.code(), Some(0));
}

#[test]
fn budget_abort_emits_partial_rows() {
    let out = reskernel(&[
        "tensor-kernel",
        "--preset",
        "divided-power",
        "--max-degree",
        "18",
        "--memory-budget",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    let done = v["completed_through_degree"].as_u64().unwrap() as usize;
    assert!(done < 18);
    assert_eq!(v["rows"].as_array().unwrap().len(), done + 1);
    assert_eq!(v["budget_abort"]["degree"].as_u64().unwrap() as usize, done + 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}
