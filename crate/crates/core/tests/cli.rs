use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_maskdispatch"));
    c.env_remove("MASKDISPATCH_SEED");
    c
}

fn threebus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../cases/threebus.case")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn series(v: &Value, key: &str) -> Vec<f64> {
    v[key]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|s| s["values"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()))
        .collect()
}

/// The report without the fields that legitimately differ between runs and modes.
fn economics(mut v: Value) -> Value {
    let o = v.as_object_mut().unwrap();
    for k in ["timing", "comm", "mode", "seed"] {
        o.remove(k);
    }
    v
}

#[test]
fn solve_clear_prints_the_three_bus_prices() {
    let out = run(&["solve", threebus().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["status"], "optimal");
    assert_eq!(series(&v, "lmp"), vec![15.0, 15.5, 16.0]);
    assert_eq!(series(&v, "flows"), vec![10.0, 90.0, 100.0]);
    assert_eq!(series(&v, "angles"), vec![0.0, -1.0, -10.0]);
    assert_eq!(v["objective"].as_f64(), Some(1330.0));
    assert!(v.get("comm").is_none());
}

#[test]
fn masked_solve_reports_the_clear_economics() {
    let case = threebus();
    let clear = json(&run(&["solve", case.to_str().unwrap()]));
    let out = run(&["solve", case.to_str().unwrap(), "--mode", "masked", "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0));
    let masked = json(&out);
    assert_eq!(masked["comm"]["up_scalars"], 285);
    assert_eq!(masked["comm"]["down_scalars"], 14);
    assert_eq!(economics(masked), economics(clear));
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let case = threebus();
    let mut reports = Vec::new();
    for name in ["a.json", "b.json"] {
        let path = dir.path().join(name);
        let out = run(&["solve", case.to_str().unwrap(), "--mode", "masked", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("timing");
        reports.push(v);
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn seed_comes_from_the_environment() {
    let out = bin()
        .args(["solve", threebus().to_str().unwrap(), "--mode", "masked"])
        .env("MASKDISPATCH_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(json(&out)["seed"], 7);
    assert_eq!(json(&run(&["solve", threebus().to_str().unwrap()]))["seed"], 42);
}

#[test]
fn missing_case_exits_one_and_names_it() {
    let out = run(&["solve", "/no/such/dir/grid.case"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/dir/grid.case"));
}

#[test]
fn bad_field_exits_one_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.case");
    let text = std::fs::read_to_string(threebus()).unwrap().replacen("capacity", "capacty", 1);
    std::fs::write(&path, text).unwrap();
    let out = run(&["solve", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("capacty"));
}

const TWO_BUS: &str = r#"
[meta]
name = "twobus"
T = 1
reference_bus = 1

[[buses]]
id = 1

[[buses]]
id = 2

[[lines]]
from = 1
to = 2
x = 0.1
capacity = 50.0

[[generators]]
owner = "GENCO1"
bus = 1
segments = [{ price = 10.0, min = 0.0, max = MAXGEN }]

[[loads]]
owner = "LSE1"
bus = 2
segments = [{ price = 30.0, min = 20.0, max = 40.0 }]
"#;

#[test]
fn infeasible_case_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.case");
    std::fs::write(&path, TWO_BUS.replace("MAXGEN", "5.0")).unwrap();
    let out = run(&["solve", path.to_str().unwrap(), "--mode", "masked"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["status"], "infeasible");
}

#[test]
fn single_variable_entities_are_at_risk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.case");
    std::fs::write(&path, TWO_BUS.replace("MAXGEN", "100.0")).unwrap();
    let out = run(&["audit", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("GENCO1  linear: 2 eq / 1 unk → AT-RISK"), "{text}");
}

#[test]
fn audit_prints_the_three_bus_counts() {
    let out = run(&["audit", threebus().to_str().unwrap(), "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("GENCO1  linear: 6 eq / 9 unk → UNDERDETERMINED"), "{text}");
    assert!(text.contains("GENCO1  bilinear: 66 eq / 51 unk"), "{text}");
}

#[test]
fn compare_100_seeds() {
    let out = run(&["compare", threebus().to_str().unwrap(), "--seeds", "100", "--seed", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let mut r = csv::Reader::from_reader(&out.stdout[..]);
    let headers: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        headers,
        [
            "seed", "obj_clear", "obj_masked", "max_dispatch_diff", "max_lmp_diff", "t_clear_ms", "t_masked_ms",
            "scalars_up", "scalars_down", "ratio"
        ]
    );
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 100);
    for (i, row) in rows.iter().enumerate() {
        let f = |k: usize| row[k].parse::<f64>().unwrap();
        assert_eq!(row[0].parse::<usize>().unwrap(), i);
        assert!((f(1) - f(2)).abs() <= 1e-6);
        assert!(f(3) <= 1e-6 && f(4) <= 1e-6);
        assert_eq!((&row[7], &row[8]), ("285", "14"));
        assert!(f(9) > 0.0);
    }
}

#[test]
fn compare_needs_a_seed() {
    let out = run(&["compare", threebus().to_str().unwrap(), "--seeds", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gen_is_byte_identical_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let flags = ["--buses", "3", "--gencos", "2", "--lses", "1", "--entity-size", "1", "--hours", "1", "--seed", "7"];
    let mut texts = Vec::new();
    for name in ["a.case", "b.case"] {
        let path = dir.path().join(name);
        let mut args = vec!["gen"];
        args.extend(flags);
        args.extend(["--out", path.to_str().unwrap()]);
        assert_eq!(run(&args).status.code(), Some(0));
        texts.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    let sys = maskdispatch::cli::parse_case(std::str::from_utf8(&texts[0]).unwrap(), "gen").unwrap();
    assert_eq!(maskdispatch::cli::to_case_string(&sys).as_bytes(), &texts[0][..]);

    let path = dir.path().join("a.case");
    for mode in ["clear", "masked"] {
        let out = run(&["solve", path.to_str().unwrap(), "--mode", mode]);
        assert_eq!(out.status.code(), Some(0), "{mode}");
    }
}

#[test]
fn gen_rejects_zero_counts() {
    assert_eq!(run(&["gen", "--buses", "3", "--gencos", "0", "--lses", "1"]).status.code(), Some(1));
}
