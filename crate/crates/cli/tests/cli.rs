use std::path::Path;
use std::process::{Command, Output};

fn stdet(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stdet"))
        .args(args)
        .env("STDET_CACHE_DIR", cache)
        .output()
        .expect("stdet runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn ring_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&stdet(dir.path(), &["ring", "Z(3^2)"]));
    for line in ["|R|       9", "q         3", "e         2", "|U|       6", "|Q|       3", "|N|       3"] {
        assert!(out.contains(line), "{out}");
    }
    let out = stdout(&stdet(dir.path(), &["ring", "F(4)"]));
    assert!(out.contains("|U|       3") && out.contains("|Q|       3"), "{out}");
    let out = stdout(&stdet(dir.path(), &["ring", "FU(2,2)"]));
    assert!(out.contains("|U|       2") && out.contains("|Q|       1"), "{out}");
    assert_eq!(stdet(dir.path(), &["ring", "Z(6)"]).status.code(), Some(3));
}

#[test]
fn census_csv_matches_published_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&stdet(dir.path(), &["census", "F(5)", "--n", "4", "--format", "csv"]));
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows, ["det_index,det_display,count", "0,0,20125", "1,1,15000", "2,2,14000", "3,3,14000", "4,4,15000"]);
    assert!(out.contains("# ist,58000\n") && out.contains("# character_sum,2000\n"), "{out}");
}

#[test]
fn census_totals_and_even_q_split() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&stdet(dir.path(), &["census", "Z(3^2)", "--n", "2"]));
    assert!(out.contains("# total,729\n"));
    let out = stdout(&stdet(dir.path(), &["census", "FU(2,2)", "--n", "2", "--format", "json"]));
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    let counts: Vec<&str> = doc["counts"].as_array().unwrap().iter().map(|c| c["count"].as_str().unwrap()).collect();
    assert_eq!(counts, ["20", "20", "12", "12"]);
    let md = stdout(&stdet(dir.path(), &["census", "FU(2,2)", "--n", "2", "--format", "md"]));
    assert!(md.contains("| 3 | 1+u | 12 |"), "{md}");
}

#[test]
fn cache_hit_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let fresh = stdet(dir.path(), &["census", "Z(5^2)", "--n", "3"]);
    let entries = std::fs::read_dir(dir.path()).unwrap().filter(|e| {
        e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv")
    });
    assert_eq!(entries.count(), 1);
    let cached = stdet(dir.path(), &["census", "Z(5^2)", "--n", "3"]);
    assert_eq!(fresh.stdout, cached.stdout);
    let bypass = stdet(dir.path(), &["--no-cache", "census", "Z(5^2)", "--n", "3"]);
    assert_eq!(fresh.stdout, bypass.stdout);
    let check = stdet(dir.path(), &["census", "Z(5^2)", "--n", "3", "--verify-cache"]);
    assert_eq!(check.status.code(), Some(0));
}

#[test]
fn corrupt_cache_entries_are_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let first = stdet(dir.path(), &["census", "F(7)", "--n", "3"]);
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|x| x == "csv") {
            let text = std::fs::read_to_string(&path).unwrap();
            std::fs::write(&path, text.replace(",0,", ",0,9")).unwrap();
        }
    }
    let second = stdet(dir.path(), &["census", "F(7)", "--n", "3"]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn budget_exit_code_and_no_partial_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("out.csv");
    let o = stdet(
        dir.path(),
        &["--budget", "1000", "census", "F(7)", "--n", "5", "--out", out_file.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(4));
    assert!(!out_file.exists());
    let o = stdet(dir.path(), &["census", "F(7)", "--n", "5", "--out", out_file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&out_file).unwrap().contains("det_index"));
}

#[test]
fn formula_values_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| stdet(dir.path(), args);
    let o = run(&["formula", "st_ring_unit", "--q", "3", "--e", "2", "--n", "2", "--class", "qr", "--variant", "errata"]);
    assert_eq!(stdout(&o).lines().next(), Some("54"));
    assert!(stdout(&o).contains("reference: "));
    let o = run(&["formula", "s_field", "--q", "3", "--n", "2", "--variant", "paper"]);
    assert_eq!(stdout(&o).lines().next(), Some("-14"));
    let o = run(&["formula", "ist_field", "--q", "5", "--n", "7", "--method", "closed"]);
    assert_eq!(stdout(&o).lines().next(), Some("816000000"));
    let o = run(&["formula", "st_field_prescribed", "--q", "4", "--n", "2", "--class", "nqr"]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["formula", "ideal_layer", "--q", "3", "--e", "2", "--n", "2", "--s", "1", "--zc", "1:9,2:99"]);
    assert_eq!(stdout(&o).lines().next(), Some("243"));
    let o = run(&["formula", "ideal_layer", "--ring", "Z(3^2)", "--n", "2", "--s", "1"]);
    assert_eq!(stdout(&o).lines().next(), Some("243"));
    let o = run(&["formula", "st_ring_unit", "--q", "2", "--e", "2", "--n", "2", "--class", "unit-even-q", "--variant", "errata"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["formula", "no_such_formula", "--q", "3", "--n", "2"]).status.code(), Some(3));
}

#[test]
fn verify_with_a_plan_file() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    std::fs::write(
        &plan,
        r#"[
  {"id": "z9-ist", "formula": "ist_ring", "ring": "Z(3^2)", "n": 3},
  {"id": "f3-s2", "formula": "s_field", "ring": "F(3)", "n": 2, "variant": "paper"},
  {"id": "f5-total", "formula": "census_total", "ring": "F(5)", "n": 4}
]"#,
    )
    .unwrap();
    let report = dir.path().join("report.json");
    let o = stdet(dir.path(), &["verify", "--plan", plan.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let checks = doc["body"]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 3);
    assert_eq!(checks[0]["classification"], "DISCREPANT");
    assert_eq!(checks[0]["formula_value"], "-14");
    for key in ["id", "paper_ref", "quote", "ring", "n", "params", "variant", "formula_value", "oracle_value"] {
        assert!(checks[1].get(key).is_some(), "missing {key}");
    }
    assert!(doc["header"]["tool_version"].is_string() && doc["header"]["timestamp"].is_u64());

    // a discrepancy that is not expected makes the run fail
    std::fs::write(&plan, r#"[{"id": "x", "formula": "s_field", "ring": "F(3)", "n": 2, "expected": "PASS"}]"#).unwrap();
    let o = stdet(dir.path(), &["verify", "--plan", plan.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("unmet x"));
}
