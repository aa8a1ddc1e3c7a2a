use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn wedgetri(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wedgetri")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn mu3_prints_the_closed_form() {
    let out = wedgetri(&["mu3", "1", "1", "3"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim().parse::<f64>().unwrap(), -1.0);
    let out = wedgetri(&["mu3", "1", "1.5", "2"]);
    assert_eq!(stdout(&out).trim().parse::<f64>().unwrap(), 0.0);
}

#[test]
fn negative_labels_are_usage_errors() {
    let out = wedgetri(&["mu3", "-1", "1", "1"]);
    assert_eq!(code(&out), 1);
    assert!(!out.stderr.is_empty());
}

#[test]
fn validate_reports_the_violated_triangle() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", r#"{"n":3,"d":[1,1,3]}"#);
    let out = wedgetri(&["validate-dmat", &bad]);
    assert_eq!(code(&out), 2);
    let v = json(&out);
    assert_eq!(v["status"], "violated");
    let mut sides = [&v["witness"]["i"], &v["witness"]["j"]].map(|x| x.as_u64().unwrap());
    sides.sort();
    assert_eq!(sides, [1, 2]);
    assert_eq!(v["witness"]["k"], 0);

    let good = write(&dir, "good.json", r#"{"n":4,"d":[1,1,2,2,1,1]}"#);
    let out = wedgetri(&["validate-dmat", &good]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["status"], "valid");
}

#[test]
fn points_become_a_distance_matrix() {
    let dir = TempDir::new().unwrap();
    let pts = write(&dir, "p.csv", "0,0\n3,4\n0,1\n");
    let v = json(&wedgetri(&["from-points", &pts]));
    assert_eq!(v["n"], 3);
    let d: Vec<f64> = v["d"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let expected = [5.0, 1.0, 18f64.sqrt()];
    assert!(d.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-12), "{d:?}");
    let v = json(&wedgetri(&["from-points", &pts, "--p", "inf"]));
    assert_eq!(v["d"], serde_json::json!([4.0, 1.0, 3.0]));
}

#[test]
fn minimize_finds_the_planted_violation() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", r#"{"n":3,"d":[1,1,3]}"#);
    let out = wedgetri(&["--seed", "3", "minimize", &bad]);
    assert_eq!(code(&out), 2);
    assert!((json(&out)["deficit"].as_f64().unwrap() + 1.0).abs() < 1e-6);
}

#[test]
fn swapped_example_keeps_a_valid_label_matrix() {
    let dir = TempDir::new().unwrap();
    let ex = write(&dir, "ex.json", r#"{"n":4,"d":[2,3,1,1,3,2]}"#);
    let out = wedgetri(&["swap-basis", &ex, "--first", "1,3", "--second", "1,4"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["dmat"]["d"], serde_json::json!([2.0, 1.0, 3.0, 1.0, 3.0, 2.0]));
    let swapped = write(&dir, "swapped.json", &stdout(&out));
    let out = wedgetri(&["--seed", "5", "minimize", &swapped]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["deficit"].as_f64().unwrap() >= -1e-9);
}

#[test]
fn lemma_reports_its_minimizer() {
    let v = json(&wedgetri(&["lemma-a", "1", "2", "1.5"]));
    assert!((v["value"].as_f64().unwrap() + 1.5).abs() < 1e-9);
    let out = wedgetri(&["lemma-a", "1", "2", "1.5", "--theta", "0", "--phi", "1.5707963267948966"]);
    assert!((stdout(&out).trim().parse::<f64>().unwrap() + 1.5).abs() < 1e-12);
}

#[test]
fn search_exits_with_violation_code_only_when_planted() {
    let out = wedgetri(&["search", "--dim", "4", "--dmats", "3", "--triples", "200"]);
    assert_eq!(code(&out), 0);
    let out = wedgetri(&["search", "--dim", "4", "--dmats", "3", "--triples", "200", "--plant-violation"]);
    assert_eq!(code(&out), 2);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("dim,mode,vector_mode,samples,min_deficit,violations,seed,wall_time_s"));
    let cells: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(cells[4].parse::<f64>().unwrap() < -1e-13);
    assert!(cells[5].parse::<usize>().unwrap() > 0);
}

#[test]
fn search_output_does_not_depend_on_threads() {
    let run = |threads: &str| {
        let out = wedgetri(&["--seed", "9", "--threads", threads, "--format", "json", "search", "--dim", "5", "--dmats", "8", "--triples", "50", "--mode", "linf-points"]);
        assert_eq!(code(&out), 0);
        let mut v = json(&out);
        v["wall_time_s"] = Value::Null;
        v
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn reproduce_table_writes_the_schema() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("table.csv");
    let out = wedgetri(&["--out", path.to_str().unwrap(), "reproduce-table", "--dims", "3..4", "--dmats", "3", "--triples", "20"]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "dim,vector_mode,samples,min_random_D,min_linf_D");
    assert_eq!(lines.len(), 5);
    for line in &lines[1..] {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 5);
        assert_eq!(cells[2], "60");
        assert!(cells[3].parse::<f64>().unwrap() >= -1e-13);
        assert!(cells[4].parse::<f64>().unwrap() >= -1e-13);
    }
}

#[test]
fn io_failures_exit_with_code_three() {
    assert!(!Path::new("/nonexistent/input.json").exists());
    assert_eq!(code(&wedgetri(&["validate-dmat", "/nonexistent/input.json"])), 3);
    assert_eq!(code(&wedgetri(&["--out", "/nonexistent/dir/out.json", "mu3", "1", "1", "1"])), 3);
}

#[test]
fn usage_errors_exit_with_code_one() {
    assert_eq!(code(&wedgetri(&["no-such-command"])), 1);
    assert_eq!(code(&wedgetri(&["search", "--dim", "two"])), 1);
    assert_eq!(code(&wedgetri(&["search", "--dim", "2"])), 1);
    let dir = TempDir::new().unwrap();
    let broken = write(&dir, "broken.json", "{not json");
    assert_eq!(code(&wedgetri(&["validate-dmat", &broken])), 1);
}

#[test]
fn restriction_criterion_flags_the_violating_span() {
    let dir = TempDir::new().unwrap();
    let vectors = write(&dir, "v.json", "[[[1,0],[0,0],[0,0]],[[0,0],[1,0],[0,0]],[[0,0],[0,0],[1,0]]]");
    let bad = write(&dir, "bad.json", r#"{"n":3,"d":[1,1,3]}"#);
    let out = wedgetri(&["check-3d", &bad, "--vectors", &vectors]);
    assert_eq!(code(&out), 2);
    assert_eq!(json(&out)["holds"], false);
    let good = write(&dir, "good.json", r#"{"n":3,"d":[1,1,2]}"#);
    let out = wedgetri(&["check-3d", &good, "--vectors", &vectors]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["holds"], true);
}
