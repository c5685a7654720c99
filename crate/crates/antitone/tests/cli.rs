use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use serde_json::Value;

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

struct Out {
    code: i32,
    json: Value,
    stderr: String,
}

fn run_with_stdin(args: &[&str], stdin: Option<&str>) -> Out {
    let mut child = Command::new(env!("CARGO_BIN_EXE_antitone"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    if let Some(text) = stdin {
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    }
    drop(child.stdin.take());
    let out = child.wait_with_output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    Out {
        code: out.status.code().unwrap(),
        json: serde_json::from_str(&stdout).unwrap_or(Value::Null),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn run(args: &[&str]) -> Out {
    run_with_stdin(args, None)
}

fn write_temp(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn points(v: &Value) -> Vec<Vec<f64>> {
    v.as_array().unwrap().iter().map(|p| p.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()).collect()
}

fn holds(out: &Out, class: &str) -> bool {
    out.json["classes"][class]["holds"].as_bool().unwrap()
}

#[test]
fn classify_examples() {
    let dir = tempfile::tempdir().unwrap();
    let a5 = write_temp(dir.path(), "a5.json", r#"{"n": 2, "k": [1, 1], "M": [[5, 1], [1, 1]]}"#);
    let o = run(&["classify", &a5]);
    assert_eq!(o.code, 0);
    assert_eq!([holds(&o, "Z"), holds(&o, "M"), holds(&o, "P"), holds(&o, "P0")], [false, false, true, true]);

    let o = run(&["classify", &fixture("zero_diag_k0.json")]);
    assert!(holds(&o, "P0"));
    assert!(!holds(&o, "P"));
    assert!(!o.json["classes"]["P0"]["boundary"].as_array().unwrap().is_empty());

    let o = run(&["classify", &fixture("identity3.json")]);
    assert!(["Z", "M", "P", "P0"].iter().all(|c| holds(&o, c)));
}

#[test]
fn classify_reads_stdin_and_names_bad_fields() {
    let o = run_with_stdin(&["classify", "-"], Some("[[2, 1], [1, 2]]"));
    assert_eq!(o.code, 0);
    assert!(holds(&o, "P"));

    let o = run_with_stdin(&["classify", "-"], Some("[[2, 1], [1]]"));
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("`matrix`"), "{}", o.stderr);

    let o = run_with_stdin(&["solve", "-"], Some(r#"{"n": 2, "k": [1, 1], "M": [[1, 1], [1]]}"#));
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("`M`"), "{}", o.stderr);

    let o = run(&["solve", &fixture("bad_k.json")]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("`k`"), "{}", o.stderr);

    let o = run_with_stdin(&["solve", "-"], Some(r#"{"n": 1, "k": [1], "M": [[1]], "extra": 1}"#));
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("extra"), "{}", o.stderr);

    let o = run_with_stdin(&["solve", "-"], Some("{ not json"));
    assert_eq!(o.code, 2);
}

#[test]
fn solve_examples() {
    let o = run(&["solve", &fixture("zero_diag_k0.json")]);
    assert_eq!(o.code, 0);
    let p = points(&o.json["fixed_points"]);
    assert_eq!(p.len(), 1);
    assert!(p[0].iter().zip([1.0, 2.0, 1.0]).all(|(a, b)| (a - b).abs() < 1e-10));

    let o = run(&["solve", &fixture("case_two_a0.json")]);
    assert_eq!(o.code, 0);
    assert!(points(&o.json["fixed_points"]).is_empty());
    assert_eq!(o.json["certificate"]["kind"], "NONE");

    let o = run(&["solve", &fixture("case_one.json")]);
    assert_eq!(o.code, 0);
    assert_eq!(points(&o.json["fixed_points"]).len(), 1);
    assert_eq!(o.json["certificate"]["kind"], "UNIQUE-POSITIVE-K");
    assert_eq!(o.json["bracket"]["verdict"], "TYPE-I");
}

#[test]
fn solve_rejects_negative_coupling() {
    let o = run(&["solve", &fixture("negative_coupling.json")]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("hint:"));
}

#[test]
fn solve_box_flag() {
    let o = run(&["solve", &fixture("case_two_a075.json"), "--box", "0.05,0.05:5,5", "--seeds", "12"]);
    assert_eq!(o.code, 0);
    assert_eq!(points(&o.json["fixed_points"]).len(), 3);
    assert_eq!(o.json["seeds"], 144);
    let o = run(&["solve", &fixture("case_two_a075.json"), "--box", "0.05,0.05"]);
    assert_eq!(o.code, 2);
}

fn read_csv(path: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn iterate_case_one_writes_bracketing_traces() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("c1.csv").display().to_string();
    let o = run(&["iterate", &fixture("case_one.json"), "--trace", &trace]);
    assert_eq!(o.code, 0);
    assert_eq!(o.json["verdict"], "CONVERGED");
    let (header, rows) = read_csv(&trace);
    assert_eq!(header, ["iter", "y1", "y2"]);
    assert_eq!(rows.len() as u64, o.json["iterations"].as_u64().unwrap() + 1);

    let lower = o.json["traces"]["lower"].as_str().unwrap().to_string();
    let upper = o.json["traces"]["upper"].as_str().unwrap().to_string();
    let (_, lo) = read_csv(&lower);
    let (_, hi) = read_csv(&upper);
    for w in lo.windows(2) {
        assert!(w[1][1..].iter().zip(&w[0][1..]).all(|(b, a)| *b >= a - 1e-9));
    }
    for w in hi.windows(2) {
        assert!(w[1][1..].iter().zip(&w[0][1..]).all(|(b, a)| *b <= a + 1e-9));
    }
}

#[test]
fn iterate_builtin_maps_and_budget() {
    let o = run(&["iterate", "--map", "example-4.1", "--start", "1.2"]);
    assert_eq!(o.code, 0);
    assert_eq!(o.json["verdict"], "CYCLE");
    assert_eq!(o.json["period"], 2);
    assert_eq!(o.json["bracket"], Value::Null);

    let o = run(&["iterate", "--map", "example-4.2", "--start", "1.25,1.75"]);
    assert_eq!(o.json["verdict"], "CONVERGED");

    let o = run(&["iterate", &fixture("case_one.json"), "--budget", "1"]);
    assert_eq!(o.code, 3);
    assert_eq!(o.json["verdict"], "BUDGET-EXHAUSTED");

    let o = run(&["iterate", "--map", "example-4.1", "--start", "-1"]);
    assert_eq!(o.code, 2);
    let o = run(&["iterate", "--map", "example-4.1"]);
    assert_eq!(o.code, 2);
    let o = run(&["iterate", &fixture("case_two_a0.json")]);
    assert_eq!(o.code, 2);
}

#[test]
fn sweep_examples() {
    let o = run(&["sweep", &fixture("case_two_a0.json"), "--entry", "1,1", "--from", "0", "--to", "1", "--step", "0.05"]);
    assert_eq!(o.code, 0);
    let t = o.json["transitions"].as_array().unwrap();
    let est = |from: u64, to: u64| {
        t.iter().find(|x| x["from_count"] == from && x["to_count"] == to).unwrap()["estimate"].as_f64().unwrap()
    };
    assert!((est(1, 3) - 0.68).abs() < 0.01);
    assert!((est(3, 1) - 0.83).abs() < 0.01);

    let o = run(&["sweep", &fixture("case_two_a0.json"), "--entry", "1,1", "--from", "1", "--to", "2", "--step", "0.1"]);
    assert!(o.json["rows"].as_array().unwrap().iter().all(|r| r["count"] == 1));
    assert!(o.json["transitions"].as_array().unwrap().is_empty());

    let o = run(&["sweep", &fixture("case_two_a0.json"), "--entry", "1,1", "--from", "1", "--to", "0", "--step", "0.1"]);
    assert_eq!(o.code, 0);
    assert!(o.json["rows"].as_array().unwrap().is_empty());

    let o = run(&["sweep", &fixture("case_two_a0.json"), "--entry", "1,1", "--from", "-1", "--to", "0", "--step", "0.5"]);
    assert_eq!(o.code, 2);
    let o = run(&["sweep", &fixture("case_two_a0.json"), "--entry", "3,1", "--from", "0", "--to", "1", "--step", "0.5"]);
    assert_eq!(o.code, 2);
}

#[test]
fn ingest_examples() {
    let o = run(&["ingest", &fixture("grid_antitone.json")]);
    assert_eq!(o.code, 0);
    assert_eq!(o.json["class"], "antitone");
    assert_eq!(o.json["k"], serde_json::json!([1.0, 1.0]));
    assert_eq!(points(&o.json["M"]), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);

    let o = run(&["ingest", &fixture("grid_isotone.json")]);
    assert_eq!(o.code, 2);
    assert_eq!(o.json["class"], "isotone");
    assert_eq!(o.json["accepted"], false);
    assert_eq!(o.json["offending"].as_array().unwrap().len(), 2);

    let o = run(&["ingest", &fixture("grid_singular.json")]);
    assert_eq!(o.code, 3);

    // a grid file also feeds solve directly
    let o = run(&["solve", &fixture("grid_antitone.json")]);
    assert_eq!(o.code, 0);
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    assert!(points(&o.json["fixed_points"])[0].iter().all(|v| (v - golden).abs() < 1e-10));
}

#[test]
fn solve_then_iterate_round_trip() {
    for name in ["case_one.json", "case_two_a075.json", "zero_diag_k0.json", "grid_antitone.json"] {
        let o = run(&["solve", &fixture(name)]);
        for p in points(&o.json["fixed_points"]) {
            let start = p.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",");
            let it = run(&["iterate", &fixture(name), "--start", &start]);
            assert_eq!(it.json["verdict"], "CONVERGED", "{name} from {start}");
            assert_eq!(it.json["iterations"], 1, "{name} from {start}");
        }
    }
}

/// Same object keys everywhere; `null` may stand in for any value.
fn same_shape(a: &Value, b: &Value, path: &str) -> Result<(), String> {
    match (a, b) {
        (Value::Null, _) | (_, Value::Null) => Ok(()),
        (Value::Object(x), Value::Object(y)) => {
            let kx: Vec<_> = x.keys().collect();
            let ky: Vec<_> = y.keys().collect();
            if kx != ky {
                return Err(format!("{path}: keys {kx:?} vs {ky:?}"));
            }
            x.iter().try_for_each(|(k, v)| same_shape(v, &y[k], &format!("{path}.{k}")))
        }
        (Value::Array(x), Value::Array(y)) => match (x.first(), y.first()) {
            (Some(f), Some(g)) => x.iter().chain(y).try_for_each(|v| same_shape(v, if std::ptr::eq(v, f) { g } else { f }, &format!("{path}[]"))),
            _ => Ok(()),
        },
        (Value::Number(_), Value::Number(_)) | (Value::String(_), Value::String(_)) | (Value::Bool(_), Value::Bool(_)) => Ok(()),
        _ => Err(format!("{path}: {a} vs {b}")),
    }
}

/// Structural equality with relative tolerance on numbers.
fn close(a: &Value, b: &Value, path: &str) -> Result<(), String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            if (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs())) {
                Ok(())
            } else {
                Err(format!("{path}: {x} vs {y}"))
            }
        }
        (Value::Object(x), Value::Object(y)) => {
            if x.keys().ne(y.keys()) {
                return Err(format!("{path}: keys differ"));
            }
            x.iter().try_for_each(|(k, v)| close(v, &y[k], &format!("{path}.{k}")))
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return Err(format!("{path}: length {} vs {}", x.len(), y.len()));
            }
            x.iter().zip(y).enumerate().try_for_each(|(i, (u, v))| close(u, v, &format!("{path}[{i}]")))
        }
        _ if a == b => Ok(()),
        _ => Err(format!("{path}: {a} vs {b}")),
    }
}

fn check_golden(name: &str, args: &[&str]) {
    let o = run(args);
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, serde_json::to_string_pretty(&o.json).unwrap() + "\n").unwrap();
    }
    let want: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    close(&o.json, &want, name).unwrap();
}

#[test]
fn golden_outputs() {
    check_golden("classify_case_one.json", &["classify", &fixture("case_one.json")]);
    check_golden("solve_case_two_a075.json", &["solve", &fixture("case_two_a075.json")]);
    check_golden("solve_case_one.json", &["solve", &fixture("case_one.json")]);
    check_golden("iterate_reflection.json", &["iterate", "--map", "example-4.1", "--start", "0.5"]);
    check_golden("sweep_case_two.json", &["sweep", &fixture("case_two_a0.json"), "--entry", "1,1", "--from", "0.6", "--to", "0.9", "--step", "0.1"]);
    check_golden("ingest_antitone.json", &["ingest", &fixture("grid_antitone.json")]);
}

#[test]
fn schema_is_stable_across_inputs() {
    let by_command: [(&str, Vec<Vec<String>>); 5] = [
        (
            "classify_case_one.json",
            vec![
                vec!["classify".into(), fixture("identity3.json")],
                vec!["classify".into(), fixture("zero_diag_k0.json")],
                vec!["classify".into(), fixture("case_two_a075.json")],
            ],
        ),
        (
            "solve_case_two_a075.json",
            vec![
                vec!["solve".into(), fixture("case_one.json")],
                vec!["solve".into(), fixture("case_two_a0.json")],
                vec!["solve".into(), fixture("zero_diag_k0.json")],
            ],
        ),
        (
            "iterate_reflection.json",
            vec![
                vec!["iterate".into(), fixture("case_one.json")],
                vec!["iterate".into(), "--map".into(), "example-4.1".into(), "--start".into(), "1.5".into()],
                vec!["iterate".into(), fixture("case_one.json"), "--budget".into(), "1".into()],
            ],
        ),
        (
            "sweep_case_two.json",
            vec![vec![
                "sweep".into(),
                fixture("case_two_a0.json"),
                "--entry".into(),
                "1,1".into(),
                "--from".into(),
                "1".into(),
                "--to".into(),
                "0".into(),
                "--step".into(),
                "1".into(),
            ]],
        ),
        ("ingest_antitone.json", vec![vec!["ingest".into(), fixture("grid_isotone.json")]]),
    ];
    for (golden, runs) in by_command {
        let want: Value = serde_json::from_str(&std::fs::read_to_string(golden_path(golden)).unwrap()).unwrap();
        for args in runs {
            let args: Vec<&str> = args.iter().map(String::as_str).collect();
            let o = run(&args);
            same_shape(&o.json, &want, golden).unwrap();
        }
    }
}
