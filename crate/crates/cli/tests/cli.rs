use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use statemetric_cli::{parse, CliError};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn statemetric(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_statemetric"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf-8")
}

fn json_run(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = statemetric(&all);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    serde_json::from_str(&stdout(&o)).expect("json output")
}

fn rows<'a>(doc: &'a Value, title: &str) -> &'a Vec<Value> {
    doc["results"]
        .as_array()
        .unwrap()
        .iter()
        .find(|d| d["title"] == title)
        .unwrap_or_else(|| panic!("no document {title}"))["rows"]
        .as_array()
        .unwrap()
}

fn write_temp(name: &str, v: &Value) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path
}

#[test]
fn three_point_dirac_distances() {
    let f = fixture("example71.json");
    let out = json_run(&["metric", f.to_str().unwrap()]);
    let want = [("d1", "d3", 1.0), ("d2", "d3", 0.5), ("d1", "d2", 1.25f64.sqrt())];
    let got = rows(&out, "state distances");
    for (mu, nu, d) in want {
        let row = got.iter().find(|r| r["mu"] == mu && r["nu"] == nu).unwrap();
        let v = row["distance"].as_f64().unwrap();
        assert!((v - d).abs() < 1e-6, "{mu} {nu}: {v}");
        assert!(row["gap"].as_f64().unwrap() <= 1e-7);
    }
    let table = stdout(&statemetric(&["metric", f.to_str().unwrap()]));
    assert!(table.contains("1.1180340"), "{table}");
}

#[test]
fn weak_lattice_row_for_canonical_f() {
    let f = fixture("counterexample4x4.json");
    let o = statemetric(&["check", "weak-lattice", f.to_str().unwrap(), "--samples", "50"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row = text.lines().find(|l| l.contains("(4, 2, 0, -1)")).expect("violation row");
    assert!(row.starts_with("weak-lattice"), "{row}");
    let out = json_run(&["check", "weak-lattice", f.to_str().unwrap(), "--samples", "50"]);
    let v = rows(&out, "weak-lattice violations")
        .iter()
        .find(|r| r["witness"] == "(4, 2, 0, -1)")
        .unwrap();
    assert!(v["margin"].as_f64().unwrap() > 1e-6);
}

#[test]
fn strict_turns_violations_into_exit_3() {
    let f = fixture("counterexample4x4.json");
    let o = statemetric(&["check", "weak-lattice", f.to_str().unwrap(), "--samples", "10", "--strict"]);
    assert_eq!(o.status.code(), Some(3));
    let o = statemetric(&["check", "lattice", fixture("path-transport.json").to_str().unwrap(), "--samples", "20", "--strict"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn unit_triangle_resistances() {
    let o = statemetric(&["resist", fixture("triangle-resistance.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let block: Vec<&str> = text.lines().skip(2).take(3).collect();
    for line in block {
        assert_eq!(line.matches("0.6666667").count(), 2, "{line}");
    }
    let out = json_run(&["resist", fixture("triangle-resistance.json").to_str().unwrap()]);
    for r in rows(&out, "effective resistance") {
        for p in ["a", "b", "c"] {
            let v = r[p].as_f64().unwrap();
            assert!(v == 0.0 || (v - 2.0 / 3.0).abs() < 1e-12);
        }
    }
}

#[test]
fn path_transport_matches_shortest_paths() {
    let out = json_run(&["mk", fixture("path-transport.json").to_str().unwrap()]);
    let r = rows(&out, "transport distances");
    assert_eq!(r[0]["mu"], "left");
    assert!((r[0]["distance"].as_f64().unwrap() - 3.5).abs() < 1e-9);
    assert!((r[1]["distance"].as_f64().unwrap() - 1.875).abs() < 1e-9);
}

#[test]
fn outputs_are_deterministic() {
    let f = fixture("example71.json");
    for format in ["table", "json", "csv"] {
        for cmd in [vec!["metric"], vec!["recover"], vec!["check", "convex"]] {
            let mut args = cmd.clone();
            args.extend([f.to_str().unwrap(), "--samples", "40", "--seed", "7", "--format", format]);
            let a = statemetric(&args);
            let b = statemetric(&args);
            assert_eq!(a.status.code(), Some(0));
            assert_eq!(a.stdout, b.stdout, "{cmd:?} {format}");
        }
    }
}

#[test]
fn seed_changes_sampled_output() {
    let f = fixture("example71.json");
    let a = statemetric(&["recover", f.to_str().unwrap(), "--samples", "30", "--seed", "1", "--precision"]);
    let b = statemetric(&["recover", f.to_str().unwrap(), "--samples", "30", "--seed", "2", "--precision"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn table_round_trips_through_metric_lip() {
    let f = fixture("example71.json");
    let first = json_run(&["table", f.to_str().unwrap()]);
    let table = first["results"][0]["table"].clone();
    let problem = json!({
        "schema": "statemetric/1",
        "space": { "kind": "points", "labels": table["labels"] },
        "seminorm": table,
        "states": { "d1": { "point": "1" }, "d2": { "point": "2" }, "d3": { "point": "3" } }
    });
    let path = write_temp("roundtrip.json", &problem);
    let second = json_run(&["table", path.to_str().unwrap()]);
    assert_eq!(second["results"][0]["table"], first["results"][0]["table"]);
    let mk = json_run(&["mk", path.to_str().unwrap()]);
    let rows_in = first["results"][0]["table"]["rows"].as_array().unwrap();
    for r in rows(&mk, "transport distances") {
        let idx = |s: &Value| s.as_str().unwrap()[1..].parse::<usize>().unwrap() - 1;
        let (x, y) = (idx(&r["mu"]), idx(&r["nu"]));
        assert_eq!(r["distance"], rows_in[x][y]);
    }
}

#[test]
fn numerical_failure_exits_2_with_bounds() {
    let o = statemetric(&["metric", fixture("example71.json").to_str().unwrap(), "--tol", "1e-16"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("bounds ["), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_and_file_errors_exit_1() {
    assert_eq!(statemetric(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(statemetric(&["check", "nope", "x.json"]).status.code(), Some(1));
    let o = statemetric(&["eval", "/definitely/not/here.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cannot read"));
    let o = statemetric(&["resist", fixture("example71.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(statemetric(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_file_exits_1_naming_the_field() {
    let path = write_temp("bad.json", &json!({ "schema": "statemetric/1", "space": { "kind": "points", "labels": ["a", "b"] } }));
    let o = statemetric(&["eval", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("seminorm"), "{}", stderr(&o));
}

fn base() -> Value {
    json!({
        "schema": "statemetric/1",
        "space": { "kind": "points", "labels": ["a", "b", "c"] },
        "seminorm": {
            "kind": "graph_lip",
            "edges": [
                { "from": "a", "to": "b", "cost": 1.0 },
                { "from": "b", "to": "c", "cost": 2.0 }
            ]
        },
        "states": { "p": { "point": "a" }, "q": { "weights": [0.5, 0.5, 0.0] } },
        "observables": { "f": { "values": [1.0, 0.0, 2.0] } },
        "tasks": [{ "op": "metric", "pairs": [["p", "q"]] }, { "op": "check", "predicate": "lattice" }]
    })
}

fn diagnostic(edit: impl FnOnce(&mut Value)) -> (String, String) {
    let mut v = base();
    edit(&mut v);
    match parse(&v.to_string()) {
        Err(CliError::Malformed { field, message }) => (field, message),
        Err(other) => panic!("unexpected error {other}"),
        Ok(_) => panic!("accepted a malformed file"),
    }
}

fn remove<'a>(path: &'a [&'a str]) -> impl FnOnce(&mut Value) + 'a {
    move |v: &mut Value| {
        let (last, parents) = path.split_last().unwrap();
        let mut cur = v;
        for p in parents {
            cur = match p.parse::<usize>() {
                Ok(i) => &mut cur[i],
                Err(_) => &mut cur[*p],
            };
        }
        match last.parse::<usize>() {
            Ok(i) => {
                cur.as_array_mut().unwrap().remove(i);
            }
            Err(_) => {
                cur.as_object_mut().unwrap().remove(*last);
            }
        }
    }
}

#[test]
fn base_problem_parses() {
    let p = parse(&base().to_string()).unwrap();
    assert_eq!(p.states.len(), 2);
    assert_eq!(p.tasks.len(), 2);
    assert_eq!(p.states[0].0, "p");
}

#[test]
fn each_missing_required_field_has_its_own_diagnostic() {
    let cases: Vec<(&[&str], &str, &str)> = vec![
        (&["schema"], "schema", "missing"),
        (&["space"], "space", "missing"),
        (&["seminorm"], "seminorm", "missing"),
        (&["space", "kind"], "space", "`kind`"),
        (&["space", "labels"], "space", "`labels`"),
        (&["seminorm", "kind"], "seminorm", "`kind`"),
        (&["seminorm", "edges"], "seminorm", "`edges`"),
        (&["seminorm", "edges", "0", "cost"], "seminorm.edges[0]", "`cost`"),
        (&["seminorm", "edges", "0", "from"], "seminorm.edges[0]", "`from`"),
        (&["seminorm", "edges", "1", "to"], "seminorm.edges[1]", "`to`"),
        (&["tasks", "0", "op"], "tasks[0]", "`op`"),
        (&["tasks", "1", "predicate"], "tasks[1]", "`predicate`"),
    ];
    let mut seen = std::collections::HashSet::new();
    for (path, field, needle) in cases {
        let (f, m) = diagnostic(remove(path));
        assert!(f.starts_with(field), "{path:?}: field {f}");
        assert!(m.contains(needle), "{path:?}: {m}");
        assert!(seen.insert(format!("{f}: {m}")), "{path:?} shares a diagnostic");
    }
}

#[test]
fn invalid_values_are_reported_by_field() {
    let cases: Vec<(Box<dyn FnOnce(&mut Value)>, &str)> = vec![
        (Box::new(|v| v["schema"] = json!("statemetric/2")), "schema"),
        (Box::new(|v| v["space"]["labels"] = json!(["a", "a", "c"])), "space.labels"),
        (Box::new(|v| v["seminorm"]["edges"][0]["to"] = json!("zz")), "seminorm.edges[0]"),
        (Box::new(|v| v["seminorm"]["edges"][0]["cost"] = json!(-1.0)), "seminorm.edges"),
        (Box::new(|v| v["states"]["q"] = json!({ "weights": [0.5, 0.6, 0.0] })), "states.q.weights"),
        (Box::new(|v| v["states"]["q"] = json!({ "weights": [1.0] })), "states.q.weights"),
        (Box::new(|v| v["states"]["p"] = json!({ "point": "nowhere" })), "states.p.point"),
        (Box::new(|v| v["observables"]["f"] = json!({ "values": [1.0] })), "observables.f.values"),
        (Box::new(|v| v["tasks"][0]["pairs"] = json!([["p", "ghost"]])), "tasks[0].pairs[0]"),
        (Box::new(|v| v["tasks"][1]["predicate"] = json!("bogus")), "tasks[1].predicate"),
        (Box::new(|v| v["tasks"][0]["op"] = json!("bogus")), "tasks[0]"),
        (Box::new(|v| v["extra"] = json!(1)), "extra"),
    ];
    for (edit, field) in cases {
        let (f, m) = diagnostic(edit);
        assert!(f.starts_with(field), "expected {field}, got {f}: {m}");
    }
}

#[test]
fn matrix_problems_run() {
    let problem = json!({
        "schema": "statemetric/1",
        "space": { "kind": "matrix", "n": 2 },
        "seminorm": { "kind": "quotient" },
        "states": {
            "up": { "pure": { "re": [1, 0] } },
            "plus": { "pure": { "re": [1, 1] } },
            "mixed": { "density": { "re": [[0.5, 0], [0, 0.5]] } }
        },
        "observables": { "z": { "matrix": { "re": [[1, 0], [0, -1]] } } }
    });
    let path = write_temp("matrix.json", &problem);
    let out = json_run(&["metric", path.to_str().unwrap()]);
    let r = rows(&out, "state distances");
    assert!((r[0]["distance"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-6);
    assert!((r[1]["distance"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    let out = json_run(&["eval", path.to_str().unwrap()]);
    assert_eq!(rows(&out, "seminorm values")[0]["L"], 1.0);
    let o = statemetric(&["table", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
