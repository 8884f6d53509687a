use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/data").join(name)
}

fn clockmin(args: &[&std::ffi::OsStr]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clockmin")).args(args).output().unwrap()
}

macro_rules! args {
    ($($a:expr),*) => { &[$(std::ffi::OsStr::new(&$a)),*] };
}

#[test]
fn bisimilar_pair_exits_zero() {
    let out = clockmin(args!["bisim", data("merge_left.json"), data("merge_right.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "BISIMILAR\n");
}

#[test]
fn minimized_running_example_has_one_clock_and_is_bisimilar() {
    let dir = tempfile::tempdir().unwrap();
    let min = dir.path().join("out.json");
    let report = dir.path().join("report.json");
    let out = clockmin(args!["minimize", data("running.json"), "-o", min, "--report", report]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stats = clockmin(args!["stats", min]);
    assert!(String::from_utf8_lossy(&stats.stdout).contains("clocks: 1\n"));
    assert_eq!(clockmin(args!["bisim", data("running.json"), min]).status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(r["stages"][4]["clocks"], 1);

    let again = dir.path().join("again.json");
    clockmin(args!["minimize", data("running.json"), "-o", again]);
    assert_eq!(std::fs::read(&min).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn non_bisimilar_pair_prints_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, k: i64| {
        let p = dir.path().join(name);
        std::fs::write(
            &p,
            format!(
                r#"{{"clocks": ["x"], "alphabet": ["a"], "locations": ["l0", "l1"], "initial": "l0",
                "edges": [{{"from": "l0", "to": "l1", "action": "a", "guard": [{{"clock": "x", "rel": "<=", "k": {k}}}]}}]}}"#
            ),
        )
        .unwrap();
        p
    };
    let (a, b) = (write("a.json", 1), write("b.json", 2));
    let out = clockmin(args!["bisim", a, b]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("NOT_BISIMILAR\ndelay 3/2; right a"), "{text}");
}

#[test]
fn malformed_input_exits_two_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("garbage.json");
    std::fs::write(&bad, "{\n  \"clocks\": [x]\n}").unwrap();
    let out = clockmin(args!["validate", bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert_eq!(clockmin(args!["validate", dir.path().join("missing.json")]).status.code(), Some(2));
    assert_eq!(clockmin(args!["frobnicate"]).status.code(), Some(2));
    assert_eq!(clockmin(args!["validate", data("triangle.json")]).status.code(), Some(0));
}

#[test]
fn zonegraph_export_is_dot() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("g.dot");
    assert_eq!(clockmin(args!["zonegraph", data("running.json"), "-o", dot]).status.code(), Some(0));
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph"));
    assert!(text.contains("style=dashed"));
}
