//! Frozen CLI outputs for the fixture bouts. Run with `UPDATE_GOLDEN=1` to
//! rewrite the expected files after an intended change.

use std::fs;
use std::path::{Path, PathBuf};

const FIXTURES: [&str; 3] = ["fx-alpha.csv", "fx-beta.csv", "fx-gamma.json"];

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests")
}

fn run(args: &[&str]) -> String {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = fencingvis::cli::run(std::iter::once("fencingvis").chain(args.iter().copied()), &mut out, &mut err);
    assert_eq!(code, 0, "{args:?}: {}", String::from_utf8_lossy(&err));
    String::from_utf8(out).unwrap()
}

fn check(name: &str, actual: &str) {
    let path = root().join("golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(expected == actual, "{name} differs from golden file; rerun with UPDATE_GOLDEN=1 if intended");
}

fn each_fixture(command: &[&str], suffix: &str) {
    for fixture in FIXTURES {
        let file = root().join("fixtures").join(fixture);
        let mut args = vec![command[0], file.to_str().unwrap()];
        args.extend(&command[1..]);
        let stem = fixture.split('.').next().unwrap();
        check(&format!("{stem}.{suffix}"), &run(&args));
    }
}

#[test]
fn abstract_output() {
    each_fixture(&["abstract"], "abstract.json");
}

#[test]
fn graph_json_output() {
    each_fixture(&["graph", "--format", "json"], "graph.json");
}

#[test]
fn graph_halves_dot_output() {
    each_fixture(&["graph", "--mode", "halves", "--format", "dot"], "graph.dot");
}

#[test]
fn stats_output() {
    each_fixture(&["stats"], "stats.json");
}
