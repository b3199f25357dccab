use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn wardsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wardsim")).args(args).output().expect("binary runs")
}

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("out.csv");
    let svg = dir.path().join("out.svg");
    let o = wardsim(&["run", arg(&scenarios().join("ward2.scn")), "--trace", arg(&trace), "--svg", arg(&svg)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("# generator="));
    assert!(text.contains("# cart1.outcome=delivered_and_returned"));
    assert!(text.contains("\ntick,cart,x,y,heading,phase,event\n"));
    assert!(fs::read_to_string(&svg).unwrap().contains("<polyline"));
    assert!(stdout(&o).contains("outcome=delivered_and_returned"));
}

#[test]
fn missing_scenario() {
    let o = wardsim(&["run", "no/such/file.scn"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("scenario not found"));
}

#[test]
fn seed_flag_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let scn = dir.path().join("noisy.scn");
    fs::write(&scn, "cart1.target = 1\nnoise.sigma = 8\nnoise.brightness = -20\nmax_ticks = 300\n").unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for t in [&a, &b] {
        assert_eq!(wardsim(&["run", arg(&scn), "--seed", "7", "--trace", arg(t)]).status.code(), Some(0));
    }
    let ta = fs::read(&a).unwrap();
    assert_eq!(ta, fs::read(&b).unwrap());
    assert!(String::from_utf8_lossy(&ta).contains("# seed=7"));
}

#[test]
fn expectation_mismatch_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let scn = dir.path().join("short.scn");
    fs::write(&scn, "cart1.target = 2\nmax_ticks = 50\nexpect = delivered_and_returned\n").unwrap();
    assert_eq!(wardsim(&["run", arg(&scn)]).status.code(), Some(1));
    fs::write(&scn, "cart1.target = 2\nmax_ticks = 50\nexpect = incomplete\n").unwrap();
    assert_eq!(wardsim(&["run", arg(&scn)]).status.code(), Some(0));
}

#[test]
fn bad_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let scn = dir.path().join("bad.scn");
    fs::write(&scn, "cart1.target = 9\n").unwrap();
    assert_eq!(wardsim(&["run", arg(&scn)]).status.code(), Some(2));
    fs::write(&scn, "this is not a key value line\n").unwrap();
    assert_eq!(wardsim(&["run", arg(&scn)]).status.code(), Some(2));
    fs::write(&scn, "cart1.target = 2\n").unwrap();
    assert_eq!(wardsim(&["run", arg(&scn), "--dt", "0"]).status.code(), Some(2));
    assert_eq!(wardsim(&["run"]).status.code(), Some(2));
}

#[test]
fn suite_over_shipped_scenarios() {
    let o = wardsim(&["suite", arg(&scenarios())]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{out}");
    assert!(out.contains("9/9 passed"), "{out}");
    let near = out.find("[near]").unwrap();
    let mid = out.find("[mid]").unwrap();
    let far = out.find("[far]").unwrap();
    assert!(near < mid && mid < far);
    for w in 1..=8 {
        assert!(out.contains(&format!("ward{w} ")), "{out}");
    }
}

#[test]
fn suite_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = wardsim(&["suite", arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0/0 passed"));
}

#[test]
fn suite_reports_stranded_follower() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("dead_link.scn"),
        "carts = 2\ncart1.target = 3\ncart2.target = 4\nlink.drop = 1\nlink.retry = 0\nmax_ticks = 1500\n\
         expect = delivered_and_returned\n",
    )
    .unwrap();
    let o = wardsim(&["suite", arg(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("FAIL") && out.contains("0/1 passed"), "{out}");
}

#[test]
fn clean_corpus_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("corpus.csv");
    let o = wardsim(&["vision-corpus", arg(&out), "--noise", "0", "--k1", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("accuracy 1.0000"));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 600);
    assert!(text.lines().nth(1).unwrap().starts_with("1,1,"));
}

#[test]
fn empty_corpus_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = wardsim(&["vision-corpus", arg(&dir.path().join("c.csv")), "--digits"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid corpus grid"));
}

#[test]
fn render_map_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("map.svg");
    let o = wardsim(&["render-map", arg(&out), "--map", arg(&scenarios().join("default.map"))]);
    assert_eq!(o.status.code(), Some(0));
    let svg = fs::read_to_string(&out).unwrap();
    assert!(svg.starts_with("<svg") && svg.matches("<line").count() == 13);
}
