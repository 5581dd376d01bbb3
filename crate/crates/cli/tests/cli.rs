use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn cutstack(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cutstack"))
        .args(args)
        .current_dir(dir)
        .env_remove("CUTSTACK_OUT_DIR")
        .output()
        .expect("spawn cutstack")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "status {:?}\nstdout: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

/// CSV rows without the `#` provenance lines.
fn table(path: &Path) -> Vec<Vec<String>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .from_path(path)
        .unwrap()
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

const ICS: &str = r#"
construction = "ics-check"
[initial]
kind = "columns"
columns = [{ levels = "010", width = "1/2" }, { levels = "110", width = "1/2" }]
[[stages]]
stage = "ics"
s = 3
"#;

#[test]
fn build_logs_ics_column_count() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "s.toml", ICS);
    let out = cutstack(&["build", "-s", "s.toml", "-o", "out"], tmp.path());
    ok(&out);
    let rows = table(&tmp.path().join("out/stages.csv"));
    assert_eq!(rows[0], ["stage_index", "stage", "columns", "min_height", "max_height", "measure"]);
    assert_eq!(rows[1][2], "2");
    let last = rows.last().unwrap();
    assert_eq!(last[2], "256");
    assert_eq!(last[3], "24");
    assert_eq!(last[5], "3");
    assert_eq!(rows[1][5], "3");
    let snap = fs::read_to_string(tmp.path().join("out/tower.json")).unwrap();
    assert!(snap.contains("config_sha256"));
}

#[test]
fn empty_schedule_snapshots_initial_columns() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "s.toml",
        "construction = \"empty\"\nstages = []\n[initial]\nkind = \"single_column\"\nword = \"0110\"\n",
    );
    ok(&cutstack(&["build", "-s", "s.toml", "-o", "out"], tmp.path()));
    let rows = table(&tmp.path().join("out/stages.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][..5], ["0", "initial", "1", "4", "4"]);
    let snap = fs::read_to_string(tmp.path().join("out/tower.json")).unwrap();
    assert!(snap.contains("\"0110\""));
}

#[test]
fn invalid_schedule_reports_position_and_exit_2() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "s.toml",
        "construction = \"bad\"\n[initial]\nkind = \"single_column\"\nword = \"01\"\n[[stages]]\nstage = \"twirl\"\n",
    );
    let out = cutstack(&["build", "-s", "s.toml", "-o", "out"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 6 column 9"), "{err}");
    assert!(err.contains("twirl"), "{err}");
}

#[test]
fn exit_codes_by_error_class() {
    let tmp = TempDir::new().unwrap();
    // Bad grid value: configuration error.
    write(tmp.path(), "bad.toml", "[grids]\nepsilon = [\"3/2\"]\n");
    assert_eq!(cutstack(&["cover", "-c", "bad.toml", "-s", "x.toml"], tmp.path()).status.code(), Some(2));
    // No schedule at all: configuration error.
    assert_eq!(cutstack(&["build", "-o", "out"], tmp.path()).status.code(), Some(2));
    // Materialization cap exceeded: resource error.
    write(tmp.path(), "s.toml", ICS);
    write(tmp.path(), "caps.toml", "[caps.tower]\nmax_columns = 16\n");
    let out = cutstack(&["build", "-c", "caps.toml", "-s", "s.toml", "-o", "out"], tmp.path());
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stage 0"));
    // Parameter search that cannot succeed within its cap: infeasible class.
    write(
        tmp.path(),
        "ics.toml",
        "[scenario]\nkind = \"two_word_ics\"\nword = \"0\"\nk = 4\nt = 2.0\neta = 0.1\ns_cap = 5\n",
    );
    assert_eq!(cutstack(&["scenario", "-c", "ics.toml", "-o", "out"], tmp.path()).status.code(), Some(3));
}

const REPEATED: &str = r#"
seed = 11
[scenario]
kind = "repeated_block"
word = "0000000001"
k1 = 2
k2 = 6
continuation = 4
[grids]
n = [20]
epsilon = ["1/10"]
delta = ["1/10"]
t = [1.0, 2.0]
[verify.grid]
max_word_len = 2
max_blocks = 4
"#;

#[test]
fn scenario_then_slowent_reports_s_at_most_h() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "c.toml", REPEATED);
    ok(&cutstack(&["scenario", "-c", "c.toml", "-o", "out"], tmp.path()));
    let meta = table(&tmp.path().join("out/scenario.csv"));
    assert!(meta.iter().any(|r| r[0] == "h" && r[1] == "10"));
    assert!(tmp.path().join("out/schedule.toml").exists());
    ok(&cutstack(&["slowent", "-c", "c.toml", "-o", "out", "--svg"], tmp.path()));
    let rows = table(&tmp.path().join("out/slowent.csv"));
    let s: usize = rows[1][4].parse().unwrap();
    assert!(s <= 10, "S = {s}");
    assert!(fs::read_to_string(tmp.path().join("out/slowent.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn blume_entropy_is_monotone() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "s.toml", ICS);
    ok(&cutstack(&["blume", "-s", "s.toml", "-o", "out"], tmp.path()));
    let rows = table(&tmp.path().join("out/blume.csv"));
    let h: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(h.windows(2).all(|w| w[0] <= w[1] + 1e-12), "{h:?}");
}

#[test]
fn verify_small_grid_passes() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "c.toml", REPEATED);
    ok(&cutstack(&["verify", "-c", "c.toml", "-o", "out"], tmp.path()));
    let rows = table(&tmp.path().join("out/verify_summary.csv"));
    assert!(rows.len() > 1);
    assert!(tmp.path().join("out/verify_reports.json").exists());
}

#[test]
fn output_dir_from_environment() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "s.toml", ICS);
    let out = Command::new(env!("CARGO_BIN_EXE_cutstack"))
        .args(["build", "-s", "s.toml"])
        .current_dir(tmp.path())
        .env("CUTSTACK_OUT_DIR", "envout")
        .output()
        .unwrap();
    ok(&out);
    assert!(tmp.path().join("envout/tower.json").exists());
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "c.toml", REPEATED);
    for dir in ["a", "b"] {
        for cmd in ["scenario", "cover", "slowent", "blume", "verify"] {
            ok(&cutstack(&[cmd, "-c", "c.toml", "-o", dir, "--svg"], tmp.path()));
        }
    }
    let mut names: Vec<_> = fs::read_dir(tmp.path().join("a")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 10, "{names:?}");
    for n in names {
        let a = fs::read(tmp.path().join("a").join(&n)).unwrap();
        let b = fs::read(tmp.path().join("b").join(&n)).unwrap();
        assert!(a == b, "{n:?} differs");
    }
}
