use std::path::Path;
use std::process::{Command, Output};

fn nilheat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nilheat"))
        .args(args)
        .env_remove("NILHEAT_WORKERS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn no_arguments_is_a_usage_error() {
    assert_eq!(code(&nilheat(&[])), 64);
    assert_eq!(code(&nilheat(&["no-such-command"])), 64);
}

#[test]
fn coefficient_table_for_two() {
    let out = nilheat(&["coef-table", "--n", "2"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "configHash,sigma,errors,coefficient");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].ends_with(",\"(1,2)\",0,1/4"));
    assert!(lines[2].ends_with(",\"(2,1)\",1,-1/4"));
    let hash = lines[1].split(',').next().unwrap();
    assert_eq!(hash.len(), 64);
}

#[test]
fn bchd_table_starts_with_the_linear_terms() {
    let out = nilheat(&["bchd-table", "--step", "3"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.splitn(2, ',').collect()).collect();
    assert_eq!(rows[0][1], "1,g,1");
    assert_eq!(rows[1][1], "1,h,1");
    // ½[g,h] is written as −½[h,g].
    assert!(text.contains("\"[h,g]\",-1/2"));
}

#[test]
fn tables_are_byte_identical_on_rerun() {
    let a = nilheat(&["falpha-table", "--n", "4"]);
    let b = nilheat(&["falpha-table", "--n", "4"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn exported_algebra_validates() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("heis.json");
    let out = nilheat(&["export-algebra", "--algebra", "heisenberg3", "--out", path_str(&file)]);
    assert_eq!(code(&out), 0);
    let out = nilheat(&["validate-algebra", "--in", path_str(&file)]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(&lines[..3], ["pass", "step 2", "HS²=2"]);
}

#[test]
fn broken_algebra_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    // [e1,e2] = e3 and [e2,e1] = e3 is not antisymmetric.
    std::fs::write(
        &file,
        r#"{"label":"bad","dim":3,"step":2,"triplets":[[0,1,2,1.0],[1,0,2,1.0]]}"#,
    )
    .unwrap();
    let out = nilheat(&["validate-algebra", "--in", path_str(&file)]);
    assert!(matches!(code(&out), 2 | 65), "exit {}", code(&out));
}

#[test]
fn configuration_errors_exit_65() {
    assert_eq!(code(&nilheat(&["moments", "--t", "-1"])), 65);
    assert_eq!(code(&nilheat(&["moments", "--algebra", "nope-3"])), 65);
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.toml");
    std::fs::write(&file, "[experiment]\ntime = 2.0\n").unwrap();
    assert_eq!(code(&nilheat(&["moments", "--config", path_str(&file)])), 65);
}

#[test]
fn resource_guards_exit_70() {
    let out = nilheat(&["simulate", "--algebra", "random-hs-200-4", "--paths", "1"]);
    assert_eq!(code(&out), 70);
    let out = nilheat(&["simulate", "--algebra", "free-4-5", "--paths", "1"]);
    assert_eq!(code(&out), 70);
}

#[test]
fn small_runs_are_inconclusive() {
    let args = ["--algebra", "heisenberg3", "--paths", "200", "--steps", "8"];
    let out = nilheat(&[&["moments"][..], &args].concat());
    assert_eq!(code(&out), 3);
    let out = nilheat(&[&["harnack"][..], &args].concat());
    assert_eq!(code(&out), 3);
}

#[test]
fn reports_are_reproducible_and_carry_the_hash() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let file = dir.path().join(name);
        let out = nilheat(&[
            "moments",
            "--algebra",
            "heisenberg3",
            "--paths",
            "2000",
            "--steps",
            "16",
            "--workers",
            "2",
            "--reproducible",
            "--out",
            path_str(&file),
        ]);
        assert!(matches!(code(&out), 0 | 2 | 3));
        std::fs::read(&file).unwrap()
    };
    let a = run("a.json");
    let b = run("b.json");
    assert_eq!(a, b);
    let doc: serde_json::Value = serde_json::from_slice(&a).unwrap();
    let hash = doc["configHash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("a.json.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["configHash"].as_str().unwrap(), hash);
    assert_eq!(manifest["seed"], doc["config"]["seed"]);
}

#[test]
fn worker_count_does_not_change_results() {
    let run = |w: &str| {
        nilheat(&[
            "simulate", "--algebra", "heisenberg3", "--paths", "50", "--steps", "8", "--workers", w,
            "--format", "csv",
        ])
        .stdout
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn config_file_and_flags_merge() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.toml");
    std::fs::write(
        &file,
        "[experiment]\nalgebra = \"heisenberg3\"\nsteps = 8\npaths = 100\nseed = 9\n\n[output]\nformat = \"json\"\n",
    )
    .unwrap();
    let out = nilheat(&["moments", "--config", path_str(&file), "--seed", "5", "--reproducible"]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["config"]["seed"], 5);
    assert_eq!(doc["config"]["paths"], 100);
    assert_eq!(doc["config"]["algebra"], "heisenberg3");
}
