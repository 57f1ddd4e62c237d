use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn evsel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evsel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn synth(dir: &Path, informative: usize, noise: usize) -> PathBuf {
    let path = dir.join("data.csv");
    let out = evsel(&[
        "synth",
        "--samples",
        "40",
        "--informative",
        &informative.to_string(),
        "--noise",
        &noise.to_string(),
        "--seed",
        "5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    path
}

fn table(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("table.csv");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn plain_and_lambda_zero_traces_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), 2, 4);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let run = |algo: &str, lambda: &str, trace: &Path| {
        let out = evsel(&[
            "select",
            "--data",
            data.to_str().unwrap(),
            "--algo",
            algo,
            "--lambda",
            lambda,
            "--seed",
            "3",
            "--trace",
            trace.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    };
    run("sbg", "0.5", &a);
    run("sbg+", "0", &b);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn lambda_out_of_range_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), 2, 2);
    let out = evsel(&["select", "--data", data.to_str().unwrap(), "--lambda", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("[0, 1]"), "{}", stderr(&out));
}

#[test]
fn twelve_feature_trace_has_78_rows() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), 3, 9);
    let trace = dir.path().join("trace.csv");
    let out = evsel(&[
        "select",
        "--data",
        data.to_str().unwrap(),
        "--algo",
        "sbg",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,candidate_feature,mask_bitstring,score,chosen_flag"));
    assert_eq!(lines.count(), 78);
    let report = stdout(&out);
    assert!(report.contains("best subset:"));
    assert!(report.contains("subset size:"));
}

#[test]
fn oracle_toy_table() {
    let dir = TempDir::new().unwrap();
    let path = table(dir.path(), "00,0\n10,0.8\n01,0.2\n11,1.0\n");
    let out = evsel(&["oracle", "--table", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("f0: L+=0.900000 L-=0.100000 R=0.800000"), "{text}");
    assert!(text.contains("f1: L+=0.600000 L-=0.400000 R=0.200000"), "{text}");
}

#[test]
fn oracle_constant_table_has_zero_relevance() {
    let dir = TempDir::new().unwrap();
    let lines: String = (0..8u32).map(|b| format!("{:03b},0.7\n", b)).collect();
    let path = table(dir.path(), &lines);
    let out = evsel(&["oracle", "--table", path.to_str().unwrap(), "--weighting", "size"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.matches(" R=0.000000").count(), 3, "{text}");
    assert_eq!(text.matches("R_w=0.000000").count(), 3, "{text}");
}

#[test]
fn oracle_missing_subset_names_it() {
    let dir = TempDir::new().unwrap();
    let path = table(dir.path(), "00,0\n10,1\n11,1\n");
    let out = evsel(&["oracle", "--table", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("01"), "{}", stderr(&out));
}

#[test]
fn oracle_guard_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), 2, 4);
    let out = evsel(&["oracle", "--data", data.to_str().unwrap(), "--n-guard", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_exits_2() {
    let out = evsel(&["select", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_input_file_is_a_runtime_error() {
    let out = evsel(&["select", "--data", "/nonexistent/evsel.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn prefilter_writes_reduced_csv_and_map() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), 2, 6);
    let reduced = dir.path().join("top.csv");
    let map = dir.path().join("map.csv");
    let out = evsel(&[
        "prefilter",
        "--data",
        data.to_str().unwrap(),
        "--k",
        "3",
        "--out",
        reduced.to_str().unwrap(),
        "--map",
        map.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let map_text = fs::read_to_string(&map).unwrap();
    let mut lines = map_text.lines();
    assert_eq!(lines.next(), Some("new_index,original_name"));
    let names: Vec<&str> = lines.map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(names.len(), 3);
    // original column order is kept
    let mut sorted = names.clone();
    sorted.sort_by_key(|n| n[1..].parse::<usize>().unwrap());
    assert_eq!(names, sorted);
    let header = fs::read_to_string(&reduced).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, format!("{},class", names.join(",")));

    let out = evsel(&["prefilter", "--data", data.to_str().unwrap(), "--k", "99", "--out", "x.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn experiment_with_config_and_override() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("exp.conf");
    fs::write(
        &config,
        "# small run\nsynth_samples = 40\nsynth_informative = 2\nsynth_noise = 3\nlambda = 0\n",
    )
    .unwrap();
    let report = dir.path().join("report.csv");
    let out = evsel(&[
        "--threads",
        "2",
        "experiment",
        "--config",
        config.to_str().unwrap(),
        "--synth-noise",
        "2",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = stdout(&out);
    assert!(summary.contains("sbg+"), "{summary}");
    // λ = 0 makes the two columns identical
    assert!(summary.contains("test error +0.0%, subset size +0.0"), "{summary}");
    let text = fs::read_to_string(&report).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with(|c: char| c.is_ascii_digit())).count(), 20);

    let out = evsel(&["experiment", "--config", config.to_str().unwrap(), "--lambda", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = evsel(&["experiment", "--lda-gamma", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), 2, 5);
    let run = |threads: &str| {
        let out = evsel(&["--threads", threads, "select", "--data", data.to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
        stdout(&out)
    };
    assert_eq!(run("1"), run("4"));
}
