use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dqml(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dqml"))
        .args(args)
        .current_dir(dir)
        .env_remove("DQML_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn synth_sep(dir: &Path, name: &str, sep: &str) {
    let args = [
        "synth",
        "--classes",
        "3",
        "--dim",
        "10",
        "--per-class",
        "20",
        "--sep",
        sep,
        "--sigma",
        "1",
        "--seed",
        "42",
        "-o",
        name,
    ];
    let out = dqml(&args, dir);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

fn synth(dir: &Path, name: &str) {
    synth_sep(dir, name, "5");
}

#[test]
fn synth_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "a.csv");
    synth(dir.path(), "b.csv");
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 60);
    let meta = fs::read_to_string(dir.path().join("a.csv.meta")).unwrap();
    assert!(meta.contains("seed 42"));
}

#[test]
fn synth_rejects_zero_sigma() {
    let dir = tempfile::tempdir().unwrap();
    let out = dqml(
        &[
            "synth",
            "--classes",
            "3",
            "--dim",
            "2",
            "--per-class",
            "5",
            "--sigma",
            "0",
            "-o",
            "x.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn train_prints_json_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "d.csv");
    let out = dqml(
        &["train", "--data", "d.csv", "--lambda", "1", "-o", "m.dqml"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 4);
    for (c, line) in lines[..3].iter().enumerate() {
        assert_eq!(line["class"], c + 1);
        for key in [
            "iterations",
            "dual_objective",
            "primal_objective",
            "gap",
            "converged",
        ] {
            assert!(line.get(key).is_some(), "missing {key}");
        }
        let gap = line["gap"].as_f64().unwrap().abs();
        let primal = line["primal_objective"].as_f64().unwrap().abs();
        assert!(gap <= 1e-5 * primal.max(1.0));
    }
    assert_eq!(lines[3]["selected_lambda"], 1.0);
    assert!(dir.path().join("m.dqml").exists());
}

#[test]
fn train_echoes_cross_validated_lambda() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "d.csv");
    let out = dqml(
        &[
            "train",
            "--data",
            "d.csv",
            "--cv-grid",
            "0.1,1,10",
            "--folds",
            "10",
            "-o",
            "m.dqml",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let last: serde_json::Value =
        serde_json::from_str(stdout(&out).lines().last().unwrap()).unwrap();
    let chosen = last["selected_lambda"].as_f64().unwrap();
    assert!([0.1, 1.0, 10.0].contains(&chosen));
    assert_eq!(last["cv"].as_array().unwrap().len(), 3);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dqml(
        &["train", "--data", "nope.csv", "--lambda", "1", "-o", "m"],
        dir.path(),
    );
    assert_eq!(code(&missing), 2);
    let bad_lambda = dqml(
        &["train", "--data", "d.csv", "--lambda", "-1", "-o", "m"],
        dir.path(),
    );
    assert_eq!(code(&bad_lambda), 2);
    let bad_folds = dqml(
        &[
            "train",
            "--data",
            "d.csv",
            "--cv-grid",
            "1",
            "--folds",
            "1",
            "-o",
            "m",
        ],
        dir.path(),
    );
    assert_eq!(code(&bad_folds), 2);
    fs::write(dir.path().join("bad.csv"), "1,0.5\n2,abc\n").unwrap();
    let parse = dqml(
        &["train", "--data", "bad.csv", "--lambda", "1", "-o", "m"],
        dir.path(),
    );
    assert_eq!(code(&parse), 2);
}

#[test]
fn infeasible_class_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("z.csv"), "1,1,0\n1,0,1\n2,0,0\n2,1,1\n").unwrap();
    let out = dqml(
        &["train", "--data", "z.csv", "--lambda", "1", "-o", "m"],
        dir.path(),
    );
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("class 2"));
}

#[test]
fn eval_reports_both_rules() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "d.csv");
    assert_eq!(
        code(&dqml(
            &["train", "--data", "d.csv", "--lambda", "1", "-o", "m"],
            dir.path()
        )),
        0
    );
    let out = dqml(&["eval", "--model", "m", "--data", "d.csv"], dir.path());
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("max") && text.contains("nn_cosine"), "{text}");

    let json = dqml(
        &["eval", "--model", "m", "--data", "d.csv", "--json"],
        dir.path(),
    );
    let rules: Vec<serde_json::Value> = stdout(&json)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rules.len(), 2);
    assert_eq!(rules[0]["total"], 60);
}

#[test]
fn protocol_on_separable_data() {
    let dir = tempfile::tempdir().unwrap();
    synth_sep(dir.path(), "d.csv", "30");
    let out = dqml(
        &[
            "eval",
            "--protocol",
            "--data",
            "d.csv",
            "--m-train",
            "5",
            "--reps",
            "3",
            "--folds",
            "3",
            "--json",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["mean_error_max"], 0.0);
    assert_eq!(v["mean_error_nn_cosine"], 0.0);
    assert_eq!(v["std_error_nn_cosine"], 0.0);
    assert_eq!(v["repetitions"].as_array().unwrap().len(), 3);
}

#[test]
fn single_repetition_has_zero_std() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "d.csv");
    let out = dqml(
        &[
            "eval",
            "--protocol",
            "--data",
            "d.csv",
            "--m-train",
            "8",
            "--reps",
            "1",
            "--lambda",
            "1",
            "--json",
        ],
        dir.path(),
    );
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["std_error_max"], 0.0);
    assert_eq!(v["std_error_nn_cosine"], 0.0);
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "d.csv");
    let args = [
        "eval",
        "--protocol",
        "--data",
        "d.csv",
        "--m-train",
        "8",
        "--reps",
        "4",
        "--folds",
        "4",
        "--json",
    ];
    let one = dqml(&[&["--threads", "1"][..], &args[..]].concat(), dir.path());
    let four = dqml(&[&["--threads", "4"][..], &args[..]].concat(), dir.path());
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn features_and_classify() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "d.csv");
    assert_eq!(
        code(&dqml(
            &["train", "--data", "d.csv", "--lambda", "1", "-o", "m"],
            dir.path()
        )),
        0
    );
    let f = dqml(&["features", "--model", "m", "--data", "d.csv"], dir.path());
    assert_eq!(code(&f), 0);
    let text = stdout(&f);
    assert_eq!(text.lines().count(), 60);
    assert!(text.lines().all(|l| l.split(',').count() == 4));
    let c = dqml(
        &[
            "classify", "--model", "m", "--data", "d.csv", "--rule", "both",
        ],
        dir.path(),
    );
    assert_eq!(code(&c), 0);
    assert!(stdout(&c).starts_with("index,label,max,nn_cosine\n"));
}

#[test]
fn corrupted_model_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "d.csv");
    dqml(
        &["train", "--data", "d.csv", "--lambda", "1", "-o", "m"],
        dir.path(),
    );
    let path = dir.path().join("m");
    let mut bytes = fs::read(&path).unwrap();
    bytes[30] ^= 0xff;
    fs::write(&path, bytes).unwrap();
    let out = dqml(&["eval", "--model", "m", "--data", "d.csv"], dir.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn diagnose_random_instances_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = dqml(
        &[
            "diagnose",
            "--random-instances",
            "20",
            "--dim",
            "6",
            "--seed",
            "7",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn diagnose_grid_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dqml(
        &[
            "diagnose",
            "--random-instances",
            "5",
            "--dim",
            "2",
            "--grid-oracle",
            "--step",
            "0.01",
            "--json",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let grid: Vec<serde_json::Value> = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .filter(|v| v["check"] == "grid_oracle")
        .collect();
    assert_eq!(grid.len(), 5);
    assert!(grid.iter().all(|v| v["value"].as_f64().unwrap() <= 0.02));
}

#[test]
fn diagnose_penalty_oracle_and_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let out = dqml(
        &[
            "diagnose",
            "--random-instances",
            "3",
            "--dim",
            "4",
            "--penalty-oracle",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    synth(dir.path(), "d.csv");
    let out = dqml(
        &["diagnose", "--data", "d.csv", "--lambda", "1"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn perturbed_gradient_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let out = dqml(
        &[
            "diagnose",
            "--random-instances",
            "3",
            "--dim",
            "5",
            "--perturb-grad",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 4);
    assert!(stdout(&out).contains("violations"));
}
