//! End-to-end tests of the landscope binary: exit codes, flag handling,
//! output files, and determinism guarantees.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use landscope::report::sha256_hex;
use landscope::synthetic;

fn bin() -> Command {
    let mut command = Command::new(env!("CARGO_BIN_EXE_landscope"));
    // Ambient configuration must not leak into the tests.
    command.env_remove("LANDSCOPE_SEED");
    command
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf-8 stderr")
}

/// Saves a synthetic dataset and returns its (csv, meta) path pair.
fn saved(dir: &Path, name: &str, ds: &landscope::dataset::Dataset) -> (PathBuf, PathBuf) {
    let csv = dir.join(format!("{name}.csv"));
    let meta = dir.join(format!("{name}.meta"));
    ds.save(&csv, &meta).expect("save dataset");
    (csv, meta)
}

fn path_str(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

#[test]
fn analyze_writes_report_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, meta) = saved(dir.path(), "d3", &synthetic::d3());
    let out = dir.path().join("report.json");

    let output = run(&[
        "analyze",
        "--dataset",
        path_str(&csv),
        "--meta",
        path_str(&meta),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));

    let report = std::fs::read_to_string(&out).unwrap();
    assert!(report.contains("\"fdc_tier\": \"guided\""), "{report}");
    assert!(report.contains("\"global_basin_easy\": true"));

    let manifest_path = dir.path().join("report.manifest.json");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    let artifacts = manifest["artifacts"].as_array().unwrap();
    assert_eq!(artifacts.len(), 1);
    assert_eq!(artifacts[0]["path"], "report.json");
    assert_eq!(artifacts[0]["kind"], "landscape");
    assert_eq!(artifacts[0]["sha256"], sha256_hex(report.as_bytes()));
}

#[test]
fn analyze_without_out_prints_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, meta) = saved(dir.path(), "d3", &synthetic::d3());
    let output = run(&["analyze", "--dataset", path_str(&csv), "--meta", path_str(&meta)]);
    assert_eq!(exit_code(&output), 0);
    assert!(stdout(&output).contains("\"fdc_tier\": \"guided\""));
}

#[test]
fn several_datasets_emit_into_a_directory_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (csv_a, meta_a) = saved(dir.path(), "d3", &synthetic::d3());
    let (csv_b, meta_b) = saved(dir.path(), "d3b", &synthetic::d3b());
    let out = dir.path().join("reports");

    let output = run(&[
        "analyze",
        "--dataset",
        path_str(&csv_a),
        "--meta",
        path_str(&meta_a),
        "--dataset",
        path_str(&csv_b),
        "--meta",
        path_str(&meta_b),
        "--out",
        path_str(&out),
        "--format",
        "markdown",
    ]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap())
            .unwrap();
    let artifacts = manifest["artifacts"].as_array().unwrap();
    assert_eq!(artifacts.len(), 2);
    for artifact in artifacts {
        let name = artifact["path"].as_str().unwrap();
        assert!(name.ends_with(".md"), "{name}");
        let bytes = std::fs::read(out.join(name)).unwrap();
        assert_eq!(artifact["sha256"], sha256_hex(&bytes));
    }
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, meta) = saved(dir.path(), "d3", &synthetic::d3());

    // Unknown subcommand, unknown flag, missing required flag.
    assert_eq!(exit_code(&run(&["plot"])), 1);
    assert_eq!(
        exit_code(&run(&["analyze", "--dataset", path_str(&csv), "--meta", path_str(&meta), "--frobnicate"])),
        1
    );
    assert_eq!(exit_code(&run(&["analyze"])), 1);

    // Domain-level usage problems.
    let unknown_tuner = run(&[
        "tune",
        "--dataset",
        path_str(&csv),
        "--meta",
        path_str(&meta),
        "--tuner",
        "anneal",
    ]);
    assert_eq!(exit_code(&unknown_tuner), 1);
    assert!(stderr(&unknown_tuner).contains("anneal"));

    let zero_jobs = run(&[
        "analyze",
        "--dataset",
        path_str(&csv),
        "--meta",
        path_str(&meta),
        "--jobs",
        "0",
    ]);
    assert_eq!(exit_code(&zero_jobs), 1);

    let bad_mode = run(&[
        "dynamic",
        "--dataset",
        path_str(&csv),
        "--meta",
        path_str(&meta),
        "--dataset",
        path_str(&csv),
        "--meta",
        path_str(&meta),
        "--mode",
        "carry",
    ]);
    assert_eq!(exit_code(&bad_mode), 1);
    assert!(stderr(&bad_mode).contains("carry"));
}

#[test]
fn help_exits_0_and_documents_defaults() {
    let top = run(&["--help"]);
    assert_eq!(exit_code(&top), 0);
    let text = stdout(&top);
    for subcommand in ["analyze", "sensitivity", "tune", "compare", "dynamic", "agreement"] {
        assert!(text.contains(subcommand), "missing {subcommand}");
    }

    let analyze = stdout(&run(&["analyze", "--help"]));
    assert!(analyze.contains("[default: 0.21]"), "{analyze}");
    assert!(analyze.contains("the option count n"), "{analyze}");
    assert!(analyze.contains("[default: 0]"), "{analyze}");
    assert!(analyze.contains("LANDSCOPE_SEED"), "{analyze}");

    let tune = stdout(&run(&["tune", "--help"]));
    assert!(tune.contains("[default: 80]"), "{tune}");
    assert!(tune.contains("[default: 30]"), "{tune}");
    assert!(tune.contains("[default: 0]"), "{tune}");

    let sensitivity = stdout(&run(&["sensitivity", "--help"]));
    assert!(sensitivity.contains("[default: 5]"), "{sensitivity}");

    assert_eq!(exit_code(&run(&["--version"])), 0);
}

#[test]
fn missing_input_files_exit_2_and_name_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let (_, meta) = saved(dir.path(), "d3", &synthetic::d3());
    let missing = dir.path().join("absent.csv");
    let output = run(&[
        "analyze",
        "--dataset",
        path_str(&missing),
        "--meta",
        path_str(&meta),
    ]);
    assert_eq!(exit_code(&output), 2);
    assert!(stderr(&output).contains("absent.csv"), "{}", stderr(&output));
}

#[test]
fn sensitivity_on_a_constant_option_exits_2() {
    use landscope::dataset::{Dataset, Objective, OptionDecl, OptionKind, OptionValue};

    let decls = vec![
        OptionDecl {
            name: "a".to_string(),
            kind: OptionKind::Boolean,
            declared_domain: Some(vec![OptionValue::Bool(false), OptionValue::Bool(true)]),
            taxonomy: None,
        },
        OptionDecl {
            name: "k".to_string(),
            kind: OptionKind::Enumerated,
            declared_domain: Some(vec![OptionValue::Enum("on".to_string())]),
            taxonomy: None,
        },
    ];
    let rows = vec![
        (vec![OptionValue::Bool(false), OptionValue::Enum("on".to_string())], 1.0),
        (vec![OptionValue::Bool(true), OptionValue::Enum("on".to_string())], 2.0),
    ];
    let ds = Dataset::from_values("bench", "const", Objective::Minimize, decls, rows).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let (csv, meta) = saved(dir.path(), "const", &ds);
    let output = run(&["sensitivity", "--dataset", path_str(&csv), "--meta", path_str(&meta)]);
    assert_eq!(exit_code(&output), 2, "stderr: {}", stderr(&output));
    assert!(stderr(&output).contains("nothing to partition"), "{}", stderr(&output));
}

#[test]
fn strict_turns_degeneracy_into_exit_3() {
    use landscope::dataset::Objective;

    let flat = synthetic::cube_with_names("bench", "flat", Objective::Minimize, &["a", "b", "c"], |_| 5.0);
    let dir = tempfile::tempdir().unwrap();
    let (csv, meta) = saved(dir.path(), "flat", &flat);
    let out = dir.path().join("flat.json");

    let relaxed = run(&[
        "analyze",
        "--dataset",
        path_str(&csv),
        "--meta",
        path_str(&meta),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(exit_code(&relaxed), 0, "stderr: {}", stderr(&relaxed));

    let strict = run(&[
        "analyze",
        "--dataset",
        path_str(&csv),
        "--meta",
        path_str(&meta),
        "--out",
        path_str(&out),
        "--strict",
    ]);
    assert_eq!(exit_code(&strict), 3, "stderr: {}", stderr(&strict));

    // The report is still written, carrying the error markers.
    let report = std::fs::read_to_string(&out).unwrap();
    assert!(report.contains("zero variance"), "{report}");
}

#[test]
fn seed_env_var_applies_only_when_the_flag_is_absent() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, meta) = saved(dir.path(), "d3", &synthetic::d3());
    let tune_args = |out: &Path| {
        vec![
            "tune".to_string(),
            "--dataset".to_string(),
            csv.display().to_string(),
            "--meta".to_string(),
            meta.display().to_string(),
            "--tuner".to_string(),
            "rs".to_string(),
            "--budget".to_string(),
            "6".to_string(),
            "--repeats".to_string(),
            "2".to_string(),
            "--out".to_string(),
            out.display().to_string(),
        ]
    };

    let flag_7 = dir.path().join("flag7.json");
    let mut args = tune_args(&flag_7);
    args.extend(["--seed".to_string(), "7".to_string()]);
    assert_eq!(exit_code(&bin().args(&args).output().unwrap()), 0);

    let env_7 = dir.path().join("env7.json");
    let output = bin()
        .args(tune_args(&env_7))
        .env("LANDSCOPE_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 0);
    assert_eq!(
        std::fs::read(&flag_7).unwrap(),
        std::fs::read(&env_7).unwrap(),
        "env seed must act like the flag"
    );

    let flag_wins = dir.path().join("flagwins.json");
    let mut args = tune_args(&flag_wins);
    args.extend(["--seed".to_string(), "7".to_string()]);
    let output = bin().args(&args).env("LANDSCOPE_SEED", "9").output().unwrap();
    assert_eq!(exit_code(&output), 0);
    assert_eq!(
        std::fs::read(&flag_7).unwrap(),
        std::fs::read(&flag_wins).unwrap(),
        "the flag overrides the environment"
    );

    let env_9 = dir.path().join("env9.json");
    let output = bin()
        .args(tune_args(&env_9))
        .env("LANDSCOPE_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 0);
    assert_ne!(
        std::fs::read(&flag_7).unwrap(),
        std::fs::read(&env_9).unwrap(),
        "a different env seed must change the trajectories"
    );
}

#[test]
fn reruns_and_job_counts_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cube = synthetic::iid_uniform_cube(6, 42);
    let (csv, meta) = saved(dir.path(), "cube", &cube);

    let tune = |out: &Path, jobs: &str| {
        let output = run(&[
            "tune",
            "--dataset",
            path_str(&csv),
            "--meta",
            path_str(&meta),
            "--tuner",
            "rs",
            "--tuner",
            "hc",
            "--budget",
            "20",
            "--repeats",
            "6",
            "--seed",
            "3",
            "--jobs",
            jobs,
            "--out",
            path_str(out),
        ]);
        assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));
    };

    let first = dir.path().join("first.csv");
    let second = dir.path().join("second.csv");
    let parallel = dir.path().join("parallel.csv");
    tune(&first, "1");
    tune(&second, "1");
    tune(&parallel, "4");
    let bytes = std::fs::read(&first).unwrap();
    assert_eq!(bytes, std::fs::read(&second).unwrap());
    assert_eq!(bytes, std::fs::read(&parallel).unwrap());

    let analyze = |out: &Path, jobs: &str| {
        let output = run(&[
            "analyze",
            "--dataset",
            path_str(&csv),
            "--meta",
            path_str(&meta),
            "--jobs",
            jobs,
            "--out",
            path_str(out),
        ]);
        assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));
    };
    let serial = dir.path().join("serial.json");
    let threaded = dir.path().join("threaded.json");
    analyze(&serial, "1");
    analyze(&threaded, "4");
    assert_eq!(std::fs::read(&serial).unwrap(), std::fs::read(&threaded).unwrap());
}

#[test]
fn tune_produces_tuners_times_repeats_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, meta) = saved(dir.path(), "d3", &synthetic::d3());
    let out = dir.path().join("runs.json");
    let output = run(&[
        "tune",
        "--dataset",
        path_str(&csv),
        "--meta",
        path_str(&meta),
        "--tuner",
        "hc",
        "--tuner",
        "rs",
        "--budget",
        "80",
        "--repeats",
        "30",
        "--seed",
        "7",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let runs = value["payload"].as_array().unwrap();
    assert_eq!(runs.len(), 60);
    assert_eq!(runs[0]["tuner"], "hc");
    assert_eq!(runs[59]["tuner"], "rs");
}

#[test]
fn compare_builds_a_verdict_per_workload() {
    let dir = tempfile::tempdir().unwrap();
    let cube = synthetic::unimodal_cube(6);
    let (csv, meta) = saved(dir.path(), "zeromax", &cube);

    let tune = |tuner: &str, out: &Path| {
        let output = run(&[
            "tune",
            "--dataset",
            path_str(&csv),
            "--meta",
            path_str(&meta),
            "--tuner",
            tuner,
            "--budget",
            "15",
            "--repeats",
            "8",
            "--seed",
            "1",
            "--format",
            "csv",
            "--out",
            path_str(out),
        ]);
        assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));
    };
    let hc = dir.path().join("hc.csv");
    let rs = dir.path().join("rs.csv");
    tune("hc", &hc);
    tune("rs", &rs);

    let out = dir.path().join("verdicts.json");
    let output = run(&[
        "compare",
        path_str(&hc),
        path_str(&rs),
        "--system",
        "bench",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(value["payload"]["name_a"], "hc");
    assert_eq!(value["payload"]["name_b"], "rs");
    let rows = value["payload"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["workload"], "zeromax");
    let label = rows[0]["label"].as_str().unwrap();
    assert!(["better", "similar", "worse"].contains(&label), "{label}");
}

#[test]
fn dynamic_csv_carries_position_and_mode_for_each_workload() {
    let dir = tempfile::tempdir().unwrap();
    let (first, second) = synthetic::offset_pair(5, 11, 2.0);
    let (csv_a, meta_a) = saved(dir.path(), "w1", &first);
    let (csv_b, meta_b) = saved(dir.path(), "w2", &second);
    let out = dir.path().join("dynamic.csv");

    let output = run(&[
        "dynamic",
        "--dataset",
        path_str(&csv_a),
        "--meta",
        path_str(&meta_a),
        "--dataset",
        path_str(&csv_b),
        "--meta",
        path_str(&meta_b),
        "--mode",
        "transfer",
        "--budget",
        "25",
        "--repeats",
        "2",
        "--seed",
        "5",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));

    let text = std::fs::read_to_string(&out).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "run_seed,tuner,workload,eval_index,configuration,performance,best_so_far,regret,workload_position,mode"
    );
    assert!(text.contains(",transfer"));
    assert!(text.lines().skip(1).all(|line| line.ends_with(",transfer")));
}

#[test]
fn agreement_matches_the_library_kappa() {
    let dir = tempfile::tempdir().unwrap();
    let human_a = dir.path().join("alice.csv");
    let human_b = dir.path().join("bob.csv");
    let consensus = dir.path().join("consensus.csv");
    let llm = dir.path().join("model.csv");
    std::fs::write(&human_a, "option,label\no1,core\no2,cpu\no3,core\no4,memory\n").unwrap();
    std::fs::write(&human_b, "option,label\no1,core\no2,cpu\no3,utility\no4,memory\n").unwrap();
    std::fs::write(&consensus, "option,label\no1,core\no2,cpu\no3,core\no4,memory\n").unwrap();
    std::fs::write(&llm, "option,label\no1,core\no2,storage\no3,core\no4,memory\n").unwrap();

    let out = dir.path().join("agreement.json");
    let output = run(&[
        "agreement",
        "--human-a",
        path_str(&human_a),
        "--human-b",
        path_str(&human_b),
        "--consensus",
        path_str(&consensus),
        "--llm",
        path_str(&llm),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));

    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let labels_a = ["core", "cpu", "core", "memory"];
    let labels_b = ["core", "cpu", "utility", "memory"];
    let expected_human = landscope::stats::cohens_kappa(&labels_a, &labels_b).unwrap().value;
    assert_eq!(value["payload"]["human_kappa"].as_f64().unwrap(), expected_human);
    assert_eq!(value["payload"]["llm"][0]["name"], "model");

    // Model labels without a consensus file are a usage error.
    let no_consensus = run(&[
        "agreement",
        "--human-a",
        path_str(&human_a),
        "--human-b",
        path_str(&human_b),
        "--llm",
        path_str(&llm),
    ]);
    assert_eq!(exit_code(&no_consensus), 1);
}
