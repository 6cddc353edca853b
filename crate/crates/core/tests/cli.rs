mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use actgram::data_io::{load_report, write_trajectory};
use actgram::trajectory::Trajectory;
use actgram::Vec3;

fn actgram(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_actgram"))
        .args(args)
        .env_remove(actgram::cli::DATA_DIR_ENV)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// 10 failure and 10 success trials on disk.
fn corpus(dir: &Path) {
    for (kind, seed) in [("controlled_failure", "7"), ("smooth_approach", "8")] {
        let o = actgram(&[
            "synth",
            "--kind",
            kind,
            "--n",
            "10",
            "--seed",
            seed,
            "--out",
            s(dir),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
}

#[test]
fn synth_writes_a_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let o = actgram(&[
        "synth",
        "--kind",
        "controlled_failure",
        "--n",
        "20",
        "--seed",
        "7",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let count = |ext: &str| {
        fs::read_dir(&out)
            .unwrap()
            .filter(|e| {
                e.as_ref()
                    .unwrap()
                    .path()
                    .extension()
                    .is_some_and(|x| x == ext)
            })
            .count()
    };
    assert_eq!(count("csv"), 20);
    assert_eq!(count("seg"), 20);
}

#[test]
fn encode_straight_line_is_all_forward() {
    let dir = tempfile::tempdir().unwrap();
    let line: Vec<Vec3> = (0..12)
        .map(|i| Vec3::new(i as f64, 2.0 * i as f64, 0.5))
        .collect();
    write_trajectory(
        &Trajectory::from_points("line", common::from_positions(&line)).unwrap(),
        dir.path(),
    )
    .unwrap();
    let out = dir.path().join("g");
    let o = actgram(&[
        "encode",
        "--in",
        s(&dir.path().join("line.csv")),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read_to_string(out.join("line.txt")).unwrap(),
        ["0"; 10].join(",")
    );
}

#[test]
fn encode_helix_with_aff_turns() {
    let dir = tempfile::tempdir().unwrap();
    let (helix, _) = common::helix(
        std::f64::consts::FRAC_PI_2 * 0.8,
        5f64.to_radians(),
        1.0,
        100,
    );
    write_trajectory(
        &Trajectory::from_points("helix", helix).unwrap(),
        dir.path(),
    )
    .unwrap();
    let out = dir.path().join("g");
    let o = actgram(&[
        "encode",
        "--in",
        s(&dir.path().join("helix.csv")),
        "--out",
        s(&out),
        "--mode",
        "aff",
        "--base",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("helix.txt")).unwrap();
    assert!(text.split(',').any(|v| v != "0"), "{text}");
}

#[test]
fn missing_input_names_the_path() {
    let o = actgram(&["encode", "--in", "/definitely/not/here", "--out", "/tmp/x"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/definitely/not/here"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(
        actgram(&["encode", "--mode", "sideways", "--in", "x", "--out", "y"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(actgram(&["frobnicate"]).status.code(), Some(1));
    // --in has no default without the environment variable
    assert_eq!(actgram(&["encode", "--out", "y"]).status.code(), Some(1));
    assert_eq!(actgram(&["--help"]).status.code(), Some(0));
}

#[test]
fn data_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    corpus(dir.path());
    let out = dir.path().join("g");
    let o = Command::new(env!("CARGO_BIN_EXE_actgram"))
        .args(["encode", "--out", s(&out)])
        .env(actgram::cli::DATA_DIR_ENV, dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_dir(&out).unwrap().count(), 20);
}

#[test]
fn evaluate_prints_summary_and_repeats_exactly() {
    let dir = tempfile::tempdir().unwrap();
    corpus(dir.path());
    let run = |name: &str| {
        let report = dir.path().join(name);
        let o = actgram(&[
            "evaluate",
            "--in",
            s(dir.path()),
            "--out",
            s(&report),
            "--k-max",
            "6",
            "--repeats",
            "3",
            "--seed",
            "4",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        (stdout(&o), fs::read(&report).unwrap())
    };
    let (text, a) = run("a.json");
    let (_, b) = run("b.json");
    assert_eq!(a, b);
    for row in ["avg 100.00", "min 100.00", "max 100.00"] {
        assert!(text.contains(row), "{text}");
    }
    let report = load_report(&dir.path().join("a.json")).unwrap();
    assert_eq!(report.cells.len(), 5 * 3);
}

#[test]
fn k_above_trial_count_is_capped_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    corpus(dir.path());
    let report = dir.path().join("r.json");
    let o = actgram(&[
        "evaluate",
        "--in",
        s(dir.path()),
        "--out",
        s(&report),
        "--k-min",
        "19",
        "--k-max",
        "25",
        "--repeats",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("capped"), "{}", stderr(&o));
    let report = load_report(&report).unwrap();
    assert!(report.cells.iter().all(|c| c.folds <= 20));
    assert_eq!(report.warnings.len(), 1);
}

#[test]
fn evaluate_single_class_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = actgram(&[
        "synth",
        "--kind",
        "smooth_approach",
        "--n",
        "6",
        "--out",
        s(dir.path()),
    ]);
    assert!(o.status.success());
    let o = actgram(&[
        "evaluate",
        "--in",
        s(dir.path()),
        "--out",
        s(&dir.path().join("r.json")),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn colormap_has_one_row_per_trial() {
    let dir = tempfile::tempdir().unwrap();
    let o = actgram(&[
        "synth",
        "--kind",
        "sharp_contact",
        "--n",
        "10",
        "--seed",
        "3",
        "--out",
        s(dir.path()),
    ]);
    assert!(o.status.success());
    let pgm = dir.path().join("map.pgm");
    let o = actgram(&["colormap", "--in", s(dir.path()), "--out", s(&pgm)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let bytes = fs::read(&pgm).unwrap();
    let header = b"P5\n109 10\n255\n";
    assert_eq!(&bytes[..header.len()], header);
    assert_eq!(bytes.len(), header.len() + 109 * 10);
}

#[test]
fn train_then_predict_held_out() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train");
    let held = dir.path().join("held");
    corpus(&train);
    for (kind, seed) in [("controlled_failure", "70"), ("smooth_approach", "80")] {
        let o = actgram(&[
            "synth",
            "--kind",
            kind,
            "--n",
            "2",
            "--seed",
            seed,
            "--out",
            s(&held),
        ]);
        assert!(o.status.success());
    }
    let model = dir.path().join("model.json");
    let o = actgram(&["train", "--in", s(&train), "--out", s(&model)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = actgram(&["predict", "--in", s(&held), "--model", s(&model)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    for line in lines {
        let fields: Vec<&str> = line.split('\t').collect();
        let expected = if fields[0].starts_with("controlled_failure") {
            "failure"
        } else {
            "success"
        };
        assert_eq!(fields[1], expected, "{line}");
    }
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    corpus(dir.path());
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "kernel = \"rbf\"\nmode = \"aff\"\nk_max = 3\nrepeats = 2\nseed = 5\n",
    )
    .unwrap();
    let report = dir.path().join("r.json");
    let o = actgram(&[
        "--config",
        s(&cfg),
        "evaluate",
        "--in",
        s(dir.path()),
        "--out",
        s(&report),
        "--mode",
        "ff",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = load_report(&report).unwrap();
    assert_eq!(r.kernel, "rbf");
    assert_eq!(r.mode, actgram::frame::FrameMode::Ff);
    assert_eq!((r.repeats, r.seed, r.per_k.len()), (2, 5, 2));

    fs::write(&cfg, "kernal = \"rbf\"\n").unwrap();
    let o = actgram(&[
        "--config",
        s(&cfg),
        "evaluate",
        "--in",
        s(dir.path()),
        "--out",
        s(&report),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn align_writes_equal_length_grammars() {
    let dir = tempfile::tempdir().unwrap();
    corpus(dir.path());
    for method in ["cut", "resample"] {
        let out = dir.path().join(method);
        let o = actgram(&[
            "align",
            "--in",
            s(dir.path()),
            "--out",
            s(&out),
            "--align",
            method,
            "--scope",
            "behavior",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let lengths: Vec<usize> = fs::read_dir(&out)
            .unwrap()
            .map(|e| {
                fs::read_to_string(e.unwrap().path())
                    .unwrap()
                    .split(',')
                    .count()
            })
            .collect();
        assert_eq!(lengths.len(), 80);
        assert!(
            lengths.windows(2).all(|w| w[0] == w[1]),
            "{method}: {lengths:?}"
        );
    }
}
