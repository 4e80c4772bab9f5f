//! End-to-end runs of the `hdsc` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hdsc::image::{read_image, write_image, Image};
use hdsc::kv::KvDoc;
use hdsc::segmentation::SegmentationModel;

fn hdsc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdsc")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixture(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(rel)
        .display()
        .to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn train_eval5(out: &Path) -> PathBuf {
    let o = hdsc(&[
        "train",
        "--images",
        &fixture("eval5/images"),
        "--annotations",
        &fixture("eval5/train.csv"),
        "--out",
        s(out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out.join("model.cfg")
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&hdsc(&[])), 1);
    assert_eq!(code(&hdsc(&["frobnicate"])), 1);
    assert_eq!(code(&hdsc(&["eval", "--bogus"])), 1);
    assert_eq!(code(&hdsc(&["eval", "--iou", "x"])), 1);
    assert_eq!(code(&hdsc(&["eval", "--method", "sobel"])), 1);
    assert_eq!(code(&hdsc(&["eval", "--mode", "fuzzy"])), 1);
    assert_eq!(code(&hdsc(&["eval", "--iou", "1.5"])), 1);
    // missing required paths
    assert_eq!(code(&hdsc(&["eval"])), 1);
    assert_eq!(code(&hdsc(&["--help"])), 0);
}

#[test]
fn config_file_with_unknown_key_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "colour = red\n").unwrap();
    let o = hdsc(&["eval", "--config", s(&cfg)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("colour"));
}

#[test]
fn empty_image_directory_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let images = dir.path().join("images");
    std::fs::create_dir(&images).unwrap();
    let o = hdsc(&[
        "eval",
        "--images",
        s(&images),
        "--gt",
        &fixture("eval5/gt.csv"),
        "--method",
        "hsv",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("no images processed"));
}

#[test]
fn train_writes_model_that_reloads_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let model_path = train_eval5(dir.path());
    let text = std::fs::read_to_string(&model_path).unwrap();
    let model = SegmentationModel::from_kv(&KvDoc::parse(&text, "model").unwrap()).unwrap();
    assert_eq!(model.to_kv().to_text(), text);
    assert!(dir.path().join("baselines.cfg").exists());
}

#[test]
fn train_is_independent_of_annotation_order() {
    let dir = tempfile::tempdir().unwrap();
    let a = train_eval5(&dir.path().join("a"));
    let text = std::fs::read_to_string(fixture("eval5/train.csv")).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.reverse();
    lines.rotate_left(7);
    let shuffled = dir.path().join("shuffled.csv");
    std::fs::write(&shuffled, lines.join("\n")).unwrap();
    let out_b = dir.path().join("b");
    let o = hdsc(&[
        "train",
        "--images",
        &fixture("eval5/images"),
        "--annotations",
        s(&shuffled),
        "--out",
        s(&out_b),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(out_b.join("model.cfg")).unwrap());
}

#[test]
fn train_without_blue_pixels_fails() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("eval5/train.csv")).unwrap();
    let red_only: String = text.lines().filter(|l| !l.ends_with("blue")).map(|l| format!("{l}\n")).collect();
    let ann = dir.path().join("red.csv");
    std::fs::write(&ann, red_only).unwrap();
    let o = hdsc(&["train", "--images", &fixture("eval5/images"), "--annotations", s(&ann), "--out", s(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("class blue has no training pixels"), "{}", stderr(&o));
}

#[test]
fn segment_black_image_gives_black_mask() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_eval5(&dir.path().join("m"));
    let black = dir.path().join("black.ppm");
    write_image(&black, &Image::filled(40, 30, [0u8; 3])).unwrap();
    let o = hdsc(&["segment", "--model", s(&model), "--out", s(dir.path()), s(&black)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(o.stdout.is_empty(), "expected no candidates");
    let mask = read_image(&dir.path().join("black_mask.ppm")).unwrap();
    assert!(mask.pixels().iter().all(|p| *p == [0, 0, 0]));
}

#[test]
fn segment_red_disc_and_repeat_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_eval5(&dir.path().join("m"));
    let run = |out: &Path| {
        let o = hdsc(&["segment", "--model", s(&model), "--out", s(out), &fixture("eval5/images/00001.ppm")]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        String::from_utf8(o.stdout).unwrap()
    };
    let first = run(&dir.path().join("one"));
    // disc of diameter 28 at (30, 16)
    assert_eq!(first, "red;30;16;58;44\n");
    let second = run(&dir.path().join("two"));
    assert_eq!(first, second);
    for f in ["00001_mask.ppm", "00001_overlay.ppm"] {
        assert_eq!(
            std::fs::read(dir.path().join("one").join(f)).unwrap(),
            std::fs::read(dir.path().join("two").join(f)).unwrap()
        );
    }
}

#[test]
fn segment_unreadable_image_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_eval5(&dir.path().join("m"));
    let bad = dir.path().join("bad.ppm");
    std::fs::write(&bad, b"P3\n1 1\n255\n0 0 0\n").unwrap();
    let o = hdsc(&["segment", "--model", s(&model), "--out", s(dir.path()), s(&bad)]);
    assert_eq!(code(&o), 2);
    let o = hdsc(&["segment", "--model", "/nonexistent/model.cfg", &fixture("eval5/images/00001.ppm")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn detect_writes_ground_truth_format() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_eval5(&dir.path().join("m"));
    let o = hdsc(&[
        "detect",
        "--model",
        s(&model),
        "--out",
        s(dir.path()),
        &fixture("eval5/images/00001.ppm"),
        &fixture("eval5/images/00002.ppm"),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("detections.csv")).unwrap();
    assert_eq!(csv, "00001.ppm;30;16;58;44;red\n00002.ppm;40;20;60;40;blue\n");
}

#[test]
fn eval_fixture_matches_hand_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = hdsc(&[
        "eval",
        "--images",
        &fixture("eval5/images"),
        "--gt",
        &fixture("eval5/gt.csv"),
        "--annotations",
        &fixture("eval5/train.csv"),
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let jsonl = std::fs::read_to_string(dir.path().join("report.jsonl")).unwrap();
    let row: serde_json::Value = serde_json::from_str(jsonl.lines().next().unwrap()).unwrap();
    assert_eq!(row["method"], "hdsc");
    assert_eq!((row["tp"].as_u64(), row["fp"].as_u64(), row["fn"].as_u64()), (Some(3), Some(1), Some(2)));
    assert_eq!(row["precision"].as_f64(), Some(75.0));
    assert_eq!(row["recall"].as_f64(), Some(60.0));
}

#[test]
fn all_methods_gives_four_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = hdsc(&[
        "eval",
        "--all-methods",
        "--images",
        &fixture("eval5/images"),
        "--gt",
        &fixture("eval5/gt.csv"),
        "--annotations",
        &fixture("eval5/train.csv"),
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let jsonl = std::fs::read_to_string(dir.path().join("report.jsonl")).unwrap();
    let methods: Vec<String> = jsonl
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["method"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(methods, ["hsv", "red_enhance", "log_chromatic", "hdsc"]);
}

#[test]
fn external_rows_are_appended() {
    let dir = tempfile::tempdir().unwrap();
    let ext = dir.path().join("published.csv");
    std::fs::write(&ext, "HDSC;GTSDB;92.52;83.20\n").unwrap();
    let o = hdsc(&[
        "eval",
        "--images",
        &fixture("eval5/images"),
        "--gt",
        &fixture("eval5/gt.csv"),
        "--annotations",
        &fixture("eval5/train.csv"),
        "--external",
        s(&ext),
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(text.contains("dataset: GTSDB"));
    assert!(text.contains("92.52"));
}

#[test]
fn bad_image_is_recorded_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let images = dir.path().join("images");
    std::fs::create_dir(&images).unwrap();
    std::fs::copy(fixture("eval5/images/00001.ppm"), images.join("00001.ppm")).unwrap();
    std::fs::write(images.join("00002.ppm"), b"garbage").unwrap();
    let o = hdsc(&[
        "eval",
        "--method",
        "hsv",
        "--images",
        s(&images),
        "--gt",
        &fixture("eval5/gt.csv"),
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("00002.ppm"));
    let text = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(text.contains("# failed 00002.ppm"));
}

#[test]
fn compare_writes_pr_curve() {
    let dir = tempfile::tempdir().unwrap();
    let o = hdsc(&[
        "compare",
        "--images",
        &fixture("eval5/images"),
        "--gt",
        &fixture("eval5/gt.csv"),
        "--annotations",
        &fixture("eval5/train.csv"),
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let curve = std::fs::read_to_string(dir.path().join("pr_hdsc.txt")).unwrap();
    assert_eq!(curve.lines().count(), 1 + hdsc::pipeline::DEFAULT_SWEEP.len());
}

#[test]
fn synth_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = hdsc(&["synth", "--seed", "42", "--out", s(out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let files = |d: &Path| {
        let mut v: Vec<_> = std::fs::read_dir(d.join("images")).unwrap().map(|e| e.unwrap().path()).collect();
        v.sort();
        v.push(d.join("gt.csv"));
        v.push(d.join("train.csv"));
        v.into_iter().map(|p| std::fs::read(p).unwrap()).collect::<Vec<_>>()
    };
    let fa = files(&a);
    assert_eq!(fa, files(&b));
    // 4 scenes x 3 intensities, each with 3 red and 2 blue boxes
    let gt = std::fs::read_to_string(a.join("gt.csv")).unwrap();
    assert_eq!(gt.lines().count(), 12 * 5);
}
