//! Greedy IoU matching and the precision/recall report on the bundled
//! five-image fixture.
//!
//! cargo run --example evaluate_matches

use std::path::Path;

use hdsc::detection::BBox;
use hdsc::evaluation::{match_boxes, metrics_from_counts};
use hdsc::pipeline::{cmd_eval, RunConfig};

fn main() -> hdsc::Result<()> {
    let truths = [BBox::new(0, 0, 10, 10)?, BBox::new(20, 0, 30, 10)?];
    let dets = [BBox::new(0, 0, 10, 9)?, BBox::new(5, 5, 15, 15)?, BBox::new(40, 40, 50, 50)?];
    let m = match_boxes(&dets, &truths, 0.5);
    for p in &m.pairs {
        println!("detection {} <-> truth {}  IoU {:.3}", p.detection, p.truth, p.iou);
    }
    let metrics = metrics_from_counts(m.counts());
    println!("{:?}\n", metrics);

    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/eval5");
    let out = cmd_eval(&RunConfig {
        images_dir: Some(root.join("images")),
        ground_truth: Some(root.join("gt.csv")),
        annotations: Some(root.join("train.csv")),
        out_dir: std::env::temp_dir().join("hdsc-eval5"),
        all_methods: true,
        ..Default::default()
    })?;
    print!("{}", out.report.to_text());
    Ok(())
}
