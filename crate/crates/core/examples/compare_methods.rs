//! All four segmenters on the 24 annotated crops, plus a precision-recall
//! sweep of the hybrid-distance threshold.
//!
//! cargo run --example compare_methods

use std::path::Path;

use hdsc::pipeline::{cmd_compare, RunConfig};

fn main() -> hdsc::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/crops");
    let out = cmd_compare(&RunConfig {
        images_dir: Some(root.join("images")),
        ground_truth: Some(root.join("gt.csv")),
        annotations: Some(root.join("train.csv")),
        out_dir: std::env::temp_dir().join("hdsc-compare"),
        ..Default::default()
    })?;
    print!("{}", out.report.to_text());
    if let Some(curve) = &out.pr_curve {
        print!("\n{}", curve.to_text());
    }
    Ok(())
}
