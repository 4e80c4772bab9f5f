//! Trains a model from the bundled annotated pixels and segments one
//! fixture image, writing the mask and overlay next to the target dir.
//!
//! cargo run --example segment_image [-- <image.ppm>]

use std::path::{Path, PathBuf};

use hdsc::pipeline::{cmd_segment, cmd_train, RunConfig};

fn main() -> hdsc::Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/eval5");
    let image = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| fixtures.join("images/00003.ppm"));
    let out = std::env::temp_dir().join("hdsc-segment");
    let cfg = RunConfig {
        images_dir: Some(fixtures.join("images")),
        annotations: Some(fixtures.join("train.csv")),
        out_dir: out.clone(),
        ..Default::default()
    };
    let trained = cmd_train(&cfg)?;
    let m = &trained.model;
    println!(
        "red ref ({:.4}, {:.4})  blue ref ({:.4}, {:.4})  knots a={} b={}  tau {}/{}",
        m.red_ref.theta, m.red_ref.phi, m.blue_ref.theta, m.blue_ref.phi, m.transfer.a, m.transfer.b, m.tau_red, m.tau_blue
    );
    let seg = cmd_segment(
        &RunConfig {
            model: Some(trained.model_path),
            ..cfg
        },
        &image,
    )?;
    for c in &seg.candidates {
        println!("{:?} {:?} area {} fill {:.2}", c.class, c.bbox, c.area, c.fill_ratio);
    }
    println!("mask: {}\noverlay: {}", seg.mask_path.display(), seg.overlay_path.display());
    Ok(())
}
