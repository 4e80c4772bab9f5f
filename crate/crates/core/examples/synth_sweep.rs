//! Generates the seeded synthetic illumination sweep and shows that the
//! hybrid-distance masks do not change with intensity while an HSV value
//! gate loses the dim images.
//!
//! cargo run --example synth_sweep

use hdsc::baselines::segment_hsv;
use hdsc::pipeline::{build_pipelines, cmd_synth, cmd_train, Method, RunConfig};
use hdsc::segmentation::segment_image;
use hdsc::synth::SynthConfig;

fn main() -> hdsc::Result<()> {
    let dir = std::env::temp_dir().join("hdsc-synth");
    let cfg = RunConfig {
        out_dir: dir.clone(),
        seed: 42,
        epsilon_div: Some(0.0),
        synth: SynthConfig::default(),
        ..Default::default()
    };
    let ds = cmd_synth(&cfg)?;
    let cfg = RunConfig {
        images_dir: Some(dir.join("images")),
        annotations: Some(dir.join("train.csv")),
        out_dir: dir.join("model"),
        ..cfg
    };
    let model = cmd_train(&cfg)?.model;
    let mut hsv = build_pipelines(&cfg, &[Method::Hsv])?.remove(0).baselines.hsv;
    hsv.val_min = 0.3;
    println!("image                    hdsc px   hsv(val>=0.3) px");
    for img in &ds.images {
        let rgb = img.image.to_rgb();
        let count = |m: &hdsc::segmentation::SegmentationMask| {
            m.pixels().iter().filter(|l| **l != hdsc::segmentation::ClassLabel::Background).count()
        };
        println!(
            "{:<24} {:>7}   {:>7}",
            img.image_id,
            count(&segment_image(&rgb, &model)),
            count(&segment_hsv(&rgb, &hsv))
        );
    }
    println!("dataset in {}", dir.display());
    Ok(())
}
