//! The bundled fixtures must match what the generators produce today.

use std::path::Path;

use hdsc::evaluation::format_ground_truth;
use hdsc::image::encode_ppm;
use hdsc::pipeline::format_annotations;
use hdsc::synth::{crops_fixture, eval_fixture, SynthDataset};

fn assert_matches(ds: &SynthDataset, dir: &str) {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(dir);
    let read = |rel: &Path| std::fs::read(root.join(rel)).unwrap_or_else(|e| panic!("{}: {e}", rel.display()));
    for img in &ds.images {
        let rel = Path::new("images").join(&img.image_id);
        assert!(read(&rel) == encode_ppm(&img.image), "{dir}/{} differs", rel.display());
    }
    let on_disk = std::fs::read_dir(root.join("images")).unwrap().count();
    assert_eq!(on_disk, ds.images.len(), "{dir}: stray images");
    assert_eq!(read(Path::new("gt.csv")), format_ground_truth(&ds.ground_truth).into_bytes());
    assert_eq!(read(Path::new("train.csv")), format_annotations(&ds.annotations).into_bytes());
}

#[test]
fn eval5_fixture_is_current() {
    let ds = eval_fixture().unwrap();
    assert_eq!(ds.images.len(), 5);
    assert_matches(&ds, "eval5");
}

#[test]
fn crops_fixture_is_current() {
    // seed and count used by the make_fixtures example
    let ds = crops_fixture(7, 24).unwrap();
    assert!(ds.images.len() >= 20);
    assert_matches(&ds, "crops");
}
