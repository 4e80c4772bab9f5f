//! Regenerates the bundled fixtures under `fixtures/`:
//! `eval5/` (five images with hand-checked TP/FP/FN) and `crops/`
//! (24 annotated 64x64 crops under varied illuminants).
//!
//! cargo run --example make_fixtures [-- <dir>]

use std::path::PathBuf;

use hdsc::synth::{crops_fixture, eval_fixture};

pub const CROPS_SEED: u64 = 7;
pub const CROPS_COUNT: usize = 24;

fn main() -> hdsc::Result<()> {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    eval_fixture()?.write_to(&root.join("eval5"))?;
    crops_fixture(CROPS_SEED, CROPS_COUNT)?.write_to(&root.join("crops"))?;
    println!("fixtures written to {}", root.display());
    Ok(())
}
