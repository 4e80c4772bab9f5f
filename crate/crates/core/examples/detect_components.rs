//! Connected components and candidate filtering on a hand-drawn mask.
//!
//! cargo run --example detect_components

use hdsc::detection::{connected_components, detect, CandidateFilters, Connectivity};
use hdsc::image::Image;
use hdsc::segmentation::ClassLabel;

const ART: &str = "\
..........................
.RRRRRRRRR.......BBBBBBB..
.RRRRRRRRR.......BBBBBBB..
.RRRRRRRRR.......BBBBBBB..
.RRRRRRRRR.......BBBBBBB..
.RRRRRRRRR.......BBBBBBB..
.RRRRRRRRR.......BBBBBBB..
.RRRRRRRRR.......BBBBBBB..
.RRRRRRRRR..R.............
..........R.R..RRRRRRRRRR.
...........R..............";

fn main() -> hdsc::Result<()> {
    let rows: Vec<&str> = ART.lines().collect();
    let (w, h) = (rows[0].len(), rows.len());
    let data = rows
        .iter()
        .flat_map(|r| r.chars())
        .map(|c| match c {
            'R' => ClassLabel::Red,
            'B' => ClassLabel::Blue,
            _ => ClassLabel::Background,
        })
        .collect();
    let mask = Image::from_vec(w, h, data)?;
    for conn in [Connectivity::Four, Connectivity::Eight] {
        let cc = connected_components(&mask, conn);
        println!(
            "{conn}-connectivity: {} red, {} blue components",
            cc.red.component_count, cc.blue.component_count
        );
    }
    let filters = CandidateFilters {
        min_area: 20,
        ..Default::default()
    };
    for c in detect(&mask, Connectivity::Eight, &filters) {
        println!("{:?} {:?} area {} fill {:.2}", c.class, c.bbox, c.area, c.fill_ratio);
    }
    Ok(())
}
