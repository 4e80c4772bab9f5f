//! Connected-component labeling of segmentation masks and extraction of
//! sign candidates.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::segmentation::{ClassLabel, SegmentationMask, SignClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl FromStr for Connectivity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "4" => Ok(Connectivity::Four),
            "8" => Ok(Connectivity::Eight),
            _ => Err(Error::invalid(format!("connectivity must be 4 or 8, got {s:?}"))),
        }
    }
}

impl fmt::Display for Connectivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Connectivity::Four => "4",
            Connectivity::Eight => "8",
        })
    }
}

/// Axis-aligned box in pixel units; `right` and `bottom` are exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BBox {
    pub left: u32,
    pub top: u32,
    pub right: u32,
    pub bottom: u32,
}

impl BBox {
    pub fn new(left: u32, top: u32, right: u32, bottom: u32) -> Result<Self> {
        if right > left && bottom > top {
            Ok(BBox {
                left,
                top,
                right,
                bottom,
            })
        } else {
            Err(Error::invalid(format!(
                "degenerate box ({left}, {top}, {right}, {bottom})"
            )))
        }
    }

    pub fn width(&self) -> u32 {
        self.right - self.left
    }

    pub fn height(&self) -> u32 {
        self.bottom - self.top
    }

    pub fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    pub fn intersection_area(&self, other: &BBox) -> u64 {
        let w = self.right.min(other.right).saturating_sub(self.left.max(other.left));
        let h = self.bottom.min(other.bottom).saturating_sub(self.top.max(other.top));
        w as u64 * h as u64
    }

    pub fn iou(&self, other: &BBox) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        inter as f64 / union as f64
    }
}

/// Component labels for one sign class. Label 0 is background; labels
/// `1..=component_count` are assigned in raster-scan first-encounter order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabelMap {
    pub width: usize,
    pub height: usize,
    pub class: SignClass,
    pub labels: Vec<u32>,
    pub component_count: u32,
}

/// Label maps for both sign classes of one mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassComponents {
    pub red: ComponentLabelMap,
    pub blue: ComponentLabelMap,
}

pub fn connected_components(mask: &SegmentationMask, connectivity: Connectivity) -> ClassComponents {
    ClassComponents {
        red: label_class(mask, SignClass::Red, connectivity),
        blue: label_class(mask, SignClass::Blue, connectivity),
    }
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let next = parent[x as usize];
        parent[x as usize] = parent[next as usize];
        x = next;
    }
    x
}

fn union(parent: &mut [u32], a: u32, b: u32) -> u32 {
    let (ra, rb) = (find(parent, a), find(parent, b));
    let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
    parent[hi as usize] = lo;
    lo
}

/// Two-pass union-find labeling of the pixels carrying `class`.
pub fn label_class(mask: &SegmentationMask, class: SignClass, connectivity: Connectivity) -> ComponentLabelMap {
    let (w, h) = (mask.width(), mask.height());
    let target = class.label();
    let px = mask.pixels();
    let mut labels = vec![0u32; w * h];
    // provisional label 0 is unused so the forest indexes directly
    let mut parent: Vec<u32> = vec![0];

    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if px[i] != target {
                continue;
            }
            let mut current = 0u32;
            let mut visit = |j: usize, labels: &[u32], parent: &mut Vec<u32>| {
                let n = labels[j];
                if n != 0 {
                    current = if current == 0 { find(parent, n) } else { union(parent, current, n) };
                }
            };
            if x > 0 {
                visit(i - 1, &labels, &mut parent);
            }
            if y > 0 {
                visit(i - w, &labels, &mut parent);
                if connectivity == Connectivity::Eight {
                    if x > 0 {
                        visit(i - w - 1, &labels, &mut parent);
                    }
                    if x + 1 < w {
                        visit(i - w + 1, &labels, &mut parent);
                    }
                }
            }
            if current == 0 {
                current = parent.len() as u32;
                parent.push(current);
            }
            labels[i] = current;
        }
    }

    // resolve to final labels in first-encounter raster order
    let mut remap = vec![0u32; parent.len()];
    let mut count = 0u32;
    for l in labels.iter_mut() {
        if *l == 0 {
            continue;
        }
        let root = find(&mut parent, *l) as usize;
        if remap[root] == 0 {
            count += 1;
            remap[root] = count;
        }
        *l = remap[root];
    }

    ComponentLabelMap {
        width: w,
        height: h,
        class,
        labels,
        component_count: count,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateFilters {
    pub min_area: u64,
    /// Bounds on bbox width / height, inclusive.
    pub aspect_min: f64,
    pub aspect_max: f64,
    pub fill_min: f64,
}

impl Default for CandidateFilters {
    fn default() -> Self {
        CandidateFilters {
            min_area: 64,
            aspect_min: 0.5,
            aspect_max: 2.0,
            fill_min: 0.3,
        }
    }
}

impl CandidateFilters {
    pub fn validate(&self) -> Result<()> {
        if !(self.aspect_min > 0.0 && self.aspect_min <= self.aspect_max) {
            return Err(Error::invalid("aspect bounds need 0 < aspect_min <= aspect_max"));
        }
        if !(0.0..=1.0).contains(&self.fill_min) {
            return Err(Error::invalid("fill_min must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn accepts(&self, bbox: &BBox, area: u64) -> bool {
        let aspect = bbox.width() as f64 / bbox.height() as f64;
        let fill = area as f64 / bbox.area() as f64;
        area >= self.min_area
            && aspect >= self.aspect_min
            && aspect <= self.aspect_max
            && fill >= self.fill_min
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionCandidate {
    pub bbox: BBox,
    pub class: SignClass,
    pub area: u64,
    pub fill_ratio: f64,
}

fn candidate_order(a: &DetectionCandidate, b: &DetectionCandidate) -> std::cmp::Ordering {
    b.area
        .cmp(&a.area)
        .then(a.bbox.top.cmp(&b.bbox.top))
        .then(a.bbox.left.cmp(&b.bbox.left))
        .then(a.class.cmp(&b.class))
}

/// One candidate per component passing `filters`, largest first, ties by
/// (top, left).
pub fn extract_candidates(cl: &ComponentLabelMap, filters: &CandidateFilters) -> Vec<DetectionCandidate> {
    let n = cl.component_count as usize;
    let mut stats = vec![(u32::MAX, u32::MAX, 0u32, 0u32, 0u64); n + 1];
    for (i, &l) in cl.labels.iter().enumerate() {
        if l == 0 {
            continue;
        }
        let (x, y) = ((i % cl.width) as u32, (i / cl.width) as u32);
        let s = &mut stats[l as usize];
        s.0 = s.0.min(x);
        s.1 = s.1.min(y);
        s.2 = s.2.max(x + 1);
        s.3 = s.3.max(y + 1);
        s.4 += 1;
    }
    let mut out: Vec<DetectionCandidate> = stats[1..]
        .iter()
        .filter_map(|&(left, top, right, bottom, area)| {
            let bbox = BBox {
                left,
                top,
                right,
                bottom,
            };
            filters.accepts(&bbox, area).then(|| DetectionCandidate {
                bbox,
                class: cl.class,
                area,
                fill_ratio: area as f64 / bbox.area() as f64,
            })
        })
        .collect();
    out.sort_by(candidate_order);
    out
}

/// Labels both classes and merges their candidates in canonical order.
pub fn detect(mask: &SegmentationMask, connectivity: Connectivity, filters: &CandidateFilters) -> Vec<DetectionCandidate> {
    let cc = connected_components(mask, connectivity);
    let mut out = extract_candidates(&cc.red, filters);
    out.extend(extract_candidates(&cc.blue, filters));
    out.sort_by(candidate_order);
    out
}

/// Renders a mask as red / blue / black pixels.
pub fn mask_to_rgb8(mask: &SegmentationMask) -> crate::image::Rgb8Image {
    mask.map(|l| match l {
        ClassLabel::Red => [255, 0, 0],
        ClassLabel::Blue => [0, 0, 255],
        ClassLabel::Background => [0, 0, 0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Image;

    fn mask_from(rows: &[&str]) -> SegmentationMask {
        let h = rows.len();
        let w = rows[0].len();
        let data = rows
            .iter()
            .flat_map(|r| r.chars())
            .map(|c| match c {
                'R' => ClassLabel::Red,
                'B' => ClassLabel::Blue,
                _ => ClassLabel::Background,
            })
            .collect();
        Image::from_vec(w, h, data).unwrap()
    }

    #[test]
    fn empty_mask_has_no_components() {
        let m = Image::filled(5, 4, ClassLabel::Background);
        let cc = connected_components(&m, Connectivity::Eight);
        assert_eq!(cc.red.component_count, 0);
        assert_eq!(cc.blue.component_count, 0);
    }

    #[test]
    fn diagonal_adjacency() {
        let m = mask_from(&["R.", ".R"]);
        assert_eq!(label_class(&m, SignClass::Red, Connectivity::Four).component_count, 2);
        assert_eq!(label_class(&m, SignClass::Red, Connectivity::Eight).component_count, 1);
    }

    #[test]
    fn classes_are_labeled_independently() {
        let m = mask_from(&["RRB", "BBB", "R.R"]);
        let cc = connected_components(&m, Connectivity::Four);
        assert_eq!(cc.red.component_count, 3);
        assert_eq!(cc.blue.component_count, 1);
        assert_eq!(cc.red.labels, vec![1, 1, 0, 0, 0, 0, 2, 0, 3]);
    }

    #[test]
    fn raster_first_encounter_order_with_merges() {
        // the U merges two provisional labels; the later isolated pixel is 2
        let m = mask_from(&["R.R.", "RRR.", "...R"]);
        let four = label_class(&m, SignClass::Red, Connectivity::Four);
        assert_eq!(four.labels, vec![1, 0, 1, 0, 1, 1, 1, 0, 0, 0, 0, 2]);
        let eight = label_class(&m, SignClass::Red, Connectivity::Eight);
        assert_eq!(eight.component_count, 1);
    }

    #[test]
    fn solid_square_candidate() {
        let mut m = Image::filled(30, 30, ClassLabel::Background);
        for y in 7..17 {
            for x in 3..13 {
                m.set(x, y, ClassLabel::Red);
            }
        }
        let c = detect(&m, Connectivity::Eight, &CandidateFilters::default());
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].bbox, BBox::new(3, 7, 13, 17).unwrap());
        assert_eq!(c[0].area, 100);
        assert_eq!(c[0].fill_ratio, 1.0);
        assert_eq!(c[0].class, SignClass::Red);
    }

    #[test]
    fn speck_is_filtered() {
        let m = mask_from(&["BB..", "B...", "...."]);
        assert!(detect(&m, Connectivity::Eight, &CandidateFilters::default()).is_empty());
        let loose = CandidateFilters {
            min_area: 3,
            ..Default::default()
        };
        assert_eq!(detect(&m, Connectivity::Eight, &loose).len(), 1);
    }

    #[test]
    fn stepped_l_shape_geometry() {
        // vertical bar 5x20 (100 px), foot 15x6 (90 px), step 10x1 (10 px)
        let mut m = Image::filled(24, 24, ClassLabel::Background);
        let mut n = 0;
        for y in 0..20 {
            for x in 0..20 {
                let on = x < 5 || y >= 14 || (y == 13 && x < 15);
                if on {
                    m.set(x + 2, y + 2, ClassLabel::Blue);
                    n += 1;
                }
            }
        }
        assert_eq!(n, 200);
        let c = detect(&m, Connectivity::Eight, &CandidateFilters::default());
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].bbox, BBox::new(2, 2, 22, 22).unwrap());
        assert_eq!(c[0].area, 200);
        assert_eq!(c[0].fill_ratio, 0.5);
    }

    #[test]
    fn aspect_and_fill_filters() {
        let f = CandidateFilters::default();
        assert!(!f.accepts(&BBox::new(0, 0, 30, 10).unwrap(), 300));
        assert!(f.accepts(&BBox::new(0, 0, 20, 10).unwrap(), 200));
        assert!(!f.accepts(&BBox::new(0, 0, 20, 20).unwrap(), 100));
    }

    #[test]
    fn candidates_sorted_by_area_then_position() {
        let mut m = Image::filled(40, 40, ClassLabel::Background);
        let mut fill = |x0: usize, y0: usize, s: usize, l: ClassLabel| {
            for y in y0..y0 + s {
                for x in x0..x0 + s {
                    m.set(x, y, l);
                }
            }
        };
        fill(20, 0, 9, ClassLabel::Red);
        fill(0, 0, 9, ClassLabel::Blue);
        fill(0, 20, 12, ClassLabel::Red);
        let c = detect(&m, Connectivity::Eight, &CandidateFilters::default());
        let order: Vec<_> = c.iter().map(|c| (c.bbox.left, c.bbox.top)).collect();
        assert_eq!(order, vec![(0, 20), (0, 0), (20, 0)]);
    }

    #[test]
    fn iou_arithmetic() {
        let a = BBox::new(0, 0, 10, 10).unwrap();
        let b = BBox::new(5, 0, 15, 10).unwrap();
        assert!((a.iou(&b) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(a.iou(&a), 1.0);
        assert_eq!(a.iou(&BBox::new(20, 20, 30, 30).unwrap()), 0.0);
        assert!(BBox::new(10, 10, 5, 20).is_err());
    }
}
