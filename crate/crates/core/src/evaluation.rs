//! Ground-truth ingestion, detection matching and precision/recall reports.

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

use crate::detection::{BBox, DetectionCandidate};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthRecord {
    pub image_id: String,
    pub bbox: BBox,
    pub class_tag: Option<String>,
}

/// Parses `image_id;left;top;right;bottom[;class_tag]` lines. Blank lines
/// and `#` comments are skipped.
pub fn parse_ground_truth(text: &str, source: &str) -> Result<Vec<GroundTruthRecord>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: source.to_string(),
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split(';').map(str::trim).collect();
        if !(fields.len() == 5 || fields.len() == 6) {
            return Err(err(format!("expected 5 or 6 fields, got {}", fields.len())));
        }
        if fields[0].is_empty() {
            return Err(err("empty image id".into()));
        }
        let mut coords = [0u32; 4];
        for (c, f) in coords.iter_mut().zip(&fields[1..5]) {
            *c = f
                .parse()
                .map_err(|_| err(format!("invalid coordinate {f:?}")))?;
        }
        let bbox = BBox::new(coords[0], coords[1], coords[2], coords[3])
            .map_err(|e| err(e.to_string()))?;
        out.push(GroundTruthRecord {
            image_id: fields[0].to_string(),
            bbox,
            class_tag: fields.get(5).filter(|t| !t.is_empty()).map(|t| t.to_string()),
        });
    }
    Ok(out)
}

pub fn load_ground_truth(path: &Path) -> Result<Vec<GroundTruthRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ground_truth(&text, &path.display().to_string())
}

pub fn format_ground_truth(records: &[GroundTruthRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let b = r.bbox;
        let _ = write!(out, "{};{};{};{};{}", r.image_id, b.left, b.top, b.right, b.bottom);
        if let Some(tag) = &r.class_tag {
            let _ = write!(out, ";{tag}");
        }
        out.push('\n');
    }
    out
}

/// Groups records by image id.
pub fn index_by_image(records: &[GroundTruthRecord]) -> HashMap<&str, Vec<&GroundTruthRecord>> {
    let mut map: HashMap<&str, Vec<&GroundTruthRecord>> = HashMap::new();
    for r in records {
        map.entry(r.image_id.as_str()).or_default().push(r);
    }
    map
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPair {
    pub truth: usize,
    pub detection: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub pairs: Vec<MatchedPair>,
    pub unmatched_detections: Vec<usize>,
    pub unmatched_truths: Vec<usize>,
}

impl MatchResult {
    pub fn counts(&self) -> Counts {
        Counts {
            tp: self.pairs.len() as u64,
            fp: self.unmatched_detections.len() as u64,
            fn_: self.unmatched_truths.len() as u64,
        }
    }
}

/// Greedy one-to-one matching in descending IoU order, ties broken by the
/// lower (truth index, detection index). Only pairs with
/// `IoU >= iou_min` and a nonzero overlap are eligible.
pub fn match_boxes(dets: &[BBox], truths: &[BBox], iou_min: f64) -> MatchResult {
    let mut cand = Vec::new();
    for (t, tb) in truths.iter().enumerate() {
        for (d, db) in dets.iter().enumerate() {
            let iou = tb.iou(db);
            if iou > 0.0 && iou >= iou_min {
                cand.push(MatchedPair {
                    truth: t,
                    detection: d,
                    iou,
                });
            }
        }
    }
    cand.sort_by(|a, b| {
        b.iou
            .total_cmp(&a.iou)
            .then(a.truth.cmp(&b.truth))
            .then(a.detection.cmp(&b.detection))
    });
    let mut truth_used = vec![false; truths.len()];
    let mut det_used = vec![false; dets.len()];
    let mut pairs = Vec::new();
    for p in cand {
        if !truth_used[p.truth] && !det_used[p.detection] {
            truth_used[p.truth] = true;
            det_used[p.detection] = true;
            pairs.push(p);
        }
    }
    MatchResult {
        pairs,
        unmatched_detections: (0..dets.len()).filter(|&i| !det_used[i]).collect(),
        unmatched_truths: (0..truths.len()).filter(|&i| !truth_used[i]).collect(),
    }
}

/// Matches one image's detections against its ground truth.
pub fn match_detections(dets: &[DetectionCandidate], truth: &[GroundTruthRecord], iou_min: f64) -> MatchResult {
    let d: Vec<BBox> = dets.iter().map(|c| c.bbox).collect();
    let t: Vec<BBox> = truth.iter().map(|r| r.bbox).collect();
    match_boxes(&d, &t, iou_min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl std::ops::Add for Counts {
    type Output = Counts;

    fn add(self, o: Counts) -> Counts {
        Counts {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

impl std::iter::Sum for Counts {
    fn sum<I: Iterator<Item = Counts>>(iter: I) -> Counts {
        iter.fold(Counts::default(), |a, b| a + b)
    }
}

impl Counts {
    pub fn detections(&self) -> u64 {
        self.tp + self.fp
    }

    pub fn truths(&self) -> u64 {
        self.tp + self.fn_
    }
}

/// An exact ratio `num / den` displayed as a percentage with two decimals
/// (round half to even).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Percent {
    num: u64,
    den: u64,
}

impl Percent {
    pub fn ratio(num: u64, den: u64) -> Option<Percent> {
        (den > 0).then_some(Percent { num, den })
    }

    /// Parses a decimal percentage such as `92.52`.
    pub fn parse(s: &str) -> Result<Percent> {
        let bad = || Error::invalid(format!("invalid percentage {s:?}"));
        let (int, frac) = s.trim().split_once('.').unwrap_or((s.trim(), ""));
        if int.is_empty() && frac.is_empty() || frac.len() > 12 {
            return Err(bad());
        }
        let digits = format!("{int}{frac}");
        if !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let num: u64 = digits.parse().map_err(|_| bad())?;
        let den = 100 * 10u64.pow(frac.len() as u32);
        if num > den {
            return Err(bad());
        }
        Ok(Percent { num, den })
    }

    pub fn value(&self) -> f64 {
        100.0 * self.num as f64 / self.den as f64
    }

    /// Hundredths of a percent, rounded half to even.
    fn hundredths(&self) -> u128 {
        let scaled = 10_000u128 * self.num as u128;
        let den = self.den as u128;
        let (q, r) = (scaled / den, scaled % den);
        match (2 * r).cmp(&den) {
            std::cmp::Ordering::Greater => q + 1,
            std::cmp::Ordering::Equal if q % 2 == 1 => q + 1,
            _ => q,
        }
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.hundredths();
        let s = format!("{}.{:02}", h / 100, h % 100);
        f.pad(&s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Metrics {
    pub counts: Counts,
    /// `None` when there are no detections.
    pub precision: Option<Percent>,
    /// `None` when there is no ground truth.
    pub recall: Option<Percent>,
}

pub fn metrics_from_counts(c: Counts) -> Metrics {
    Metrics {
        counts: c,
        precision: Percent::ratio(c.tp, c.detections()),
        recall: Percent::ratio(c.tp, c.truths()),
    }
}

pub fn compute_metrics(m: &MatchResult) -> Metrics {
    metrics_from_counts(m.counts())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportRow {
    pub method: String,
    pub dataset: String,
    pub precision: Option<Percent>,
    pub recall: Option<Percent>,
    /// Absent for externally reported results.
    pub counts: Option<Counts>,
}

impl ReportRow {
    pub fn measured(method: &str, dataset: &str, m: &Metrics) -> Self {
        ReportRow {
            method: method.to_string(),
            dataset: dataset.to_string(),
            precision: m.precision,
            recall: m.recall,
            counts: Some(m.counts),
        }
    }

    pub fn external(method: &str, dataset: &str, precision: Percent, recall: Percent) -> Self {
        ReportRow {
            method: method.to_string(),
            dataset: dataset.to_string(),
            precision: Some(precision),
            recall: Some(recall),
            counts: None,
        }
    }
}

/// Parses `method;dataset;precision;recall` lines of externally reported
/// results.
pub fn parse_external_results(text: &str, source: &str) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split(';').map(str::trim).collect();
        let wrap = |e: Error| Error::Parse {
            path: source.to_string(),
            line: i + 1,
            message: e.to_string(),
        };
        if f.len() != 4 {
            return Err(wrap(Error::invalid("expected method;dataset;precision;recall")));
        }
        rows.push(ReportRow::external(
            f[0],
            f[1],
            Percent::parse(f[2]).map_err(wrap)?,
            Percent::parse(f[3]).map_err(wrap)?,
        ));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
}

fn opt<T: fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

impl EvalReport {
    fn datasets(&self) -> Vec<&str> {
        let mut seen: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !seen.contains(&r.dataset.as_str()) {
                seen.push(&r.dataset);
            }
        }
        seen
    }

    /// One table per dataset: method, Precision %, Recall %, TP, FP, FN.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, ds) in self.datasets().into_iter().enumerate() {
            if k > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "dataset: {ds}");
            let _ = writeln!(
                out,
                "{:<16} {:>13} {:>10} {:>6} {:>6} {:>6}",
                "method", "Precision (%)", "Recall (%)", "TP", "FP", "FN"
            );
            for r in self.rows.iter().filter(|r| r.dataset == ds) {
                let c = r.counts;
                let _ = writeln!(
                    out,
                    "{:<16} {:>13} {:>10} {:>6} {:>6} {:>6}",
                    r.method,
                    opt(r.precision),
                    opt(r.recall),
                    opt(c.map(|c| c.tp)),
                    opt(c.map(|c| c.fp)),
                    opt(c.map(|c| c.fn_)),
                );
            }
        }
        out
    }

    /// One JSON object per line with fields
    /// method, dataset, precision, recall, tp, fp, fn.
    pub fn to_json_lines(&self) -> String {
        let num = |v: Option<String>| v.unwrap_or_else(|| "null".to_string());
        let mut out = String::new();
        for r in &self.rows {
            let c = r.counts;
            let _ = writeln!(
                out,
                "{{\"method\":{},\"dataset\":{},\"precision\":{},\"recall\":{},\"tp\":{},\"fp\":{},\"fn\":{}}}",
                serde_json::Value::from(r.method.as_str()),
                serde_json::Value::from(r.dataset.as_str()),
                num(r.precision.map(|p| p.to_string())),
                num(r.recall.map(|p| p.to_string())),
                num(c.map(|c| c.tp.to_string())),
                num(c.map(|c| c.fp.to_string())),
                num(c.map(|c| c.fn_.to_string())),
            );
        }
        out
    }
}

/// A failure recorded for one image without aborting a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageFailure {
    pub image_id: String,
    pub message: String,
}

/// Aggregate outcome of one pass of a pipeline over a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SweepRun {
    pub counts: Counts,
    pub failures: Vec<ImageFailure>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: Option<Percent>,
    pub recall: Option<Percent>,
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
    pub failures: Vec<(f64, ImageFailure)>,
}

impl PrCurve {
    /// Two columns, recall then precision, one line per threshold in sweep
    /// order; undefined values print as `nan`.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# recall precision\n");
        for p in &self.points {
            let v = |x: Option<Percent>| x.map_or_else(|| "nan".to_string(), |x| x.to_string());
            let _ = writeln!(out, "{} {}", v(p.recall), v(p.precision));
        }
        out
    }
}

/// Runs `run` once per threshold. Thresholds must be non-empty and
/// strictly monotone; per-image failures are collected, not fatal.
pub fn pr_sweep(thresholds: &[f64], mut run: impl FnMut(f64) -> SweepRun) -> Result<PrCurve> {
    if thresholds.is_empty() {
        return Err(Error::invalid("threshold list is empty"));
    }
    if thresholds.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("thresholds must be finite"));
    }
    let inc = thresholds.windows(2).all(|w| w[0] < w[1]);
    let dec = thresholds.windows(2).all(|w| w[0] > w[1]);
    if !(inc || dec) {
        return Err(Error::invalid("thresholds must be strictly monotone"));
    }
    let mut curve = PrCurve::default();
    for &t in thresholds {
        let r = run(t);
        let m = metrics_from_counts(r.counts);
        curve.points.push(PrPoint {
            threshold: t,
            precision: m.precision,
            recall: m.recall,
            counts: r.counts,
        });
        curve.failures.extend(r.failures.into_iter().map(|f| (t, f)));
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bb(l: u32, t: u32, r: u32, b: u32) -> BBox {
        BBox::new(l, t, r, b).unwrap()
    }

    #[test]
    fn parse_gtsdb_line() {
        let recs = parse_ground_truth("# comment\n\n00001.ppm;774;411;815;446;11\nx.ppm;1;2;3;4\n", "gt").unwrap();
        assert_eq!(
            recs[0],
            GroundTruthRecord {
                image_id: "00001.ppm".into(),
                bbox: bb(774, 411, 815, 446),
                class_tag: Some("11".into()),
            }
        );
        assert_eq!(recs[1].class_tag, None);
        assert_eq!(parse_ground_truth(&format_ground_truth(&recs), "gt").unwrap(), recs);
    }

    #[test]
    fn parse_errors_name_lines() {
        let err = parse_ground_truth("a;1;1;2;2\nimg.ppm;10;10;5;20\n", "gt.csv").unwrap_err();
        assert!(err.to_string().starts_with("gt.csv:2:"), "{err}");
        let err = parse_ground_truth("img.ppm;1;x;5;20\n", "gt.csv").unwrap_err();
        assert!(err.to_string().contains("gt.csv:1:"));
        assert!(parse_ground_truth("img.ppm;1;2\n", "g").is_err());
        assert!(parse_ground_truth(";1;2;3;4\n", "g").is_err());
        assert!(parse_ground_truth("a;-1;2;3;4\n", "g").is_err());
    }

    #[test]
    fn half_overlap_is_not_a_match() {
        let m = match_boxes(&[bb(5, 0, 15, 10)], &[bb(0, 0, 10, 10)], 0.5);
        assert_eq!(m.counts(), Counts { tp: 0, fp: 1, fn_: 1 });
        let m = match_boxes(&[bb(0, 0, 10, 10)], &[bb(0, 0, 10, 10)], 0.5);
        assert_eq!(m.counts(), Counts { tp: 1, fp: 0, fn_: 0 });
        assert_eq!(m.pairs[0].iou, 1.0);
    }

    #[test]
    fn metrics_arithmetic() {
        let m = metrics_from_counts(Counts { tp: 3, fp: 1, fn_: 2 });
        assert_eq!(m.precision.unwrap().to_string(), "75.00");
        assert_eq!(m.recall.unwrap().to_string(), "60.00");
        let m = metrics_from_counts(Counts { tp: 0, fp: 0, fn_: 4 });
        assert_eq!(m.precision, None);
        assert_eq!(m.recall.unwrap().to_string(), "0.00");
        assert_eq!(metrics_from_counts(Counts::default()).recall, None);
    }

    #[test]
    fn percent_rounds_half_to_even() {
        // 1/8 = 12.5% exactly; 1/16 = 6.25%; 1/32 = 3.125% -> 3.12; 3/32 = 9.375% -> 9.38
        assert_eq!(Percent::ratio(1, 32).unwrap().to_string(), "3.12");
        assert_eq!(Percent::ratio(3, 32).unwrap().to_string(), "9.38");
        assert_eq!(Percent::ratio(2, 3).unwrap().to_string(), "66.67");
        assert_eq!(Percent::ratio(1, 1).unwrap().to_string(), "100.00");
        assert_eq!(Percent::parse("92.52").unwrap().to_string(), "92.52");
        assert_eq!(Percent::parse("83.2").unwrap().to_string(), "83.20");
        assert!(Percent::parse("101").is_err());
        assert!(Percent::parse("9x").is_err());
    }

    #[test]
    fn table_reference_row_renders_verbatim() {
        let rows = parse_external_results("HDSC;GTSDB;92.52;83.20\n", "ext").unwrap();
        let report = EvalReport { rows };
        let text = report.to_text();
        assert!(text.contains("dataset: GTSDB"));
        let line = text.lines().nth(2).unwrap();
        assert_eq!(line.split_whitespace().collect::<Vec<_>>(), ["HDSC", "92.52", "83.20", "-", "-", "-"]);
        assert_eq!(
            report.to_json_lines().trim(),
            r#"{"method":"HDSC","dataset":"GTSDB","precision":92.52,"recall":83.20,"tp":null,"fp":null,"fn":null}"#
        );
    }

    #[test]
    fn json_lines_are_valid_json() {
        let m = metrics_from_counts(Counts { tp: 3, fp: 1, fn_: 2 });
        let report = EvalReport {
            rows: vec![
                ReportRow::measured("hdsc", "fix\"ture", &m),
                ReportRow::measured("hsv", "fixture", &metrics_from_counts(Counts::default())),
            ],
        };
        for line in report.to_json_lines().lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            for k in ["method", "dataset", "precision", "recall", "tp", "fp", "fn"] {
                assert!(v.get(k).is_some(), "{k}");
            }
        }
        let v: serde_json::Value = serde_json::from_str(report.to_json_lines().lines().next().unwrap()).unwrap();
        assert_eq!(v["precision"], 75.0);
        assert_eq!(v["tp"], 3);
    }

    #[test]
    fn sweep_validation_and_degenerate_cases() {
        assert!(pr_sweep(&[], |_| SweepRun::default()).is_err());
        assert!(pr_sweep(&[0.5, 0.5], |_| SweepRun::default()).is_err());
        assert!(pr_sweep(&[0.1, 0.3, 0.2], |_| SweepRun::default()).is_err());
        let c = Counts { tp: 2, fp: 2, fn_: 0 };
        let curve = pr_sweep(&[1.0], |_| SweepRun { counts: c, failures: vec![] }).unwrap();
        assert_eq!(curve.points.len(), 1);
        assert_eq!(curve.points[0].precision, metrics_from_counts(c).precision);
        let curve = pr_sweep(&[0.0], |_| SweepRun {
            counts: Counts { tp: 0, fp: 0, fn_: 5 },
            failures: vec![ImageFailure { image_id: "x".into(), message: "bad".into() }],
        })
        .unwrap();
        assert_eq!(curve.points[0].precision, None);
        assert_eq!(curve.points[0].recall.unwrap().to_string(), "0.00");
        assert_eq!(curve.failures.len(), 1);
        assert_eq!(curve.to_text(), "# recall precision\n0.00 nan\n");
    }

    /// All partial one-to-one assignments over eligible pairs; the greedy
    /// result is the one whose pairs, listed in greedy priority order, are
    /// lexicographically first.
    fn exhaustive(dets: &[BBox], truths: &[BBox], iou_min: f64) -> Vec<(usize, usize)> {
        let key = |t: usize, d: usize| {
            let iou = truths[t].iou(&dets[d]);
            (std::cmp::Reverse(ordered(iou)), t, d)
        };
        fn ordered(x: f64) -> u64 {
            x.to_bits()
        }
        let mut best: Option<Vec<(std::cmp::Reverse<u64>, usize, usize)>> = None;
        fn rec(
            t: usize,
            used: &mut Vec<bool>,
            cur: &mut Vec<(usize, usize)>,
            all: &mut Vec<Vec<(usize, usize)>>,
            dets: &[BBox],
            truths: &[BBox],
            iou_min: f64,
        ) {
            if t == truths.len() {
                all.push(cur.clone());
                return;
            }
            rec(t + 1, used, cur, all, dets, truths, iou_min);
            for d in 0..dets.len() {
                let iou = truths[t].iou(&dets[d]);
                if !used[d] && iou > 0.0 && iou >= iou_min {
                    used[d] = true;
                    cur.push((t, d));
                    rec(t + 1, used, cur, all, dets, truths, iou_min);
                    cur.pop();
                    used[d] = false;
                }
            }
        }
        let mut all = Vec::new();
        rec(0, &mut vec![false; dets.len()], &mut Vec::new(), &mut all, dets, truths, iou_min);
        for a in all {
            let mut k: Vec<_> = a.iter().map(|&(t, d)| key(t, d)).collect();
            k.sort();
            // a larger matching extending the same prefix is preferred
            let better = match &best {
                None => true,
                Some(b) => {
                    let n = k.len().min(b.len());
                    match k[..n].cmp(&b[..n]) {
                        std::cmp::Ordering::Less => true,
                        std::cmp::Ordering::Equal => k.len() > b.len(),
                        std::cmp::Ordering::Greater => false,
                    }
                }
            };
            if better {
                best = Some(k);
            }
        }
        let mut out: Vec<_> = best.unwrap().into_iter().map(|(_, t, d)| (t, d)).collect();
        out.sort();
        out
    }

    #[test]
    fn crafted_overlap_grid_matches_exhaustive_search() {
        let truths = [bb(0, 0, 10, 10), bb(8, 0, 18, 10), bb(30, 30, 40, 40)];
        let dets = [bb(2, 0, 12, 10), bb(7, 0, 17, 10), bb(31, 31, 41, 41)];
        let m = match_boxes(&dets, &truths, 0.3);
        let mut got: Vec<_> = m.pairs.iter().map(|p| (p.truth, p.detection)).collect();
        got.sort();
        assert_eq!(got, exhaustive(&dets, &truths, 0.3));
        assert_eq!(got, vec![(0, 0), (1, 1), (2, 2)]);
    }

    fn small_box() -> impl Strategy<Value = BBox> {
        (0u32..12, 0u32..12, 1u32..8, 1u32..8).prop_map(|(l, t, w, h)| bb(l, t, l + w, t + h))
    }

    proptest! {
        #[test]
        fn greedy_equals_exhaustive_priority_search(
            dets in prop::collection::vec(small_box(), 0..=4),
            truths in prop::collection::vec(small_box(), 0..=4),
            iou_min in 0.0f64..0.8,
        ) {
            let m = match_boxes(&dets, &truths, iou_min);
            let mut got: Vec<_> = m.pairs.iter().map(|p| (p.truth, p.detection)).collect();
            got.sort();
            prop_assert_eq!(got, exhaustive(&dets, &truths, iou_min));
        }

        #[test]
        fn counts_are_conserved(
            dets in prop::collection::vec(small_box(), 0..8),
            truths in prop::collection::vec(small_box(), 0..8),
            iou_min in 0.0f64..1.0,
        ) {
            let c = match_boxes(&dets, &truths, iou_min).counts();
            prop_assert_eq!(c.tp + c.fn_, truths.len() as u64);
            prop_assert_eq!(c.tp + c.fp, dets.len() as u64);
        }

        #[test]
        fn recall_non_increasing_in_iou_min(
            dets in prop::collection::vec(small_box(), 0..8),
            truths in prop::collection::vec(small_box(), 1..8),
            a in 0.0f64..1.0, b in 0.0f64..1.0,
        ) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let tp_lo = match_boxes(&dets, &truths, lo).counts().tp;
            let tp_hi = match_boxes(&dets, &truths, hi).counts().tp;
            prop_assert!(tp_hi <= tp_lo);
        }
    }
}
