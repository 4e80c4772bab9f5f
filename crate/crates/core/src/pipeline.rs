//! End-to-end runs: training from annotated pixels, segmentation and
//! detection of single images, dataset evaluation, method comparison and
//! synthetic data generation. The `hdsc` binary is a thin layer over the
//! `cmd_*` functions here.

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::baselines::{self, fit_baselines, BaselineParams};
use crate::color_model::RgbPixel;
use crate::detection::{self, mask_to_rgb8, CandidateFilters, Connectivity, DetectionCandidate};
use crate::error::{Error, Result};
use crate::evaluation::{
    self, index_by_image, load_ground_truth, match_detections, metrics_from_counts, parse_external_results,
    pr_sweep, Counts, EvalReport, GroundTruthRecord, ImageFailure, PrCurve, ReportRow, SweepRun,
};
use crate::image::{draw_rect, read_image, write_image, Rgb8Image, RgbImage};
use crate::kv::KvDoc;
use crate::segmentation::{
    segment_image, train_model, ClassLabel, DecisionMode, SegmentationMask, SegmentationModel, SignClass,
    TrainConfig, TransferVariant, EPSILON_DIV,
};
use crate::synth::{self, SynthConfig, SynthDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Method {
    #[default]
    Hdsc,
    Hsv,
    RedEnhance,
    LogChromatic,
}

impl Method {
    /// Comparison order of the report.
    pub const ALL: [Method; 4] = [Method::Hsv, Method::RedEnhance, Method::LogChromatic, Method::Hdsc];

    pub fn name(self) -> &'static str {
        match self {
            Method::Hdsc => "hdsc",
            Method::Hsv => "hsv",
            Method::RedEnhance => "red_enhance",
            Method::LogChromatic => "log_chromatic",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown method {s:?} (hdsc, hsv, red_enhance, log_chromatic)")))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything a run needs. Loaded from a flat key-value config file and
/// overridden by command-line flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub images_dir: Option<PathBuf>,
    pub ground_truth: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub baselines: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub external_results: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub dataset: Option<String>,
    pub method: Method,
    pub all_methods: bool,
    pub decision_mode: Option<DecisionMode>,
    pub transfer_variant: Option<TransferVariant>,
    pub epsilon_div: Option<f64>,
    pub alpha_min: f64,
    pub iou_min: f64,
    pub connectivity: Connectivity,
    pub filters: CandidateFilters,
    /// 0 selects the available parallelism.
    pub threads: usize,
    pub seed: u64,
    /// Threshold factors for precision-recall sweeps.
    pub sweep: Vec<f64>,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            images_dir: None,
            ground_truth: None,
            model: None,
            baselines: None,
            annotations: None,
            external_results: None,
            out_dir: PathBuf::from("out"),
            dataset: None,
            method: Method::Hdsc,
            all_methods: false,
            decision_mode: None,
            transfer_variant: None,
            epsilon_div: None,
            alpha_min: 0.1,
            iou_min: 0.5,
            connectivity: Connectivity::Eight,
            filters: CandidateFilters::default(),
            threads: 0,
            seed: 42,
            sweep: Vec::new(),
            synth: SynthConfig::default(),
        }
    }
}

const CONFIG_KEYS: &[&str] = &[
    "images_dir", "ground_truth", "model", "baselines", "annotations", "external_results", "out_dir",
    "dataset", "method", "all_methods", "decision_mode", "transfer_variant", "epsilon_div", "alpha_min",
    "iou_min", "connectivity", "min_area", "aspect_min", "aspect_max", "fill_min", "threads", "seed",
    "sweep", "synth_scenes", "synth_width", "synth_height", "synth_temperatures", "synth_intensities",
];

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Usage(format!("invalid number {v:?} in list"))))
        .collect()
}

impl RunConfig {
    /// Reads a config document; relative paths resolve against `base`.
    pub fn from_kv(doc: &KvDoc, base: &Path) -> Result<Self> {
        if let Some(k) = doc.keys().find(|k| !CONFIG_KEYS.contains(k)) {
            return Err(Error::Usage(format!("unknown config key `{k}`")));
        }
        let path = |k: &str| doc.get(k).map(|v| base.join(v));
        let mut c = RunConfig {
            images_dir: path("images_dir"),
            ground_truth: path("ground_truth"),
            model: path("model"),
            baselines: path("baselines"),
            annotations: path("annotations"),
            external_results: path("external_results"),
            dataset: doc.get("dataset").map(str::to_string),
            ..Default::default()
        };
        if let Some(p) = path("out_dir") {
            c.out_dir = p;
        }
        let usage = |e: Error| Error::Usage(e.to_string());
        if let Some(m) = doc.get("method") {
            c.method = m.parse()?;
        }
        if let Some(v) = doc.parse_opt("all_methods").map_err(usage)? {
            c.all_methods = v;
        }
        if let Some(m) = doc.get("decision_mode") {
            c.decision_mode = Some(m.parse().map_err(usage)?);
        }
        if let Some(m) = doc.get("transfer_variant") {
            c.transfer_variant = Some(m.parse().map_err(usage)?);
        }
        c.epsilon_div = doc.parse_opt("epsilon_div").map_err(usage)?;
        if let Some(v) = doc.parse_opt("alpha_min").map_err(usage)? {
            c.alpha_min = v;
        }
        if let Some(v) = doc.parse_opt("iou_min").map_err(usage)? {
            c.iou_min = v;
        }
        if let Some(v) = doc.get("connectivity") {
            c.connectivity = v.parse().map_err(usage)?;
        }
        if let Some(v) = doc.parse_opt("min_area").map_err(usage)? {
            c.filters.min_area = v;
        }
        if let Some(v) = doc.parse_opt("aspect_min").map_err(usage)? {
            c.filters.aspect_min = v;
        }
        if let Some(v) = doc.parse_opt("aspect_max").map_err(usage)? {
            c.filters.aspect_max = v;
        }
        if let Some(v) = doc.parse_opt("fill_min").map_err(usage)? {
            c.filters.fill_min = v;
        }
        if let Some(v) = doc.parse_opt("threads").map_err(usage)? {
            c.threads = v;
        }
        if let Some(v) = doc.parse_opt("seed").map_err(usage)? {
            c.seed = v;
        }
        if let Some(v) = doc.get("sweep") {
            c.sweep = parse_list(v)?;
        }
        if let Some(v) = doc.parse_opt("synth_scenes").map_err(usage)? {
            c.synth.scenes = v;
        }
        if let Some(v) = doc.parse_opt("synth_width").map_err(usage)? {
            c.synth.width = v;
        }
        if let Some(v) = doc.parse_opt("synth_height").map_err(usage)? {
            c.synth.height = v;
        }
        if let Some(v) = doc.get("synth_temperatures") {
            c.synth.temperatures = parse_list(v)?;
        }
        if let Some(v) = doc.get("synth_intensities") {
            c.synth.intensities = parse_list(v)?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let doc = KvDoc::load(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_kv(&doc, base)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.iou_min) {
            return Err(Error::Usage("iou_min must lie in [0, 1]".into()));
        }
        if !(0.0..1.0).contains(&self.alpha_min) {
            return Err(Error::Usage("alpha_min must lie in [0, 1)".into()));
        }
        if let Some(e) = self.epsilon_div {
            if !(e.is_finite() && e >= 0.0) {
                return Err(Error::Usage("epsilon_div must be nonnegative".into()));
            }
        }
        self.filters.validate().map_err(|e| Error::Usage(e.to_string()))
    }

    fn require<'a>(&self, value: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
        value
            .as_deref()
            .ok_or_else(|| Error::Usage(format!("{what} path is required")))
    }

    fn train_config(&self) -> TrainConfig {
        TrainConfig {
            alpha_min: self.alpha_min,
            decision_mode: self.decision_mode.unwrap_or_default(),
            transfer_variant: self.transfer_variant.unwrap_or_default(),
            epsilon_div: self.epsilon_div.unwrap_or(EPSILON_DIV),
            ..Default::default()
        }
    }

    fn dataset_name(&self) -> String {
        if let Some(d) = &self.dataset {
            return d.clone();
        }
        let Some(dir) = &self.images_dir else {
            return "dataset".into();
        };
        let name = |p: &Path| p.file_name().map(|n| n.to_string_lossy().into_owned());
        match name(dir) {
            Some(n) if n == "images" => dir.parent().and_then(name).unwrap_or(n),
            Some(n) => n,
            None => "dataset".into(),
        }
    }
}

/// One labeled training sample: the pixel at `(x, y)` of `image_id`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationRow {
    pub image_id: String,
    pub x: u32,
    pub y: u32,
    pub class: ClassLabel,
}

pub fn parse_annotations(text: &str, source: &str) -> Result<Vec<AnnotationRow>> {
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
        let f: Vec<&str> = line.split(';').map(str::trim).collect();
        if f.len() != 4 || f[0].is_empty() {
            return Err(err("expected image_id;x;y;class".into()));
        }
        out.push(AnnotationRow {
            image_id: f[0].to_string(),
            x: f[1].parse().map_err(|_| err(format!("invalid x {:?}", f[1])))?,
            y: f[2].parse().map_err(|_| err(format!("invalid y {:?}", f[2])))?,
            class: f[3].parse().map_err(|e: Error| err(e.to_string()))?,
        });
    }
    Ok(out)
}

pub fn format_annotations(rows: &[AnnotationRow]) -> String {
    let mut out = String::new();
    for r in rows {
        let _ = writeln!(out, "{};{};{};{}", r.image_id, r.x, r.y, r.class.name());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedPixel {
    pub image_id: String,
    pub pixel: [u8; 3],
    pub class: ClassLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnnotatedPixelSet {
    pub samples: Vec<AnnotatedPixel>,
}

impl AnnotatedPixelSet {
    pub fn pixels_of(&self, class: ClassLabel) -> Vec<RgbPixel> {
        self.samples
            .iter()
            .filter(|s| s.class == class)
            .map(|s| RgbPixel::from_u8(s.pixel))
            .collect()
    }
}

/// Reads an annotation file and samples the referenced pixels from the
/// images in `images_dir`.
pub fn load_annotations(path: &Path, images_dir: &Path) -> Result<AnnotatedPixelSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rows = parse_annotations(&text, &path.display().to_string())?;
    let mut cache: HashMap<String, Rgb8Image> = HashMap::new();
    let mut set = AnnotatedPixelSet::default();
    for r in rows {
        if !cache.contains_key(&r.image_id) {
            let img = read_image(&images_dir.join(&r.image_id))?;
            cache.insert(r.image_id.clone(), img);
        }
        let img = &cache[&r.image_id];
        if r.x as usize >= img.width() || r.y as usize >= img.height() {
            return Err(Error::invalid(format!(
                "{}: annotation ({}, {}) outside {} ({}x{})",
                path.display(),
                r.x,
                r.y,
                r.image_id,
                img.width(),
                img.height()
            )));
        }
        set.samples.push(AnnotatedPixel {
            pixel: *img.get(r.x as usize, r.y as usize),
            image_id: r.image_id,
            class: r.class,
        });
    }
    Ok(set)
}

/// A configured segmenter plus the candidate stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    pub method: Method,
    pub model: Option<SegmentationModel>,
    pub baselines: BaselineParams,
    pub connectivity: Connectivity,
    pub filters: CandidateFilters,
}

impl Pipeline {
    pub fn hdsc(model: SegmentationModel) -> Self {
        Pipeline {
            method: Method::Hdsc,
            model: Some(model),
            baselines: BaselineParams::default(),
            connectivity: Connectivity::default(),
            filters: CandidateFilters::default(),
        }
    }

    pub fn segment(&self, img: &RgbImage) -> SegmentationMask {
        match self.method {
            Method::Hdsc => segment_image(img, self.model.as_ref().expect("hdsc pipeline has a model")),
            Method::Hsv => baselines::segment_hsv(img, &self.baselines.hsv),
            Method::RedEnhance => baselines::segment_red_enhance(img, &self.baselines.red_enhance),
            Method::LogChromatic => baselines::segment_log_chromatic(img, &self.baselines.log_chromatic),
        }
    }

    pub fn detect(&self, img: &RgbImage) -> Vec<DetectionCandidate> {
        detection::detect(&self.segment(img), self.connectivity, &self.filters)
    }
}

/// Trained model and baseline parameters, with where they were written.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: SegmentationModel,
    pub baselines: BaselineParams,
    pub model_path: PathBuf,
    pub baselines_path: PathBuf,
}

fn train_from(cfg: &RunConfig, set: &AnnotatedPixelSet) -> Result<(SegmentationModel, BaselineParams)> {
    let red = set.pixels_of(ClassLabel::Red);
    let blue = set.pixels_of(ClassLabel::Blue);
    let bg = set.pixels_of(ClassLabel::Background);
    let model = train_model(&red, &blue, &bg, &cfg.train_config())?;
    let base = fit_baselines(&red, &blue)?;
    Ok((model, base))
}

/// Trains from `cfg.annotations` and writes `model.cfg` and
/// `baselines.cfg` into `cfg.out_dir`.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainOutcome> {
    let ann = cfg.require(&cfg.annotations, "annotations")?;
    let images = cfg.require(&cfg.images_dir, "images")?;
    let set = load_annotations(ann, images)?;
    let (model, baselines) = train_from(cfg, &set)?;
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let model_path = cfg.model.clone().unwrap_or_else(|| cfg.out_dir.join("model.cfg"));
    let baselines_path = cfg.baselines.clone().unwrap_or_else(|| cfg.out_dir.join("baselines.cfg"));
    model.to_kv().save(&model_path)?;
    baselines.to_kv().save(&baselines_path)?;
    Ok(TrainOutcome {
        model,
        baselines,
        model_path,
        baselines_path,
    })
}

fn load_model(cfg: &RunConfig) -> Result<Option<SegmentationModel>> {
    let mut model = match (&cfg.model, &cfg.annotations, &cfg.images_dir) {
        (Some(p), _, _) => SegmentationModel::from_kv(&KvDoc::load(p)?)?,
        (None, Some(ann), Some(images)) => train_from(cfg, &load_annotations(ann, images)?)?.0,
        _ => return Ok(None),
    };
    if let Some(m) = cfg.decision_mode {
        model.decision_mode = m;
    }
    if let Some(v) = cfg.transfer_variant {
        model.transfer_variant = v;
    }
    if let Some(e) = cfg.epsilon_div {
        model.epsilon_div = e;
    }
    Ok(Some(model))
}

fn load_baselines(cfg: &RunConfig) -> Result<BaselineParams> {
    match (&cfg.baselines, &cfg.annotations, &cfg.images_dir) {
        (Some(p), _, _) => BaselineParams::from_kv(&KvDoc::load(p)?),
        (None, Some(ann), Some(images)) => Ok(train_from(cfg, &load_annotations(ann, images)?)?.1),
        _ => Ok(BaselineParams::default()),
    }
}

/// Builds one pipeline per requested method.
pub fn build_pipelines(cfg: &RunConfig, methods: &[Method]) -> Result<Vec<Pipeline>> {
    let model = if methods.contains(&Method::Hdsc) {
        Some(load_model(cfg)?.ok_or_else(|| {
            Error::Usage("hdsc needs a model file, or annotations and images to train one".into())
        })?)
    } else {
        None
    };
    let baselines = if methods.iter().any(|&m| m != Method::Hdsc) {
        load_baselines(cfg)?
    } else {
        BaselineParams::default()
    };
    Ok(methods
        .iter()
        .map(|&method| Pipeline {
            method,
            model: model.clone(),
            baselines,
            connectivity: cfg.connectivity,
            filters: cfg.filters,
        })
        .collect())
}

/// Runs `f` on a pool of `threads` workers (0 = available parallelism).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(e.to_string()))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentOutcome {
    pub mask_path: PathBuf,
    pub overlay_path: PathBuf,
    pub candidates: Vec<DetectionCandidate>,
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into())
}

/// Original image with red candidates boxed in green and blue ones in yellow.
pub fn overlay(img: &Rgb8Image, candidates: &[DetectionCandidate]) -> Rgb8Image {
    let mut out = img.clone();
    for c in candidates {
        let color = match c.class {
            SignClass::Red => [0, 255, 0],
            SignClass::Blue => [255, 255, 0],
        };
        let b = c.bbox;
        draw_rect(&mut out, b.left as usize, b.top as usize, b.right as usize, b.bottom as usize, color);
    }
    out
}

/// Writes `<stem>_mask.ppm` and `<stem>_overlay.ppm` into `cfg.out_dir`.
pub fn cmd_segment(cfg: &RunConfig, image: &Path) -> Result<SegmentOutcome> {
    let pipeline = build_pipelines(cfg, &[cfg.method])?.remove(0);
    let raw = read_image(image)?;
    let (mask, candidates) = with_threads(cfg.threads, || {
        let mask = pipeline.segment(&raw.to_rgb());
        let candidates = detection::detect(&mask, pipeline.connectivity, &pipeline.filters);
        (mask, candidates)
    })?;
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let s = stem(image);
    let mask_path = cfg.out_dir.join(format!("{s}_mask.ppm"));
    let overlay_path = cfg.out_dir.join(format!("{s}_overlay.ppm"));
    write_image(&mask_path, &mask_to_rgb8(&mask))?;
    write_image(&overlay_path, &overlay(&raw, &candidates))?;
    Ok(SegmentOutcome {
        mask_path,
        overlay_path,
        candidates,
    })
}

/// Detects candidates in each image and writes them to
/// `detections.csv` in the ground-truth format.
pub fn cmd_detect(cfg: &RunConfig, images: &[PathBuf]) -> Result<Vec<GroundTruthRecord>> {
    let pipeline = build_pipelines(cfg, &[cfg.method])?.remove(0);
    let per_image = with_threads(cfg.threads, || {
        images
            .par_iter()
            .map(|p| -> Result<Vec<GroundTruthRecord>> {
                let id = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                let dets = pipeline.detect(&read_image(p)?.to_rgb());
                Ok(dets
                    .into_iter()
                    .map(|d| GroundTruthRecord {
                        image_id: id.clone(),
                        bbox: d.bbox,
                        class_tag: Some(d.class.label().name().to_string()),
                    })
                    .collect())
            })
            .collect::<Vec<_>>()
    })?;
    let mut out = Vec::new();
    for r in per_image {
        out.extend(r?);
    }
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let path = cfg.out_dir.join("detections.csv");
    std::fs::write(&path, evaluation::format_ground_truth(&out)).map_err(|e| Error::io(&path, e))?;
    Ok(out)
}

fn is_image(path: &Path) -> bool {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    matches!(ext.as_deref(), Some("ppm") | Some("png"))
}

/// Image files of a directory, sorted by name.
pub fn list_images(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let rd = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    for entry in rd {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let p = entry.path();
        if p.is_file() && is_image(&p) {
            out.push((entry.file_name().to_string_lossy().into_owned(), p));
        }
    }
    out.sort();
    Ok(out)
}

/// Per-method aggregate over a dataset, plus images that failed to load.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetRun {
    pub counts: Vec<Counts>,
    pub failures: Vec<ImageFailure>,
    pub processed: usize,
}

/// Evaluates every pipeline on every image. Each image is decoded once;
/// counts are summed in image order, so the result does not depend on
/// scheduling.
pub fn evaluate_dataset(
    pipelines: &[Pipeline],
    images: &[(String, PathBuf)],
    truth: &[GroundTruthRecord],
    iou_min: f64,
) -> DatasetRun {
    let index = index_by_image(truth);
    let results: Vec<std::result::Result<Vec<Counts>, ImageFailure>> = images
        .par_iter()
        .map(|(id, path)| {
            let img = read_image(path)
                .map_err(|e| ImageFailure {
                    image_id: id.clone(),
                    message: e.to_string(),
                })?
                .to_rgb();
            let gt: Vec<GroundTruthRecord> = index
                .get(id.as_str())
                .map(|v| v.iter().map(|r| (*r).clone()).collect())
                .unwrap_or_default();
            Ok(pipelines
                .iter()
                .map(|p| match_detections(&p.detect(&img), &gt, iou_min).counts())
                .collect())
        })
        .collect();
    let mut run = DatasetRun {
        counts: vec![Counts::default(); pipelines.len()],
        failures: Vec::new(),
        processed: 0,
    };
    for r in results {
        match r {
            Ok(c) => {
                run.processed += 1;
                for (acc, c) in run.counts.iter_mut().zip(c) {
                    *acc = *acc + c;
                }
            }
            Err(f) => run.failures.push(f),
        }
    }
    run
}

/// Sweeps the hybrid-distance decision threshold: `tau` scaled by each
/// factor in calibrated mode, or the comparator offset in literal mode.
pub fn sweep_hdsc(
    pipeline: &Pipeline,
    images: &[(String, PathBuf)],
    truth: &[GroundTruthRecord],
    iou_min: f64,
    thresholds: &[f64],
) -> Result<PrCurve> {
    let model = pipeline
        .model
        .as_ref()
        .ok_or_else(|| Error::invalid("sweep needs an hdsc pipeline"))?;
    pr_sweep(thresholds, |t| {
        let m = match model.decision_mode {
            DecisionMode::Calibrated => model.with_tau_scale(t),
            DecisionMode::PaperLiteral => model.with_literal_offset(t),
        };
        let p = Pipeline {
            model: Some(m),
            ..pipeline.clone()
        };
        let run = evaluate_dataset(std::slice::from_ref(&p), images, truth, iou_min);
        SweepRun {
            counts: run.counts[0],
            failures: run.failures,
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutcome {
    pub report: EvalReport,
    pub failures: Vec<ImageFailure>,
    pub processed: usize,
    pub pr_curve: Option<PrCurve>,
    pub written: Vec<PathBuf>,
}

/// Default threshold factors for `compare`.
pub const DEFAULT_SWEEP: [f64; 8] = [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0];

/// Evaluates the selected method (or all four) and writes `report.txt`,
/// `report.jsonl` and, when a sweep is configured, `pr_hdsc.txt`.
pub fn cmd_eval(cfg: &RunConfig) -> Result<EvalOutcome> {
    let images_dir = cfg.require(&cfg.images_dir, "images")?;
    let gt_path = cfg.require(&cfg.ground_truth, "ground truth")?;
    let truth = load_ground_truth(gt_path)?;
    let images = list_images(images_dir)?;
    if images.is_empty() {
        return Err(Error::NoImages);
    }
    let methods: Vec<Method> = if cfg.all_methods {
        Method::ALL.to_vec()
    } else {
        vec![cfg.method]
    };
    let pipelines = build_pipelines(cfg, &methods)?;
    let (run, curve) = with_threads(cfg.threads, || -> Result<_> {
        let run = evaluate_dataset(&pipelines, &images, &truth, cfg.iou_min);
        let curve = match pipelines.iter().find(|p| p.method == Method::Hdsc) {
            Some(p) if !cfg.sweep.is_empty() => Some(sweep_hdsc(p, &images, &truth, cfg.iou_min, &cfg.sweep)?),
            _ => None,
        };
        Ok((run, curve))
    })??;
    if run.processed == 0 {
        return Err(Error::NoImages);
    }
    let dataset = cfg.dataset_name();
    let mut report = EvalReport::default();
    for (m, c) in methods.iter().zip(&run.counts) {
        report
            .rows
            .push(ReportRow::measured(m.name(), &dataset, &metrics_from_counts(*c)));
    }
    if let Some(p) = &cfg.external_results {
        let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
        report.rows.extend(parse_external_results(&text, &p.display().to_string())?);
    }

    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let mut text = report.to_text();
    for f in &run.failures {
        let _ = writeln!(text, "# failed {}: {}", f.image_id, f.message);
    }
    let mut written = Vec::new();
    let mut write = |name: &str, body: &str| -> Result<()> {
        let p = cfg.out_dir.join(name);
        std::fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
        written.push(p);
        Ok(())
    };
    write("report.txt", &text)?;
    write("report.jsonl", &report.to_json_lines())?;
    if let Some(c) = &curve {
        write("pr_hdsc.txt", &c.to_text())?;
    }
    Ok(EvalOutcome {
        report,
        failures: run.failures,
        processed: run.processed,
        pr_curve: curve,
        written,
    })
}

/// All four methods side by side plus the hybrid-distance PR curve.
pub fn cmd_compare(cfg: &RunConfig) -> Result<EvalOutcome> {
    let mut c = cfg.clone();
    c.all_methods = true;
    if c.sweep.is_empty() {
        c.sweep = DEFAULT_SWEEP.to_vec();
    }
    cmd_eval(&c)
}

/// Generates a seeded synthetic dataset into `cfg.out_dir`.
pub fn cmd_synth(cfg: &RunConfig) -> Result<SynthDataset> {
    let sc = SynthConfig {
        seed: cfg.seed,
        ..cfg.synth.clone()
    };
    let ds = synth::generate(&sc)?;
    ds.write_to(&cfg.out_dir)?;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annotations_parse_and_format() {
        let rows = parse_annotations("# c\na.ppm;1;2;red\nb.ppm;3;4;background\n", "t").unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].class, ClassLabel::Red);
        assert_eq!(parse_annotations(&format_annotations(&rows), "t").unwrap(), rows);
        let err = parse_annotations("a.ppm;1;2;green\n", "t").unwrap_err();
        assert!(err.to_string().starts_with("t:1:"));
        assert!(parse_annotations("a.ppm;1;2\n", "t").is_err());
    }

    #[test]
    fn config_keys_and_paths() {
        let doc = KvDoc::parse(
            "images_dir = imgs\nmethod = hsv\niou_min = 0.3\nconnectivity = 4\nsweep = 0.5, 1, 2\ndecision_mode = literal\n",
            "cfg",
        )
        .unwrap();
        let c = RunConfig::from_kv(&doc, Path::new("/base")).unwrap();
        assert_eq!(c.images_dir.as_deref(), Some(Path::new("/base/imgs")));
        assert_eq!(c.method, Method::Hsv);
        assert_eq!(c.iou_min, 0.3);
        assert_eq!(c.connectivity, Connectivity::Four);
        assert_eq!(c.sweep, vec![0.5, 1.0, 2.0]);
        assert_eq!(c.decision_mode, Some(DecisionMode::PaperLiteral));
        let bad = KvDoc::parse("colour = red\n", "cfg").unwrap();
        assert!(matches!(RunConfig::from_kv(&bad, Path::new(".")), Err(Error::Usage(_))));
        let bad = KvDoc::parse("iou_min = 2\n", "cfg").unwrap();
        assert!(matches!(RunConfig::from_kv(&bad, Path::new(".")), Err(Error::Usage(_))));
    }

    #[test]
    fn method_names() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("sobel".parse::<Method>().is_err());
    }

    #[test]
    fn dataset_name_from_images_dir() {
        let c = RunConfig {
            images_dir: Some(PathBuf::from("/x/eval5/images")),
            ..Default::default()
        };
        assert_eq!(c.dataset_name(), "eval5");
        let c = RunConfig {
            images_dir: Some(PathBuf::from("/x/gtsdb")),
            ..Default::default()
        };
        assert_eq!(c.dataset_name(), "gtsdb");
    }
}
