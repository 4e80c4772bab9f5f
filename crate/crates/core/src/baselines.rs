//! Comparison segmenters: hue-band thresholding in HSV, normalized
//! red-excess scoring, and rectangle thresholding in log-chromaticity space.

use crate::color_model::RgbPixel;
use crate::error::{Error, Result};
use crate::image::RgbImage;
use crate::kv::KvDoc;
use crate::segmentation::{ClassLabel, SegmentationMask};
use crate::stats::percentile_nearest_rank;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsvParams {
    /// Degrees either side of 0° accepted as red.
    pub red_hue_halfwidth: f64,
    pub blue_hue_low: f64,
    pub blue_hue_high: f64,
    pub sat_min: f64,
    pub val_min: f64,
}

impl Default for HsvParams {
    fn default() -> Self {
        HsvParams {
            red_hue_halfwidth: 15.0,
            blue_hue_low: 200.0,
            blue_hue_high: 260.0,
            sat_min: 0.3,
            val_min: 0.1,
        }
    }
}

impl HsvParams {
    pub fn validate(&self) -> Result<()> {
        let hue = 0.0..360.0;
        if !(hue.contains(&self.red_hue_halfwidth)
            && hue.contains(&self.blue_hue_low)
            && hue.contains(&self.blue_hue_high)
            && self.blue_hue_low < self.blue_hue_high)
        {
            return Err(Error::invalid("HSV hue bounds must lie in [0, 360) with low < high"));
        }
        if !((0.0..=1.0).contains(&self.sat_min) && (0.0..=1.0).contains(&self.val_min)) {
            return Err(Error::invalid("HSV sat_min and val_min must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RedEnhanceParams {
    pub threshold: f64,
}

impl Default for RedEnhanceParams {
    fn default() -> Self {
        RedEnhanceParams { threshold: 0.2 }
    }
}

/// Axis-aligned rectangle in (u, v) = (ln r/g, ln b/g).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChromaRect {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl ChromaRect {
    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.u_min && u <= self.u_max && v >= self.v_min && v <= self.v_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogChromaticParams {
    pub red_region: ChromaRect,
    pub blue_region: ChromaRect,
    pub epsilon: f64,
}

impl Default for LogChromaticParams {
    fn default() -> Self {
        LogChromaticParams {
            red_region: ChromaRect {
                u_min: 0.7,
                u_max: 6.0,
                v_min: -6.0,
                v_max: 1.0,
            },
            blue_region: ChromaRect {
                u_min: -6.0,
                u_max: 0.5,
                v_min: 0.5,
                v_max: 6.0,
            },
            epsilon: 1.0 / 255.0,
        }
    }
}

impl LogChromaticParams {
    pub fn validate(&self) -> Result<()> {
        for r in [self.red_region, self.blue_region] {
            if !(r.u_min < r.u_max && r.v_min < r.v_max) {
                return Err(Error::invalid("log-chromatic rectangles must be non-degenerate"));
            }
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::invalid("log-chromatic epsilon must be nonnegative"));
        }
        Ok(())
    }
}

/// Hue in degrees `[0, 360)`, saturation and value in `[0, 1]`.
pub fn rgb_to_hsv(p: RgbPixel) -> (f64, f64, f64) {
    let max = p.max_component();
    let min = p.r.min(p.g).min(p.b);
    let delta = max - min;
    let sat = if max > 0.0 { delta / max } else { 0.0 };
    if delta == 0.0 {
        return (0.0, sat, max);
    }
    let h = if max == p.r {
        60.0 * ((p.g - p.b) / delta)
    } else if max == p.g {
        60.0 * ((p.b - p.r) / delta + 2.0)
    } else {
        60.0 * ((p.r - p.g) / delta + 4.0)
    };
    let h = if h < 0.0 { h + 360.0 } else { h };
    (if h >= 360.0 { 0.0 } else { h }, sat, max)
}

pub fn classify_hsv(p: RgbPixel, params: &HsvParams) -> ClassLabel {
    let (h, s, v) = rgb_to_hsv(p);
    if s < params.sat_min || v < params.val_min {
        return ClassLabel::Background;
    }
    if h <= params.red_hue_halfwidth || h >= 360.0 - params.red_hue_halfwidth {
        ClassLabel::Red
    } else if h >= params.blue_hue_low && h <= params.blue_hue_high {
        ClassLabel::Blue
    } else {
        ClassLabel::Background
    }
}

/// `max(0, min(r - g, r - b) / (r + g + b))`, zero for black.
pub fn red_enhance_score(p: RgbPixel) -> f64 {
    let sum = p.r + p.g + p.b;
    if sum <= 0.0 {
        return 0.0;
    }
    ((p.r - p.g).min(p.r - p.b) / sum).max(0.0)
}

/// Red where the score reaches the threshold; a zero score is never red.
pub fn classify_red_enhance(p: RgbPixel, params: &RedEnhanceParams) -> ClassLabel {
    let score = red_enhance_score(p);
    if score >= params.threshold && score > 0.0 {
        ClassLabel::Red
    } else {
        ClassLabel::Background
    }
}

/// `(ln((r+eps)/(g+eps)), ln((b+eps)/(g+eps)))`.
pub fn log_chroma(p: RgbPixel, eps: f64) -> (f64, f64) {
    let g = p.g + eps;
    (((p.r + eps) / g).ln(), ((p.b + eps) / g).ln())
}

pub fn classify_log_chromatic(p: RgbPixel, params: &LogChromaticParams) -> ClassLabel {
    let (u, v) = log_chroma(p, params.epsilon);
    if !(u.is_finite() && v.is_finite()) {
        return ClassLabel::Background;
    }
    if params.red_region.contains(u, v) {
        ClassLabel::Red
    } else if params.blue_region.contains(u, v) {
        ClassLabel::Blue
    } else {
        ClassLabel::Background
    }
}

pub fn segment_hsv(img: &RgbImage, params: &HsvParams) -> SegmentationMask {
    img.par_map(|&p| classify_hsv(p, params))
}

/// Red-only: never emits `Blue`.
pub fn segment_red_enhance(img: &RgbImage, params: &RedEnhanceParams) -> SegmentationMask {
    img.par_map(|&p| classify_red_enhance(p, params))
}

pub fn segment_log_chromatic(img: &RgbImage, params: &LogChromaticParams) -> SegmentationMask {
    img.par_map(|&p| classify_log_chromatic(p, params))
}

/// Parameters of all three baselines, stored together.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BaselineParams {
    pub hsv: HsvParams,
    pub red_enhance: RedEnhanceParams,
    pub log_chromatic: LogChromaticParams,
}

impl BaselineParams {
    pub fn validate(&self) -> Result<()> {
        self.hsv.validate()?;
        if !(0.0..=1.0).contains(&self.red_enhance.threshold) {
            return Err(Error::invalid("red-enhance threshold must lie in [0, 1]"));
        }
        self.log_chromatic.validate()
    }

    pub fn to_kv(&self) -> KvDoc {
        let mut d = KvDoc::new();
        d.set_f64("hsv_red_hue_halfwidth", self.hsv.red_hue_halfwidth);
        d.set_f64("hsv_blue_hue_low", self.hsv.blue_hue_low);
        d.set_f64("hsv_blue_hue_high", self.hsv.blue_hue_high);
        d.set_f64("hsv_sat_min", self.hsv.sat_min);
        d.set_f64("hsv_val_min", self.hsv.val_min);
        d.set_f64("red_enhance_threshold", self.red_enhance.threshold);
        let lc = &self.log_chromatic;
        for (name, r) in [("red", lc.red_region), ("blue", lc.blue_region)] {
            d.set_f64(&format!("logc_{name}_u_min"), r.u_min);
            d.set_f64(&format!("logc_{name}_u_max"), r.u_max);
            d.set_f64(&format!("logc_{name}_v_min"), r.v_min);
            d.set_f64(&format!("logc_{name}_v_max"), r.v_max);
        }
        d.set_f64("logc_epsilon", lc.epsilon);
        d
    }

    pub fn from_kv(d: &KvDoc) -> Result<Self> {
        let rect = |name: &str| -> Result<ChromaRect> {
            Ok(ChromaRect {
                u_min: d.require(&format!("logc_{name}_u_min"))?,
                u_max: d.require(&format!("logc_{name}_u_max"))?,
                v_min: d.require(&format!("logc_{name}_v_min"))?,
                v_max: d.require(&format!("logc_{name}_v_max"))?,
            })
        };
        let p = BaselineParams {
            hsv: HsvParams {
                red_hue_halfwidth: d.require("hsv_red_hue_halfwidth")?,
                blue_hue_low: d.require("hsv_blue_hue_low")?,
                blue_hue_high: d.require("hsv_blue_hue_high")?,
                sat_min: d.require("hsv_sat_min")?,
                val_min: d.require("hsv_val_min")?,
            },
            red_enhance: RedEnhanceParams {
                threshold: d.require("red_enhance_threshold")?,
            },
            log_chromatic: LogChromaticParams {
                red_region: rect("red")?,
                blue_region: rect("blue")?,
                epsilon: d.require("logc_epsilon")?,
            },
        };
        p.validate()?;
        Ok(p)
    }
}

fn circular_distance_from_zero(h: f64) -> f64 {
    h.min(360.0 - h)
}

/// Fits baseline parameters to labeled training pixels so every method
/// sees the same training data as the hybrid-distance model.
///
/// Bands cover the 5th..95th percentile of each class's feature values
/// with a fixed margin; the saturation, value and score floors are 80% of
/// the 5th percentile over sign pixels.
pub fn fit_baselines(red: &[RgbPixel], blue: &[RgbPixel]) -> Result<BaselineParams> {
    if red.is_empty() {
        return Err(Error::EmptyClass("red"));
    }
    if blue.is_empty() {
        return Err(Error::EmptyClass("blue"));
    }
    let p = |v: &[f64], q: f64| percentile_nearest_rank(v, q);

    let red_hsv: Vec<_> = red.iter().map(|&x| rgb_to_hsv(x)).collect();
    let blue_hsv: Vec<_> = blue.iter().map(|&x| rgb_to_hsv(x)).collect();
    let red_hue: Vec<f64> = red_hsv.iter().map(|h| circular_distance_from_zero(h.0)).collect();
    let blue_hue: Vec<f64> = blue_hsv.iter().map(|h| h.0).collect();
    let sats: Vec<f64> = red_hsv.iter().chain(&blue_hsv).map(|h| h.1).collect();
    let vals: Vec<f64> = red_hsv.iter().chain(&blue_hsv).map(|h| h.2).collect();
    let blue_low = (p(&blue_hue, 5.0) - 5.0).clamp(0.0, 358.0);
    let hsv = HsvParams {
        red_hue_halfwidth: (p(&red_hue, 95.0) + 2.0).clamp(5.0, 60.0),
        blue_hue_low: blue_low,
        blue_hue_high: (p(&blue_hue, 95.0) + 5.0).clamp(blue_low + 1.0, 359.0),
        sat_min: (0.8 * p(&sats, 5.0)).clamp(0.05, 1.0),
        val_min: (0.8 * p(&vals, 5.0)).clamp(0.0, 1.0),
    };

    let scores: Vec<f64> = red.iter().map(|&x| red_enhance_score(x)).collect();
    let red_enhance = RedEnhanceParams {
        threshold: (0.8 * p(&scores, 5.0)).clamp(0.01, 1.0),
    };

    let eps = 1.0 / 255.0;
    let rect = |px: &[RgbPixel]| {
        let (u, v): (Vec<f64>, Vec<f64>) = px.iter().map(|&x| log_chroma(x, eps)).unzip();
        let margin = 0.25;
        ChromaRect {
            u_min: p(&u, 5.0) - margin,
            u_max: p(&u, 95.0) + margin,
            v_min: p(&v, 5.0) - margin,
            v_max: p(&v, 95.0) + margin,
        }
    };
    let params = BaselineParams {
        hsv,
        red_enhance,
        log_chromatic: LogChromaticParams {
            red_region: rect(red),
            blue_region: rect(blue),
            epsilon: eps,
        },
    };
    params.validate()?;
    Ok(params)
}
