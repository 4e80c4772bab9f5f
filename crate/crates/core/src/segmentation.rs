//! Pixel classification with the hybrid distance over spherical chromaticity.
//!
//! A pixel's evidence for a sign class is its chromatic distance to the
//! class reference `(theta_o, phi_o)`, gated by a transfer function of the
//! pixel's red/blue ratio. Two decision rules are available: the literal
//! comparison of the hybrid distance against the ratio, and a calibrated
//! rule that thresholds the gate and the distance separately.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::color_model::{rgb_to_spherical, RgbPixel, SphericalColor};
use crate::error::{Error, Result};
use crate::image::{Image, RgbImage};
use crate::kv::{round_sig9, KvDoc};
use crate::stats::percentile_nearest_rank;

/// Default additive term in the red/blue ratio.
pub const EPSILON_DIV: f64 = 1.0 / 255.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
#[repr(u8)]
pub enum ClassLabel {
    #[default]
    Background = 0,
    Red = 1,
    Blue = 2,
}

impl ClassLabel {
    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::Background => "background",
            ClassLabel::Red => "red",
            ClassLabel::Blue => "blue",
        }
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "red" | "r" => Ok(ClassLabel::Red),
            "blue" | "b" => Ok(ClassLabel::Blue),
            "background" | "bg" | "none" => Ok(ClassLabel::Background),
            other => Err(Error::invalid(format!("unknown class {other:?}"))),
        }
    }
}

/// The two sign colors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignClass {
    Red,
    Blue,
}

impl SignClass {
    pub fn label(self) -> ClassLabel {
        match self {
            SignClass::Red => ClassLabel::Red,
            SignClass::Blue => ClassLabel::Blue,
        }
    }
}

pub type SegmentationMask = Image<ClassLabel>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceChroma {
    pub theta: f64,
    pub phi: f64,
}

impl ReferenceChroma {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        let range = 0.0..=std::f64::consts::FRAC_PI_2;
        if range.contains(&theta) && range.contains(&phi) {
            Ok(ReferenceChroma { theta, phi })
        } else {
            Err(Error::invalid(format!(
                "reference angles ({theta}, {phi}) outside [0, pi/2]"
            )))
        }
    }

    pub fn of(p: RgbPixel) -> Result<Self> {
        let s = rgb_to_spherical(p);
        if s.achromatic {
            return Err(Error::Achromatic);
        }
        Self::new(s.theta, s.phi)
    }
}

/// Ratio knots of the transfer functions, `0 < a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferParams {
    pub a: f64,
    pub b: f64,
}

impl TransferParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a.is_finite() && b.is_finite() && 0.0 < a && a < b {
            Ok(TransferParams { a, b })
        } else {
            Err(Error::invalid(format!("transfer knots need 0 < a < b, got a={a}, b={b}")))
        }
    }
}

/// Shape of the transfer functions.
///
/// `Literal` evaluates the piecewise definitions as written: the red middle
/// branch returns `x` itself and the blue low branch returns `a - x`.
/// `Normalized` uses the ramp `(x - a) / (b - a)` for red and
/// `clamp((a - x) / a, 0, 1)` for blue, both in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransferVariant {
    #[default]
    Literal,
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecisionMode {
    /// Red iff `Hd_red > x`, blue iff `Hd_blue < x`.
    PaperLiteral,
    /// Gate above `alpha_min` and chromatic distance below `tau`.
    #[default]
    Calibrated,
}

impl FromStr for TransferVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(TransferVariant::Literal),
            "normalized" => Ok(TransferVariant::Normalized),
            _ => Err(Error::invalid(format!("unknown transfer variant {s:?}"))),
        }
    }
}

impl fmt::Display for TransferVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransferVariant::Literal => "literal",
            TransferVariant::Normalized => "normalized",
        })
    }
}

impl FromStr for DecisionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" | "paper_literal" => Ok(DecisionMode::PaperLiteral),
            "calibrated" => Ok(DecisionMode::Calibrated),
            _ => Err(Error::invalid(format!("unknown decision mode {s:?}"))),
        }
    }
}

impl fmt::Display for DecisionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecisionMode::PaperLiteral => "literal",
            DecisionMode::Calibrated => "calibrated",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationModel {
    pub red_ref: ReferenceChroma,
    pub blue_ref: ReferenceChroma,
    pub transfer: TransferParams,
    pub tau_red: f64,
    pub tau_blue: f64,
    pub alpha_min: f64,
    pub decision_mode: DecisionMode,
    pub transfer_variant: TransferVariant,
    pub epsilon_div: f64,
    /// Comparator offset of the literal rule; 0 reproduces it exactly.
    pub literal_offset: f64,
}

impl SegmentationModel {
    pub fn validate(&self) -> Result<()> {
        ReferenceChroma::new(self.red_ref.theta, self.red_ref.phi)?;
        ReferenceChroma::new(self.blue_ref.theta, self.blue_ref.phi)?;
        TransferParams::new(self.transfer.a, self.transfer.b)?;
        if !(self.tau_red > 0.0 && self.tau_blue > 0.0) {
            return Err(Error::invalid("chromatic thresholds must be positive"));
        }
        if !(0.0..1.0).contains(&self.alpha_min) {
            return Err(Error::invalid("alpha_min must lie in [0, 1)"));
        }
        if !(self.epsilon_div.is_finite() && self.epsilon_div >= 0.0) {
            return Err(Error::invalid("epsilon_div must be nonnegative"));
        }
        if !self.literal_offset.is_finite() {
            return Err(Error::invalid("literal_offset must be finite"));
        }
        if self.red_ref == self.blue_ref {
            return Err(Error::invalid("red and blue references coincide"));
        }
        Ok(())
    }

    /// Scales both chromatic thresholds; used by threshold sweeps.
    pub fn with_tau_scale(&self, factor: f64) -> Self {
        SegmentationModel {
            tau_red: self.tau_red * factor,
            tau_blue: self.tau_blue * factor,
            ..self.clone()
        }
    }

    pub fn with_literal_offset(&self, offset: f64) -> Self {
        SegmentationModel {
            literal_offset: offset,
            ..self.clone()
        }
    }

    pub fn to_kv(&self) -> KvDoc {
        let mut doc = KvDoc::new();
        doc.set_f64("theta_o_red", self.red_ref.theta);
        doc.set_f64("phi_o_red", self.red_ref.phi);
        doc.set_f64("theta_o_blue", self.blue_ref.theta);
        doc.set_f64("phi_o_blue", self.blue_ref.phi);
        doc.set_f64("a", self.transfer.a);
        doc.set_f64("b", self.transfer.b);
        doc.set_f64("tau_red", self.tau_red);
        doc.set_f64("tau_blue", self.tau_blue);
        doc.set_f64("alpha_min", self.alpha_min);
        doc.set("decision_mode", self.decision_mode.to_string());
        doc.set("transfer_variant", self.transfer_variant.to_string());
        doc.set_f64("epsilon_div", self.epsilon_div);
        doc.set_f64("literal_offset", self.literal_offset);
        doc
    }

    pub fn from_kv(doc: &KvDoc) -> Result<Self> {
        let model = SegmentationModel {
            red_ref: ReferenceChroma {
                theta: doc.require("theta_o_red")?,
                phi: doc.require("phi_o_red")?,
            },
            blue_ref: ReferenceChroma {
                theta: doc.require("theta_o_blue")?,
                phi: doc.require("phi_o_blue")?,
            },
            transfer: TransferParams {
                a: doc.require("a")?,
                b: doc.require("b")?,
            },
            tau_red: doc.require("tau_red")?,
            tau_blue: doc.require("tau_blue")?,
            alpha_min: doc.require("alpha_min")?,
            decision_mode: doc.require::<String>("decision_mode")?.parse()?,
            transfer_variant: doc.require::<String>("transfer_variant")?.parse()?,
            epsilon_div: doc.parse_opt("epsilon_div")?.unwrap_or(EPSILON_DIV),
            literal_offset: doc.parse_opt("literal_offset")?.unwrap_or(0.0),
        };
        model.validate()?;
        Ok(model)
    }

    /// The model as it reads back after a save/load cycle.
    pub fn rounded(&self) -> Self {
        let r = round_sig9;
        SegmentationModel {
            red_ref: ReferenceChroma {
                theta: r(self.red_ref.theta),
                phi: r(self.red_ref.phi),
            },
            blue_ref: ReferenceChroma {
                theta: r(self.blue_ref.theta),
                phi: r(self.blue_ref.phi),
            },
            transfer: TransferParams {
                a: r(self.transfer.a),
                b: r(self.transfer.b),
            },
            tau_red: r(self.tau_red),
            tau_blue: r(self.tau_blue),
            alpha_min: r(self.alpha_min),
            epsilon_div: r(self.epsilon_div),
            literal_offset: r(self.literal_offset),
            ..*self
        }
    }
}

#[inline]
fn angle_distance(theta: f64, phi: f64, o: ReferenceChroma) -> f64 {
    let dt = o.theta - theta;
    let dp = o.phi - phi;
    (dt * dt + dp * dp).sqrt()
}

/// Euclidean distance in (theta, phi), in radians.
pub fn chromatic_distance(p: &SphericalColor, o: &ReferenceChroma) -> Result<f64> {
    if p.achromatic {
        return Err(Error::Achromatic);
    }
    Ok(angle_distance(p.theta, p.phi, *o))
}

/// `(r + eps) / (b + eps)` with the default `eps = 1/255`.
pub fn red_blue_ratio(p: RgbPixel) -> f64 {
    red_blue_ratio_with(p, EPSILON_DIV)
}

/// Red/blue ratio with an explicit additive term. With `eps = 0` the ratio
/// is exactly scale invariant; a zero blue channel then gives `+inf`, and
/// `r = b = 0` is defined as 1.
#[inline]
pub fn red_blue_ratio_with(p: RgbPixel, eps: f64) -> f64 {
    let den = p.b + eps;
    if den > 0.0 {
        (p.r + eps) / den
    } else if p.r + eps > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

#[inline]
pub fn alpha_red(x: f64, t: &TransferParams, variant: TransferVariant) -> f64 {
    if x <= t.a {
        0.0
    } else if x >= t.b {
        1.0
    } else {
        match variant {
            TransferVariant::Literal => x,
            TransferVariant::Normalized => (x - t.a) / (t.b - t.a),
        }
    }
}

#[inline]
pub fn alpha_blue(x: f64, t: &TransferParams, variant: TransferVariant) -> f64 {
    match variant {
        TransferVariant::Literal => {
            if x <= t.a {
                t.a - x
            } else {
                1.0
            }
        }
        TransferVariant::Normalized => ((t.a - x) / t.a).clamp(0.0, 1.0),
    }
}

#[inline]
fn alpha(class: SignClass, x: f64, t: &TransferParams, variant: TransferVariant) -> f64 {
    match class {
        SignClass::Red => alpha_red(x, t, variant),
        SignClass::Blue => alpha_blue(x, t, variant),
    }
}

/// Gated chromatic distance `alpha_class(x) * Cd(p, o)`.
pub fn hybrid_distance(
    p: &SphericalColor,
    o: &ReferenceChroma,
    x: f64,
    class: SignClass,
    t: &TransferParams,
    variant: TransferVariant,
) -> Result<f64> {
    let cd = chromatic_distance(p, o)?;
    let gate = alpha(class, x, t, variant);
    // a closed gate wins even against an infinite ratio
    if gate == 0.0 || cd == 0.0 {
        return Ok(0.0);
    }
    Ok(gate * cd)
}

/// Label plus diagnostics for one pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub label: ClassLabel,
    /// The literal rule fired for both classes; resolved as background.
    pub literal_conflict: bool,
}

#[inline]
pub fn classify_traced(p: RgbPixel, m: &SegmentationModel) -> Decision {
    let s = rgb_to_spherical(p);
    let background = Decision {
        label: ClassLabel::Background,
        literal_conflict: false,
    };
    if s.achromatic {
        return background;
    }
    let x = red_blue_ratio_with(p, m.epsilon_div);
    let cd_red = angle_distance(s.theta, s.phi, m.red_ref);
    let cd_blue = angle_distance(s.theta, s.phi, m.blue_ref);
    let ar = alpha_red(x, &m.transfer, m.transfer_variant);
    let ab = alpha_blue(x, &m.transfer, m.transfer_variant);
    match m.decision_mode {
        DecisionMode::PaperLiteral => {
            let hd_red = if ar == 0.0 { 0.0 } else { ar * cd_red };
            let hd_blue = if ab == 0.0 { 0.0 } else { ab * cd_blue };
            let red = hd_red - x > m.literal_offset;
            let blue = x - hd_blue > m.literal_offset;
            match (red, blue) {
                (true, false) => Decision {
                    label: ClassLabel::Red,
                    literal_conflict: false,
                },
                (false, true) => Decision {
                    label: ClassLabel::Blue,
                    literal_conflict: false,
                },
                (true, true) => Decision {
                    label: ClassLabel::Background,
                    literal_conflict: true,
                },
                (false, false) => background,
            }
        }
        DecisionMode::Calibrated => {
            let red = ar > m.alpha_min && cd_red < m.tau_red;
            let blue = ab > m.alpha_min && cd_blue < m.tau_blue;
            let label = match (red, blue) {
                (true, true) if cd_blue < cd_red => ClassLabel::Blue,
                (true, _) => ClassLabel::Red,
                (false, true) => ClassLabel::Blue,
                (false, false) => ClassLabel::Background,
            };
            Decision {
                label,
                literal_conflict: false,
            }
        }
    }
}

#[inline]
pub fn classify_pixel(p: RgbPixel, m: &SegmentationModel) -> ClassLabel {
    classify_traced(p, m).label
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SegmentStats {
    pub literal_conflicts: u64,
}

pub fn segment_image(img: &RgbImage, m: &SegmentationModel) -> SegmentationMask {
    segment_image_with_stats(img, m).0
}

/// Segments rows in parallel; the mask and counts equal the sequential loop.
pub fn segment_image_with_stats(
    img: &RgbImage,
    m: &SegmentationModel,
) -> (SegmentationMask, SegmentStats) {
    let width = img.width().max(1);
    let mut labels = vec![ClassLabel::Background; img.pixels().len()];
    let conflicts: u64 = labels
        .par_chunks_mut(width)
        .zip(img.pixels().par_chunks(width))
        .map(|(out, row)| {
            let mut n = 0;
            for (o, &p) in out.iter_mut().zip(row) {
                let d = classify_traced(p, m);
                *o = d.label;
                n += d.literal_conflict as u64;
            }
            n
        })
        .sum();
    let mask = Image::from_vec(img.width(), img.height(), labels).expect("dimensions preserved");
    (
        mask,
        SegmentStats {
            literal_conflicts: conflicts,
        },
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub alpha_min: f64,
    /// Lower bound for learned chromatic thresholds, radians.
    pub tau_floor: f64,
    pub decision_mode: DecisionMode,
    pub transfer_variant: TransferVariant,
    pub epsilon_div: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            alpha_min: 0.1,
            tau_floor: 0.02,
            decision_mode: DecisionMode::Calibrated,
            transfer_variant: TransferVariant::Literal,
            epsilon_div: EPSILON_DIV,
        }
    }
}

fn chromatic_samples(pixels: &[RgbPixel], class: &'static str) -> Result<Vec<(RgbPixel, SphericalColor)>> {
    if pixels.is_empty() {
        return Err(Error::EmptyClass(class));
    }
    let out: Vec<_> = pixels
        .iter()
        .map(|&p| (p, rgb_to_spherical(p)))
        .filter(|(_, s)| !s.achromatic)
        .collect();
    if out.is_empty() {
        return Err(Error::invalid(format!("all {class} training pixels are achromatic")));
    }
    Ok(out)
}

fn median_reference(samples: &[(RgbPixel, SphericalColor)]) -> Result<ReferenceChroma> {
    let thetas: Vec<f64> = samples.iter().map(|(_, s)| s.theta).collect();
    let phis: Vec<f64> = samples.iter().map(|(_, s)| s.phi).collect();
    ReferenceChroma::new(
        percentile_nearest_rank(&thetas, 50.0),
        percentile_nearest_rank(&phis, 50.0),
    )
}

fn distance_threshold(samples: &[(RgbPixel, SphericalColor)], o: ReferenceChroma, floor: f64) -> f64 {
    let d: Vec<f64> = samples
        .iter()
        .map(|(_, s)| angle_distance(s.theta, s.phi, o))
        .collect();
    percentile_nearest_rank(&d, 95.0).max(floor)
}

/// Estimates a model from labeled pixels.
///
/// References are componentwise medians of the class angles; the knots `a`
/// and `b` are the 25th and 75th percentiles of the red pixels' red/blue
/// ratio (falling back to ±10% around the median when they coincide), and
/// each `tau` is the 95th percentile of the class's distances to its own
/// reference, floored at `tau_floor`. All percentiles are nearest-rank, so
/// the result depends only on the multiset of inputs. Background pixels are
/// accepted for interface symmetry but do not enter the estimates.
pub fn train_model(
    red: &[RgbPixel],
    blue: &[RgbPixel],
    _background: &[RgbPixel],
    cfg: &TrainConfig,
) -> Result<SegmentationModel> {
    let red = chromatic_samples(red, "red")?;
    let blue = chromatic_samples(blue, "blue")?;
    let red_ref = median_reference(&red)?;
    let blue_ref = median_reference(&blue)?;

    let ratios: Vec<f64> = red
        .iter()
        .map(|(p, _)| red_blue_ratio_with(*p, cfg.epsilon_div))
        .collect();
    let (mut a, mut b) = (
        percentile_nearest_rank(&ratios, 25.0),
        percentile_nearest_rank(&ratios, 75.0),
    );
    if a >= b {
        let median = percentile_nearest_rank(&ratios, 50.0);
        a = 0.9 * median;
        b = 1.1 * median;
    }
    let transfer = TransferParams::new(a, b).map_err(|_| {
        Error::invalid(format!(
            "red/blue ratios of red training pixels give unusable knots (a={a}, b={b}); \
             use a positive epsilon_div"
        ))
    })?;

    let model = SegmentationModel {
        red_ref,
        blue_ref,
        transfer,
        tau_red: distance_threshold(&red, red_ref, cfg.tau_floor),
        tau_blue: distance_threshold(&blue, blue_ref, cfg.tau_floor),
        alpha_min: cfg.alpha_min,
        decision_mode: cfg.decision_mode,
        transfer_variant: cfg.transfer_variant,
        epsilon_div: cfg.epsilon_div,
        literal_offset: 0.0,
    };
    model.validate()?;
    Ok(model)
}
