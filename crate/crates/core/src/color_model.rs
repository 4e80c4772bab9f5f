//! rgb ⇄ spherical (l, θ, φ) conversion and a Lambertian blackbody pixel model.
//!
//! Convention: `theta = atan2(g, r)` is the azimuth in the r-g plane and
//! `phi` is the elevation of the color vector above that plane. Both angles
//! depend only on the direction of the color vector, so any positive scaling
//! of a pixel (shading, shadow, global intensity) leaves them unchanged.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{Image, RgbImage};

/// Magnitude below which a pixel is treated as achromatic (4/255).
pub const EPS_BLACK: f64 = 4.0 / 255.0;

/// Second radiation constant, m·K.
pub const SECOND_RADIATION_CONSTANT: f64 = 1.4388e-2;

/// Linear rgb sample with components in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RgbPixel {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl RgbPixel {
    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        RgbPixel { r, g, b }
    }

    /// Builds a pixel, rejecting components outside `[0, 1]` or non-finite.
    pub fn checked(r: f64, g: f64, b: f64) -> Result<Self> {
        let ok = |v: f64| (0.0..=1.0).contains(&v);
        if ok(r) && ok(g) && ok(b) {
            Ok(RgbPixel { r, g, b })
        } else {
            Err(Error::invalid(format!("rgb ({r}, {g}, {b}) outside [0, 1]")))
        }
    }

    pub fn from_u8(p: [u8; 3]) -> Self {
        RgbPixel {
            r: p[0] as f64 / 255.0,
            g: p[1] as f64 / 255.0,
            b: p[2] as f64 / 255.0,
        }
    }

    pub fn to_u8(self) -> [u8; 3] {
        let q = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
        [q(self.r), q(self.g), q(self.b)]
    }

    pub fn scale(self, s: f64) -> Self {
        RgbPixel {
            r: self.r * s,
            g: self.g * s,
            b: self.b * s,
        }
    }

    pub fn max_component(self) -> f64 {
        self.r.max(self.g).max(self.b)
    }

    pub fn magnitude(self) -> f64 {
        (self.r * self.r + self.g * self.g + self.b * self.b).sqrt()
    }
}

/// Color in spherical coordinates. Angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SphericalColor {
    pub l: f64,
    pub theta: f64,
    pub phi: f64,
    pub achromatic: bool,
}

#[inline]
pub fn rgb_to_spherical(p: RgbPixel) -> SphericalColor {
    let planar = (p.r * p.r + p.g * p.g).sqrt();
    let l = (p.r * p.r + p.g * p.g + p.b * p.b).sqrt();
    if l < EPS_BLACK {
        return SphericalColor {
            l,
            theta: 0.0,
            phi: 0.0,
            achromatic: true,
        };
    }
    // atan2(b, planar) == acos(planar / l), without the loss of precision
    // acos suffers near phi = 0.
    SphericalColor {
        l,
        theta: p.g.atan2(p.r),
        phi: p.b.atan2(planar),
        achromatic: false,
    }
}

pub fn spherical_to_rgb(s: SphericalColor) -> Result<RgbPixel> {
    if s.achromatic {
        return Err(Error::Achromatic);
    }
    let (st, ct) = s.theta.sin_cos();
    let (sp, cp) = s.phi.sin_cos();
    Ok(RgbPixel {
        r: s.l * cp * ct,
        g: s.l * cp * st,
        b: s.l * sp,
    })
}

/// Per-pixel spherical transform. Parallel, with output identical to a
/// sequential loop.
pub fn transform_image(img: &RgbImage) -> Image<SphericalColor> {
    let data: Vec<SphericalColor> = img
        .pixels()
        .par_iter()
        .map(|&p| rgb_to_spherical(p))
        .collect();
    Image::from_vec(img.width(), img.height(), data).expect("dimensions preserved")
}

/// Parameters of a Lambertian surface lit by a blackbody illuminant.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSceneSpec {
    /// Lambertian shading factor.
    pub sigma: f64,
    /// Overall light intensity.
    pub intensity: f64,
    /// Illuminant color temperature in kelvin.
    pub temperature: f64,
    pub k1: f64,
    /// m·K
    pub k2: f64,
    /// Channel wavelengths in meters, red first.
    pub lambda: [f64; 3],
    pub surface_reflectance: [f64; 3],
    pub sensor_sensitivity: [f64; 3],
}

impl Default for SyntheticSceneSpec {
    fn default() -> Self {
        SyntheticSceneSpec {
            sigma: 1.0,
            intensity: 1.0,
            temperature: 6500.0,
            k1: 1.0,
            k2: SECOND_RADIATION_CONSTANT,
            lambda: [800e-9, 550e-9, 460e-9],
            surface_reflectance: [1.0; 3],
            sensor_sensitivity: [1.0; 3],
        }
    }
}

impl SyntheticSceneSpec {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !(nonneg(self.sigma) && nonneg(self.intensity) && nonneg(self.k1) && nonneg(self.k2)) {
            return Err(Error::invalid("sigma, intensity, k1 and k2 must be finite and nonnegative"));
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::invalid("temperature must be positive"));
        }
        if self.lambda.iter().any(|&l| !(l.is_finite() && l > 0.0))
            || !(self.lambda[0] > self.lambda[1] && self.lambda[1] > self.lambda[2])
        {
            return Err(Error::invalid(
                "wavelengths must be positive and strictly decreasing from red to blue",
            ));
        }
        if self
            .surface_reflectance
            .iter()
            .any(|&s| !(0.0..=1.0).contains(&s))
        {
            return Err(Error::invalid("surface reflectance must lie in [0, 1]"));
        }
        if self.sensor_sensitivity.iter().any(|&q| !nonneg(q)) {
            return Err(Error::invalid("sensor sensitivity must be nonnegative"));
        }
        Ok(())
    }

    /// Unscaled channel responses `σ I k1 λ⁻⁵ exp(−k2 / (T λ)) S q`.
    pub fn raw_response(&self) -> Result<[f64; 3]> {
        self.validate()?;
        let mut out = [0.0; 3];
        for (k, c) in out.iter_mut().enumerate() {
            let lam = self.lambda[k];
            *c = self.sigma
                * self.intensity
                * self.k1
                * lam.powi(-5)
                * (-self.k2 / (self.temperature * lam)).exp()
                * self.surface_reflectance[k]
                * self.sensor_sensitivity[k];
        }
        if out.iter().all(|c| c.is_finite()) {
            Ok(out)
        } else {
            Err(Error::NonFinite {
                temperature: self.temperature,
            })
        }
    }
}

/// How the raw radiometric response is mapped into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exposure {
    /// Scale so the largest channel is exactly 1 (identity for black).
    Auto,
    /// Caller-chosen factor; rendering fails if it would saturate.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderedPixel {
    pub pixel: RgbPixel,
    pub exposure: f64,
}

pub fn render_lambertian(spec: &SyntheticSceneSpec, exposure: Exposure) -> Result<RenderedPixel> {
    let raw = spec.raw_response()?;
    let max = raw[0].max(raw[1]).max(raw[2]);
    let factor = match exposure {
        Exposure::Auto if max > 0.0 => 1.0 / max,
        Exposure::Auto => 1.0,
        Exposure::Fixed(f) => {
            if !(f.is_finite() && f >= 0.0) {
                return Err(Error::invalid("exposure factor must be finite and nonnegative"));
            }
            f
        }
    };
    let pixel = RgbPixel::new(raw[0] * factor, raw[1] * factor, raw[2] * factor);
    if !pixel.max_component().is_finite() {
        return Err(Error::NonFinite {
            temperature: spec.temperature,
        });
    }
    if pixel.max_component() > 1.0 + 1e-12 {
        return Err(Error::invalid(format!(
            "exposure {factor} saturates the rendered pixel"
        )));
    }
    let clamp = |v: f64| v.min(1.0);
    Ok(RenderedPixel {
        pixel: RgbPixel::new(clamp(pixel.r), clamp(pixel.g), clamp(pixel.b)),
        exposure: factor,
    })
}
