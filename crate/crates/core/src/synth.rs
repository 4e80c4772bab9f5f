//! Synthetic road scenes rendered with the Lambertian blackbody model.
//!
//! A scene is a set of flat patches (discs, squares, triangles) painted
//! red, blue or gray over a neutral background. Every scene is rendered
//! at each requested illuminant temperature and intensity. With
//! `snap_quantization` on, each uniform patch's reflectance is adjusted so
//! its 8-bit value at full intensity is a multiple of 4; the images at
//! intensities 1/2 and 1/4 are then exact integer scalings of it, so the
//! spherical angles survive quantization unchanged.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::color_model::{render_lambertian, Exposure, RgbPixel, SyntheticSceneSpec};
use crate::detection::BBox;
use crate::error::{Error, Result};
use crate::evaluation::GroundTruthRecord;
use crate::image::{Image, Rgb8Image};
use crate::pipeline::AnnotationRow;
use crate::segmentation::ClassLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatchShape {
    Disc,
    Square,
    Triangle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Material {
    Red,
    Blue,
    Gray,
    Background,
}

impl Material {
    pub fn reflectance(self) -> [f64; 3] {
        match self {
            Material::Red => [0.90, 0.08, 0.08],
            Material::Blue => [0.05, 0.25, 0.85],
            Material::Gray => [0.55, 0.55, 0.55],
            Material::Background => [0.30, 0.36, 0.28],
        }
    }

    pub fn label(self) -> ClassLabel {
        match self {
            Material::Red => ClassLabel::Red,
            Material::Blue => ClassLabel::Blue,
            Material::Gray | Material::Background => ClassLabel::Background,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Patch {
    pub shape: PatchShape,
    pub material: Material,
    pub left: usize,
    pub top: usize,
    pub size: usize,
    /// Shading at the top and bottom rows, interpolated linearly.
    pub sigma_top: f64,
    pub sigma_bottom: f64,
}

impl Patch {
    /// Whether local pixel `(x, y)` of the patch's `size x size` square is covered.
    pub fn covers_local(&self, x: usize, y: usize) -> bool {
        let s = self.size as f64;
        let (cx, cy) = (x as f64 + 0.5, y as f64 + 0.5);
        match self.shape {
            PatchShape::Square => true,
            PatchShape::Disc => {
                let r = s / 2.0;
                (cx - r).powi(2) + (cy - r).powi(2) <= r * r
            }
            PatchShape::Triangle => (cx - s / 2.0).abs() <= (cy + 0.5) / 2.0,
        }
    }

    pub fn covers(&self, x: usize, y: usize) -> bool {
        x >= self.left
            && y >= self.top
            && x < self.left + self.size
            && y < self.top + self.size
            && self.covers_local(x - self.left, y - self.top)
    }

    pub fn sigma_at(&self, y: usize) -> f64 {
        if self.size <= 1 {
            return self.sigma_top;
        }
        let t = (y - self.top) as f64 / (self.size - 1) as f64;
        self.sigma_top + (self.sigma_bottom - self.sigma_top) * t
    }

    /// Tight bounds of the rasterized patch.
    pub fn bbox(&self) -> BBox {
        let (mut l, mut t, mut r, mut b) = (usize::MAX, usize::MAX, 0, 0);
        for y in 0..self.size {
            for x in 0..self.size {
                if self.covers_local(x, y) {
                    l = l.min(x);
                    t = t.min(y);
                    r = r.max(x + 1);
                    b = b.max(y + 1);
                }
            }
        }
        BBox::new(
            (self.left + l) as u32,
            (self.top + t) as u32,
            (self.left + r) as u32,
            (self.top + b) as u32,
        )
        .expect("patch covers at least one pixel")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneLayout {
    pub width: usize,
    pub height: usize,
    pub background_sigma: f64,
    pub patches: Vec<Patch>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub scenes: usize,
    pub width: usize,
    pub height: usize,
    pub red_patches: usize,
    pub blue_patches: usize,
    pub gray_patches: usize,
    pub size_min: usize,
    pub size_max: usize,
    pub temperatures: Vec<f64>,
    /// Each in (0, 1].
    pub intensities: Vec<f64>,
    /// Range of per-patch shading; patches are uniform unless `gradient`.
    pub sigma_range: (f64, f64),
    pub gradient: bool,
    pub snap_quantization: bool,
    /// Uniform per-channel noise amplitude in 8-bit levels.
    pub noise_levels: u8,
    pub samples_per_patch: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 42,
            scenes: 4,
            width: 160,
            height: 120,
            red_patches: 3,
            blue_patches: 2,
            gray_patches: 1,
            size_min: 16,
            size_max: 32,
            temperatures: vec![6500.0],
            intensities: vec![0.25, 0.5, 1.0],
            sigma_range: (1.0, 1.0),
            gradient: false,
            snap_quantization: true,
            noise_levels: 0,
            samples_per_patch: 8,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.scenes == 0 || self.temperatures.is_empty() || self.intensities.is_empty() {
            return Err(Error::invalid("synth needs at least one scene, temperature and intensity"));
        }
        if self.intensities.iter().any(|&i| !(i > 0.0 && i <= 1.0)) {
            return Err(Error::invalid("synth intensities must lie in (0, 1]"));
        }
        if self.temperatures.iter().any(|&t| !(t.is_finite() && t > 0.0)) {
            return Err(Error::invalid("synth temperatures must be positive"));
        }
        let (lo, hi) = self.sigma_range;
        if !(0.0 < lo && lo <= hi && hi <= 1.0) {
            return Err(Error::invalid("sigma range must satisfy 0 < lo <= hi <= 1"));
        }
        if !(4 <= self.size_min && self.size_min <= self.size_max) {
            return Err(Error::invalid("patch sizes need 4 <= size_min <= size_max"));
        }
        if self.size_max + 4 > self.width.min(self.height) {
            return Err(Error::invalid("patches do not fit the image"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthImage {
    pub image_id: String,
    pub scene: usize,
    pub temperature: f64,
    pub intensity: f64,
    pub image: Rgb8Image,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SynthDataset {
    pub images: Vec<SynthImage>,
    pub ground_truth: Vec<GroundTruthRecord>,
    pub annotations: Vec<AnnotationRow>,
}

impl SynthDataset {
    /// Writes `images/*.ppm`, `gt.csv` and `train.csv` under `dir`.
    pub fn write_to(&self, dir: &std::path::Path) -> Result<()> {
        let images = dir.join("images");
        std::fs::create_dir_all(&images).map_err(|e| Error::io(&images, e))?;
        for img in &self.images {
            crate::image::write_image(&images.join(&img.image_id), &img.image)?;
        }
        let gt = dir.join("gt.csv");
        std::fs::write(&gt, crate::evaluation::format_ground_truth(&self.ground_truth))
            .map_err(|e| Error::io(&gt, e))?;
        let tr = dir.join("train.csv");
        std::fs::write(&tr, crate::pipeline::format_annotations(&self.annotations))
            .map_err(|e| Error::io(&tr, e))?;
        Ok(())
    }
}

fn overlaps(a: &Patch, b: &Patch, gap: usize) -> bool {
    a.left < b.left + b.size + gap
        && b.left < a.left + a.size + gap
        && a.top < b.top + b.size + gap
        && b.top < a.top + a.size + gap
}

/// Places patches by rejection sampling with a 3-pixel gap between them.
pub fn random_layout(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<SceneLayout> {
    let shapes = [PatchShape::Disc, PatchShape::Square, PatchShape::Triangle];
    let materials = std::iter::repeat_n(Material::Red, cfg.red_patches)
        .chain(std::iter::repeat_n(Material::Blue, cfg.blue_patches))
        .chain(std::iter::repeat_n(Material::Gray, cfg.gray_patches));
    let mut patches: Vec<Patch> = Vec::new();
    for material in materials {
        let mut placed = false;
        for _ in 0..1000 {
            let size = rng.gen_range(cfg.size_min..=cfg.size_max);
            let shape = shapes[rng.gen_range(0..shapes.len())];
            let left = rng.gen_range(2..=cfg.width - size - 2);
            let top = rng.gen_range(2..=cfg.height - size - 2);
            let (lo, hi) = cfg.sigma_range;
            let s1 = if lo < hi { rng.gen_range(lo..=hi) } else { lo };
            let s2 = if cfg.gradient && lo < hi { rng.gen_range(lo..=hi) } else { s1 };
            let p = Patch {
                shape,
                material,
                left,
                top,
                size,
                sigma_top: s1,
                sigma_bottom: s2,
            };
            if patches.iter().all(|q| !overlaps(&p, q, 3)) {
                patches.push(p);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::invalid("could not place all patches; enlarge the image"));
        }
    }
    Ok(SceneLayout {
        width: cfg.width,
        height: cfg.height,
        background_sigma: 0.6,
        patches,
    })
}

fn spec(material: Material, sigma: f64, temperature: f64, intensity: f64) -> SyntheticSceneSpec {
    SyntheticSceneSpec {
        sigma,
        intensity,
        temperature,
        surface_reflectance: material.reflectance(),
        ..Default::default()
    }
}

/// Exposure that maps the brightest unshaded material channel to 0.9.
pub fn scene_exposure(temperature: f64) -> Result<f64> {
    let mut max: f64 = 0.0;
    for m in [Material::Red, Material::Blue, Material::Gray, Material::Background] {
        let raw = spec(m, 1.0, temperature, 1.0).raw_response()?;
        max = max.max(raw[0]).max(raw[1]).max(raw[2]);
    }
    Ok(0.9 / max)
}

/// Reflectance whose full-intensity 8-bit rendering is a multiple of 4 per
/// channel (rounded down, so it never exceeds the original).
fn snapped_spec(material: Material, sigma: f64, temperature: f64, exposure: f64) -> Result<SyntheticSceneSpec> {
    let mut s = spec(material, sigma, temperature, 1.0);
    let c = render_lambertian(&s, Exposure::Fixed(exposure))?.pixel;
    for (k, v) in [c.r, c.g, c.b].into_iter().enumerate() {
        let levels = (v * 255.0 + 1e-9).floor() as u32 / 4 * 4;
        s.surface_reflectance[k] = if v > 0.0 {
            s.surface_reflectance[k] * (levels as f64 / 255.0) / v
        } else {
            0.0
        };
    }
    Ok(s)
}

fn render_surface(
    material: Material,
    sigma: f64,
    temperature: f64,
    intensity: f64,
    exposure: f64,
    snap: bool,
) -> Result<RgbPixel> {
    let mut s = if snap {
        snapped_spec(material, sigma, temperature, exposure)?
    } else {
        spec(material, sigma, temperature, 1.0)
    };
    s.intensity = intensity;
    Ok(render_lambertian(&s, Exposure::Fixed(exposure))?.pixel)
}

/// Renders a layout at one temperature and intensity.
pub fn render_scene(
    layout: &SceneLayout,
    temperature: f64,
    intensity: f64,
    snap: bool,
    noise_levels: u8,
    rng: &mut ChaCha8Rng,
) -> Result<Rgb8Image> {
    let exposure = scene_exposure(temperature)?;
    let bg = render_surface(Material::Background, layout.background_sigma, temperature, intensity, exposure, snap)?;
    let mut img = Image::filled(layout.width, layout.height, bg.to_u8());
    for p in &layout.patches {
        let uniform = p.sigma_top == p.sigma_bottom;
        let flat = render_surface(p.material, p.sigma_top, temperature, intensity, exposure, snap && uniform)?;
        for y in p.top..p.top + p.size {
            let color = if uniform {
                flat
            } else {
                render_surface(p.material, p.sigma_at(y), temperature, intensity, exposure, false)?
            };
            for x in p.left..p.left + p.size {
                if p.covers(x, y) {
                    img.set(x, y, color.to_u8());
                }
            }
        }
    }
    if noise_levels > 0 {
        let n = noise_levels as i16;
        for px in img.pixels_mut() {
            for c in px.iter_mut() {
                let d: i16 = rng.gen_range(-n..=n);
                *c = (*c as i16 + d).clamp(0, 255) as u8;
            }
        }
    }
    Ok(img)
}

pub fn image_id(scene: usize, temperature: f64, intensity: f64) -> String {
    format!("s{scene:03}_t{:05}_i{intensity:.2}.ppm", temperature.round() as u64)
}

fn ground_truth_for(layout: &SceneLayout, image_id: &str) -> Vec<GroundTruthRecord> {
    layout
        .patches
        .iter()
        .filter(|p| matches!(p.material, Material::Red | Material::Blue))
        .map(|p| GroundTruthRecord {
            image_id: image_id.to_string(),
            bbox: p.bbox(),
            class_tag: Some(p.material.label().name().to_string()),
        })
        .collect()
}

fn sample_annotations(
    layout: &SceneLayout,
    image_id: &str,
    per_patch: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<AnnotationRow> {
    let mut out = Vec::new();
    for p in &layout.patches {
        let mut got = 0;
        let mut tries = 0;
        while got < per_patch && tries < per_patch * 50 {
            tries += 1;
            let x = rng.gen_range(p.left..p.left + p.size);
            let y = rng.gen_range(p.top..p.top + p.size);
            if p.covers(x, y) {
                out.push(AnnotationRow {
                    image_id: image_id.to_string(),
                    x: x as u32,
                    y: y as u32,
                    class: p.material.label(),
                });
                got += 1;
            }
        }
    }
    let mut got = 0;
    while got < per_patch {
        let x = rng.gen_range(0..layout.width);
        let y = rng.gen_range(0..layout.height);
        if layout.patches.iter().all(|p| !p.covers(x, y)) {
            out.push(AnnotationRow {
                image_id: image_id.to_string(),
                x: x as u32,
                y: y as u32,
                class: ClassLabel::Background,
            });
            got += 1;
        }
    }
    out
}

/// Renders an explicit list of layouts, each at every temperature and
/// intensity in `cfg`.
pub fn render_layouts(layouts: &[SceneLayout], cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<SynthDataset> {
    let mut ds = SynthDataset::default();
    for (scene, layout) in layouts.iter().enumerate() {
        for &t in &cfg.temperatures {
            for &i in &cfg.intensities {
                let id = image_id(scene, t, i);
                let image = render_scene(layout, t, i, cfg.snap_quantization, cfg.noise_levels, rng)?;
                ds.ground_truth.extend(ground_truth_for(layout, &id));
                ds.annotations
                    .extend(sample_annotations(layout, &id, cfg.samples_per_patch, rng));
                ds.images.push(SynthImage {
                    image_id: id,
                    scene,
                    temperature: t,
                    intensity: i,
                    image,
                });
            }
        }
    }
    Ok(ds)
}

/// Seeded random scenes; identical config and seed give identical bytes.
pub fn generate(cfg: &SynthConfig) -> Result<SynthDataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let layouts = (0..cfg.scenes)
        .map(|_| random_layout(cfg, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    render_layouts(&layouts, cfg, &mut rng)
}

/// Five hand-built images with known outcomes under the default pipeline:
///
/// 1. red disc, annotated: true positive
/// 2. blue square, annotated: true positive
/// 3. red triangle, annotated, plus an unannotated blue disc: TP + FP
/// 4. annotated gray square (a faded sign): false negative
/// 5. annotated 5x5 red speck below the area filter: false negative
///
/// Totals: TP 3, FP 1, FN 2.
pub fn eval_fixture() -> Result<SynthDataset> {
    let patch = |shape, material, left, top, size| Patch {
        shape,
        material,
        left,
        top,
        size,
        sigma_top: 1.0,
        sigma_bottom: 1.0,
    };
    let scenes: [Vec<(Patch, bool)>; 5] = [
        vec![(patch(PatchShape::Disc, Material::Red, 30, 16, 28), true)],
        vec![(patch(PatchShape::Square, Material::Blue, 40, 20, 20), true)],
        vec![
            (patch(PatchShape::Triangle, Material::Red, 8, 10, 26), true),
            (patch(PatchShape::Disc, Material::Blue, 56, 18, 22), false),
        ],
        vec![(patch(PatchShape::Square, Material::Gray, 34, 18, 24), true)],
        vec![(patch(PatchShape::Square, Material::Red, 45, 30, 5), true)],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut ds = SynthDataset::default();
    for (k, scene) in scenes.iter().enumerate() {
        let layout = SceneLayout {
            width: 96,
            height: 64,
            background_sigma: 0.6,
            patches: scene.iter().map(|(p, _)| *p).collect(),
        };
        let id = format!("{:05}.ppm", k + 1);
        let image = render_scene(&layout, 6500.0, 1.0, true, 0, &mut rng)?;
        for (p, annotated) in scene {
            if *annotated {
                ds.ground_truth.push(GroundTruthRecord {
                    image_id: id.clone(),
                    bbox: p.bbox(),
                    class_tag: Some(p.material.label().name().to_string()),
                });
            }
        }
        // train only on the first two images
        if k < 2 {
            ds.annotations.extend(sample_annotations(&layout, &id, 12, &mut rng));
        }
        ds.images.push(SynthImage {
            image_id: id,
            scene: k,
            temperature: 6500.0,
            intensity: 1.0,
            image,
        });
    }
    Ok(ds)
}

/// Annotated 64x64 crops under varied illuminant temperature, intensity,
/// shading gradients and sensor noise.
pub fn crops_fixture(seed: u64, count: usize) -> Result<SynthDataset> {
    let cfg = SynthConfig {
        seed,
        scenes: 1,
        width: 64,
        height: 64,
        red_patches: 1,
        blue_patches: 1,
        gray_patches: 0,
        size_min: 18,
        size_max: 26,
        sigma_range: (0.5, 1.0),
        gradient: true,
        snap_quantization: false,
        noise_levels: 2,
        samples_per_patch: 10,
        ..Default::default()
    };
    let temps = [3000.0, 4500.0, 6500.0, 8000.0, 10000.0];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ds = SynthDataset::default();
    for k in 0..count {
        let mut c = cfg.clone();
        // alternate single-sign and two-sign crops
        if k % 2 == 0 {
            if k % 4 == 0 {
                c.blue_patches = 0;
            } else {
                c.red_patches = 0;
            }
        }
        let layout = random_layout(&c, &mut rng)?;
        let t = temps[k % temps.len()];
        let i = rng.gen_range(0.35..=1.0);
        let id = format!("crop{k:03}.ppm");
        let image = render_scene(&layout, t, i, false, c.noise_levels, &mut rng)?;
        ds.ground_truth.extend(ground_truth_for(&layout, &id));
        ds.annotations
            .extend(sample_annotations(&layout, &id, c.samples_per_patch, &mut rng));
        ds.images.push(SynthImage {
            image_id: id,
            scene: k,
            temperature: t,
            intensity: i,
            image,
        });
    }
    Ok(ds)
}
