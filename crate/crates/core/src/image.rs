//! Image buffers and binary PPM (P6) I/O.
//!
//! Pixels are stored row-major. 8-bit samples are converted to `[0, 1]`
//! floats on ingestion by dividing by 255.

use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::color_model::RgbPixel;
use crate::error::{Error, Result};

/// Row-major image of arbitrary pixel type.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Clone> Image<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Image {
            width,
            height,
            data: vec![value; width * height],
        }
    }
}

impl<T> Image<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::invalid(format!(
                "buffer length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Image {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn pixels(&self) -> &[T] {
        &self.data
    }

    pub fn pixels_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_pixels(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: T) {
        self.data[y * self.width + x] = value;
    }

    pub fn row(&self, y: usize) -> &[T] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    /// Parallel pointwise map; output order matches the sequential map.
    pub fn par_map<U: Send>(&self, f: impl Fn(&T) -> U + Sync + Send) -> Image<U>
    where
        T: Sync,
    {
        Image {
            width: self.width,
            height: self.height,
            data: self.data.par_iter().map(f).collect(),
        }
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Image<U> {
        Image {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }
}

/// 8-bit RGB image as decoded from disk.
pub type Rgb8Image = Image<[u8; 3]>;

/// Linear float image with components in `[0, 1]`.
pub type RgbImage = Image<RgbPixel>;

impl Rgb8Image {
    pub fn to_rgb(&self) -> RgbImage {
        self.map(|p| RgbPixel::from_u8(*p))
    }
}

impl RgbImage {
    /// Quantizes to 8 bits with round-to-nearest.
    pub fn to_rgb8(&self) -> Rgb8Image {
        self.map(|p| p.to_u8())
    }
}

fn skip_ws_and_comments(bytes: &[u8], mut pos: usize) -> usize {
    loop {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
        } else {
            return pos;
        }
    }
}

fn read_header_int(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    *pos = skip_ws_and_comments(bytes, *pos);
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format("malformed PPM header".into()))
}

/// Decodes a binary PPM (P6) with maxval up to 255.
pub fn decode_ppm(bytes: &[u8]) -> Result<Rgb8Image> {
    if bytes.len() < 2 || &bytes[..2] != b"P6" {
        return Err(Error::Format("not a binary PPM (P6)".into()));
    }
    let mut pos = 2;
    let width = read_header_int(bytes, &mut pos)?;
    let height = read_header_int(bytes, &mut pos)?;
    let maxval = read_header_int(bytes, &mut pos)?;
    if width == 0 || height == 0 {
        return Err(Error::Format("PPM has zero dimension".into()));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format(format!("unsupported PPM maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::Format("malformed PPM header".into()));
    }
    pos += 1;
    let n = width * height;
    let raster = bytes
        .get(pos..pos + 3 * n)
        .ok_or_else(|| Error::Format("truncated PPM raster".into()))?;
    let data = raster
        .chunks_exact(3)
        .map(|c| {
            if maxval == 255 {
                [c[0], c[1], c[2]]
            } else {
                let s = |v: u8| ((v as usize * 255 + maxval / 2) / maxval).min(255) as u8;
                [s(c[0]), s(c[1]), s(c[2])]
            }
        })
        .collect();
    Image::from_vec(width, height, data)
}

pub fn encode_ppm(img: &Rgb8Image) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.reserve(img.data.len() * 3);
    for p in &img.data {
        out.extend_from_slice(p);
    }
    out
}

fn is_png(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

/// Reads a PPM file, or a PNG file when built with the `png` feature.
pub fn read_image(path: &Path) -> Result<Rgb8Image> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if is_png(path) {
        return decode_png(&bytes);
    }
    decode_ppm(&bytes)
}

pub fn write_image(path: &Path, img: &Rgb8Image) -> Result<()> {
    let bytes = if is_png(path) {
        encode_png(img)?
    } else {
        encode_ppm(img)
    };
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}

#[cfg(feature = "png")]
fn decode_png(bytes: &[u8]) -> Result<Rgb8Image> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::Format(e.to_string()))?
        .to_rgb8();
    let (w, h) = img.dimensions();
    let data = img.pixels().map(|p| p.0).collect();
    Image::from_vec(w as usize, h as usize, data)
}

#[cfg(not(feature = "png"))]
fn decode_png(_bytes: &[u8]) -> Result<Rgb8Image> {
    Err(Error::Format("PNG support requires the `png` feature".into()))
}

#[cfg(feature = "png")]
fn encode_png(img: &Rgb8Image) -> Result<Vec<u8>> {
    let raw: Vec<u8> = img.data.iter().flatten().copied().collect();
    let buf = image::RgbImage::from_raw(img.width as u32, img.height as u32, raw)
        .ok_or_else(|| Error::Format("bad PNG buffer".into()))?;
    let mut out = std::io::Cursor::new(Vec::new());
    buf.write_to(&mut out, image::ImageFormat::Png)
        .map_err(|e| Error::Format(e.to_string()))?;
    Ok(out.into_inner())
}

#[cfg(not(feature = "png"))]
fn encode_png(_img: &Rgb8Image) -> Result<Vec<u8>> {
    Err(Error::Format("PNG support requires the `png` feature".into()))
}

/// Draws a 1-pixel rectangle outline; `right` and `bottom` are exclusive.
pub fn draw_rect(img: &mut Rgb8Image, left: usize, top: usize, right: usize, bottom: usize, color: [u8; 3]) {
    let right = right.min(img.width);
    let bottom = bottom.min(img.height);
    if left >= right || top >= bottom {
        return;
    }
    for x in left..right {
        img.set(x, top, color);
        img.set(x, bottom - 1, color);
    }
    for y in top..bottom {
        img.set(left, y, color);
        img.set(right - 1, y, color);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppm_roundtrip() {
        let img = Image::from_vec(2, 1, vec![[1, 2, 3], [250, 0, 7]]).unwrap();
        let bytes = encode_ppm(&img);
        assert_eq!(decode_ppm(&bytes).unwrap(), img);
    }

    #[test]
    fn ppm_header_comments_and_maxval() {
        let mut bytes = b"P6 # made by hand\n1 1\n# c\n15\n".to_vec();
        bytes.extend_from_slice(&[15, 0, 5]);
        let img = decode_ppm(&bytes).unwrap();
        assert_eq!(*img.get(0, 0), [255, 0, 85]);
    }

    #[test]
    fn ppm_rejects_garbage() {
        assert!(decode_ppm(b"P3\n1 1\n255\n0 0 0").is_err());
        assert!(decode_ppm(b"P6\n2 2\n255\n\x00\x00").is_err());
        assert!(decode_ppm(b"P6\n0 2\n255\n").is_err());
    }

    #[test]
    fn rect_outline() {
        let mut img = Image::filled(4, 4, [0u8; 3]);
        draw_rect(&mut img, 1, 1, 3, 3, [9, 9, 9]);
        let lit = img.pixels().iter().filter(|p| p[0] == 9).count();
        assert_eq!(lit, 4);
    }
}
