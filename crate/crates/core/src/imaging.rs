//! Raster warping and scanline overlays for visual checks.
//!
//! Pixel `(x, y)` has its center at image coordinate `(x, y)`, the same frame
//! the correspondences use. Warps map every output pixel back through `H⁻¹`
//! and sample the source bilinearly; anything that lands outside the source is
//! black.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ImageEncoder, Rgb, RgbImage};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Mat3, Vec3H};
use crate::metrics::CorrespondenceSet;

/// Largest auto-fit output side, as a multiple of the larger input side.
const MAX_FIT_SCALE: f64 = 8.0;

/// 8-bit RGB image with at least one pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage(RgbImage);

impl RasterImage {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput("image dimensions must be at least 1".into()));
        }
        Ok(Self(RgbImage::new(width, height)))
    }

    pub fn from_rgb(img: RgbImage) -> Result<Self> {
        if img.width() == 0 || img.height() == 0 {
            return Err(Error::InvalidInput("image dimensions must be at least 1".into()));
        }
        Ok(Self(img))
    }

    pub fn from_fn(width: u32, height: u32, f: impl FnMut(u32, u32) -> [u8; 3]) -> Result<Self> {
        let mut f = f;
        Self::from_rgb(RgbImage::from_fn(width, height, |x, y| Rgb(f(x, y))))
    }

    pub fn width(&self) -> u32 {
        self.0.width()
    }

    pub fn height(&self) -> u32 {
        self.0.height()
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        self.0.get_pixel(x, y).0
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        self.0.put_pixel(x, y, Rgb(rgb));
    }

    pub fn as_rgb(&self) -> &RgbImage {
        &self.0
    }

    pub fn into_rgb(self) -> RgbImage {
        self.0
    }

    pub fn load(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_rgb(img.to_rgb8())
    }

    /// Writes binary PPM for `.ppm` paths and lets the extension pick the format otherwise.
    pub fn save(&self, path: &Path) -> Result<()> {
        let io_err = |e: image::ImageError| Error::Io(format!("{}: {e}", path.display()));
        let is_ppm = path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("ppm"));
        if is_ppm {
            let file = BufWriter::new(File::create(path)?);
            PnmEncoder::new(file)
                .with_subtype(PnmSubtype::Pixmap(SampleEncoding::Binary))
                .write_image(self.0.as_raw(), self.width(), self.height(), image::ExtendedColorType::Rgb8)
                .map_err(io_err)
        } else {
            self.0.save(path).map_err(io_err)
        }
    }
}

/// Output canvas of a warp: a window of the destination plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Canvas {
    /// Destination coordinate of output pixel `(0, 0)`.
    pub origin_x: i64,
    pub origin_y: i64,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputBounds {
    /// Same size and origin as the input.
    #[default]
    Input,
    /// Smallest pixel window holding the four mapped corners.
    AutoFit,
}

fn map(h: &Mat3, x: f64, y: f64) -> Option<(f64, f64)> {
    let p = h * Vec3H::new(x, y, 1.0);
    (p.z > 1e-12).then(|| (p.x / p.z, p.y / p.z))
}

/// Canvas for warping an image of the given size by `h`.
pub fn canvas_for(h: &Mat3, width: u32, height: u32, bounds: OutputBounds) -> Result<Canvas> {
    match bounds {
        OutputBounds::Input => Ok(Canvas { origin_x: 0, origin_y: 0, width, height }),
        OutputBounds::AutoFit => {
            let (w, hgt) = ((width - 1) as f64, (height - 1) as f64);
            let corners = [(0.0, 0.0), (w, 0.0), (w, hgt), (0.0, hgt)]
                .iter()
                .map(|&(x, y)| map(h, x, y))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::InvalidInput("image corner maps behind the camera".into()))?;
            let min_x = corners.iter().map(|c| c.0).fold(f64::INFINITY, f64::min).floor();
            let max_x = corners.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max).ceil();
            let min_y = corners.iter().map(|c| c.1).fold(f64::INFINITY, f64::min).floor();
            let max_y = corners.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max).ceil();
            let limit = MAX_FIT_SCALE * width.max(height) as f64;
            let (cw, ch) = (max_x - min_x + 1.0, max_y - min_y + 1.0);
            if !(cw <= limit && ch <= limit) {
                return Err(Error::InvalidInput(format!("auto-fit canvas {cw}x{ch} is too large")));
            }
            Ok(Canvas { origin_x: min_x as i64, origin_y: min_y as i64, width: cw as u32, height: ch as u32 })
        }
    }
}

fn sample_bilinear(img: &RgbImage, x: f64, y: f64) -> Option<[u8; 3]> {
    let (w, h) = (img.width() as f64, img.height() as f64);
    if !(x >= 0.0 && y >= 0.0 && x <= w - 1.0 && y <= h - 1.0) {
        return None;
    }
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let (x0, y0) = (x0 as u32, y0 as u32);
    let x1 = (x0 + 1).min(img.width() - 1);
    let y1 = (y0 + 1).min(img.height() - 1);
    let (a, b, c, d) = (img.get_pixel(x0, y0).0, img.get_pixel(x1, y0).0, img.get_pixel(x0, y1).0, img.get_pixel(x1, y1).0);
    let mut out = [0u8; 3];
    for k in 0..3 {
        let top = a[k] as f64 * (1.0 - fx) + b[k] as f64 * fx;
        let bottom = c[k] as f64 * (1.0 - fx) + d[k] as f64 * fx;
        out[k] = (top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8;
    }
    Some(out)
}

/// Warps `img` by `h` onto an explicit canvas.
pub fn warp_onto(img: &RasterImage, h: &Mat3, canvas: Canvas) -> Result<RasterImage> {
    let det = h.determinant();
    let inv = h.try_inverse().filter(|_| det.abs() >= 1e-12).ok_or(Error::SingularHomography(det))?;
    let mut out = RasterImage::new(canvas.width, canvas.height)?;
    let row_len = 3 * canvas.width as usize;
    let src = &img.0;
    out.0.par_chunks_mut(row_len).enumerate().for_each(|(y, row)| {
        let dy = (canvas.origin_y + y as i64) as f64;
        for x in 0..canvas.width as usize {
            let dx = (canvas.origin_x + x as i64) as f64;
            if let Some(rgb) = map(&inv, dx, dy).and_then(|(sx, sy)| sample_bilinear(src, sx, sy)) {
                row[3 * x..3 * x + 3].copy_from_slice(&rgb);
            }
        }
    });
    Ok(out)
}

/// Inverse-mapping bilinear warp.
pub fn warp(img: &RasterImage, h: &Mat3, bounds: OutputBounds) -> Result<RasterImage> {
    let canvas = canvas_for(h, img.width(), img.height(), bounds)?;
    warp_onto(img, h, canvas)
}

/// Indices of `k` matches spread evenly over the left-image rows, top to bottom.
pub fn scanline_matches(matches: &CorrespondenceSet, k: usize) -> Vec<usize> {
    let n = matches.len();
    if k == 0 || n == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| matches.pairs[a][1].total_cmp(&matches.pairs[b][1]).then(a.cmp(&b)));
    let k = k.min(n);
    let picks: Vec<usize> = if k == 1 {
        vec![order[n / 2]]
    } else {
        (0..k).map(|i| order[(i * (n - 1) + (k - 1) / 2) / (k - 1)]).collect()
    };
    picks
}

const PALETTE: [[u8; 3]; 6] = [[255, 64, 64], [64, 255, 64], [64, 128, 255], [255, 255, 64], [255, 64, 255], [64, 255, 255]];

/// Side-by-side composite with one horizontal line per selected match.
///
/// `matches` must be in the coordinates of the given images (already
/// rectified). Each line runs across both halves at the rounded row of the
/// left point.
pub fn overlay_scanlines(left: &RasterImage, right: &RasterImage, matches: &CorrespondenceSet, k: usize) -> RasterImage {
    let (wl, wr) = (left.width(), right.width());
    let height = left.height().max(right.height());
    let mut out = RgbImage::new(wl + wr, height);
    image::imageops::replace(&mut out, &left.0, 0, 0);
    image::imageops::replace(&mut out, &right.0, wl as i64, 0);
    for (i, idx) in scanline_matches(matches, k).into_iter().enumerate() {
        let row = matches.pairs[idx][1].round();
        if row < 0.0 || row >= height as f64 {
            continue;
        }
        let color = Rgb(PALETTE[i % PALETTE.len()]);
        for x in 0..out.width() {
            out.put_pixel(x, row as u32, color);
        }
    }
    RasterImage(out)
}
