//! Test-pattern rasters: sine gratings, bilinear sampling, and synthetic
//! "captured impression" degradation (rescale + additive Gaussian noise).
//!
//! Intensity convention: 0 is a ridge (dark), 255 is background (white).

use alloc::vec::Vec;
use thiserror::Error;

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum PatternError {
    #[error("image dimensions must be non-zero, got {width}x{height}")]
    EmptyImage { width: u32, height: u32 },
    #[error("pixel buffer holds {got} bytes but {width}x{height} needs {need}")]
    SizeMismatch { width: u32, height: u32, got: usize, need: usize },
    #[error("grating period must be positive and finite, got {period}")]
    BadPeriod { period: f64 },
    #[error("resample scale must lie in [0.5, 2.0], got {scale}")]
    ScaleOutOfRange { scale: f64 },
    #[error("noise standard deviation must be non-negative and finite, got {std}")]
    BadNoise { std: f64 },
    #[error("ppi must be positive and finite, got {ppi}")]
    BadPpi { ppi: f64 },
}

/// 8-bit grayscale raster with a physical resolution tag.
///
/// Row-major storage, `y * width + x`. `ppi` converts pixel distances to
/// millimetres (`mm = px * 25.4 / ppi`).
#[derive(Clone, Debug, PartialEq)]
pub struct GrayscaleImage {
    width: u32,
    height: u32,
    pub ppi: f64,
    pixels: Vec<u8>,
}

impl GrayscaleImage {
    pub fn new(width: u32, height: u32, ppi: f64, fill: u8) -> Result<Self, PatternError> {
        Self::check_dims(width, height, ppi)?;
        Ok(GrayscaleImage {
            width,
            height,
            ppi,
            pixels: alloc::vec![fill; width as usize * height as usize],
        })
    }

    pub fn from_pixels(
        width: u32,
        height: u32,
        ppi: f64,
        pixels: Vec<u8>,
    ) -> Result<Self, PatternError> {
        Self::check_dims(width, height, ppi)?;
        let need = width as usize * height as usize;
        if pixels.len() != need {
            return Err(PatternError::SizeMismatch { width, height, got: pixels.len(), need });
        }
        Ok(GrayscaleImage { width, height, ppi, pixels })
    }

    fn check_dims(width: u32, height: u32, ppi: f64) -> Result<(), PatternError> {
        if width == 0 || height == 0 {
            return Err(PatternError::EmptyImage { width, height });
        }
        if !(ppi.is_finite() && ppi > 0.0) {
            return Err(PatternError::BadPpi { ppi });
        }
        Ok(())
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y as usize * self.width as usize + x as usize] = value;
    }

    /// Millimetres per pixel implied by the ppi tag.
    pub fn mm_per_px(&self) -> f64 {
        25.4 / self.ppi
    }

    /// Bilinear sample at fractional pixel coordinates, clamped to the edge
    /// (pixel centres sit at integer coordinates).
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        let x = x.clamp(0.0, max_x);
        let y = y.clamp(0.0, max_y);
        let x0 = x.floor();
        let y0 = y.floor();
        let x1 = (x0 + 1.0).min(max_x);
        let y1 = (y0 + 1.0).min(max_y);
        let fx = x - x0;
        let fy = y - y0;
        let at = |xx: f64, yy: f64| self.get(xx as u32, yy as u32) as f64;
        let top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
        let bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
        top * (1.0 - fy) + bottom * fy
    }

    /// Centre of the pixel grid, the reference point for radial gratings
    /// and for centre-preserving resampling.
    pub fn centre(&self) -> (f64, f64) {
        ((self.width - 1) as f64 / 2.0, (self.height - 1) as f64 / 2.0)
    }
}

/// Direction of intensity variation for [`sine_grating`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GratingKind {
    /// Stripes parallel to the y axis; intensity varies along x.
    Vertical,
    /// Stripes parallel to the x axis; intensity varies along y.
    Horizontal,
    /// Concentric rings about the image centre.
    Circular,
}

/// Sinusoidal grating: `round(127.5 * (1 + cos(2 pi d / period)))` where `d`
/// is the x coordinate, y coordinate, or distance from the image centre.
///
/// Phase is locked so `d = 0` is white (255) and `d = period / 2` is a ridge
/// crest (0).
pub fn sine_grating(
    kind: GratingKind,
    period_px: f64,
    width: u32,
    height: u32,
    ppi: f64,
) -> Result<GrayscaleImage, PatternError> {
    if !(period_px.is_finite() && period_px > 0.0) {
        return Err(PatternError::BadPeriod { period: period_px });
    }
    let mut img = GrayscaleImage::new(width, height, ppi, 0)?;
    let (cx, cy) = img.centre();
    for y in 0..height {
        for x in 0..width {
            let d = match kind {
                GratingKind::Vertical => x as f64,
                GratingKind::Horizontal => y as f64,
                GratingKind::Circular => {
                    let dx = x as f64 - cx;
                    let dy = y as f64 - cy;
                    (dx * dx + dy * dy).sqrt()
                }
            };
            let v = 127.5 * (1.0 + (core::f64::consts::TAU * d / period_px).cos());
            img.set(x, y, v.round() as u8);
        }
    }
    Ok(img)
}

/// Simulate capturing a printed/cast pattern: rescale about the image centre
/// by `scale` (bilinear), then add Gaussian noise with standard deviation
/// `noise_std`, clamped to [0, 255].
///
/// Fully deterministic for a given `seed`; with `scale = 1` and
/// `noise_std = 0` the output is byte-identical to the input.
pub fn synth_impression(
    source: &GrayscaleImage,
    scale: f64,
    noise_std: f64,
    seed: u64,
) -> Result<GrayscaleImage, PatternError> {
    if !(scale.is_finite() && (0.5..=2.0).contains(&scale)) {
        return Err(PatternError::ScaleOutOfRange { scale });
    }
    if !(noise_std.is_finite() && noise_std >= 0.0) {
        return Err(PatternError::BadNoise { std: noise_std });
    }
    let mut out = GrayscaleImage::new(source.width, source.height, source.ppi, 0)?;
    let (cx, cy) = source.centre();
    let mut rng = SplitMix64::new(seed);
    for y in 0..source.height {
        for x in 0..source.width {
            // Inverse map: a feature at distance r from the centre lands at
            // scale * r, so the output pixel looks up r = (x - cx) / scale.
            let sx = cx + (x as f64 - cx) / scale;
            let sy = cy + (y as f64 - cy) / scale;
            let mut v = source.sample_bilinear(sx, sy);
            if noise_std > 0.0 {
                v += noise_std * rng.next_gaussian();
            }
            out.set(x, y, v.round().clamp(0.0, 255.0) as u8);
        }
    }
    Ok(out)
}

/// SplitMix64: tiny, seedable, and stable across platforms and releases,
/// which keeps synthesized corpora byte-reproducible forever.
pub(crate) struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub(crate) fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub(crate) fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in (0, 1]; never zero, so it is safe under `ln`.
    fn next_f64_open(&mut self) -> f64 {
        (((self.next_u64() >> 11) + 1) as f64) * (1.0 / 9007199254740992.0)
    }

    /// Standard normal via Box-Muller. One value per call; the sine partner
    /// is discarded to keep the consumption pattern trivially deterministic.
    pub(crate) fn next_gaussian(&mut self) -> f64 {
        let u1 = self.next_f64_open();
        let u2 = self.next_f64_open();
        (-2.0 * u1.ln()).sqrt() * (core::f64::consts::TAU * u2).cos()
    }
}
