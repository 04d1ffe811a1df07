//! Raster IO: binary PGM (P5, maxval 255) as the canonical format, with the
//! resolution carried in a `# ppi <value>` header comment, plus 8-bit
//! grayscale PNG import.
//!
//! Resolution precedence on load: explicit override, then the file's own
//! metadata, then [`DEFAULT_PPI`].

use std::io;
use std::path::Path;

use fptarget_core::pattern::GrayscaleImage;
use thiserror::Error;

/// Assumed capture resolution when neither the file nor the caller says.
pub const DEFAULT_PPI: f64 = 500.0;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("not a binary PGM: magic is {magic:?}, expected \"P5\"")]
    BadMagic { magic: String },
    #[error("PGM header ended early: {missing}")]
    HeaderTruncated { missing: &'static str },
    #[error("PGM maxval {maxval} unsupported, only 255")]
    BadMaxval { maxval: u32 },
    #[error("pixel data is {found} bytes, {width}x{height} needs {needed}")]
    PixelCount { width: u32, height: u32, needed: usize, found: usize },
    #[error("bad image geometry: {reason}")]
    Geometry { reason: String },
    #[error("{path}: PNG decode failed: {reason}")]
    Png { path: String, reason: String },
    #[error("{path}: PNG is {found}, need 8-bit grayscale")]
    PngNotGray8 { path: String, found: String },
    #[error("unsupported image extension {extension:?}, use .pgm or .png")]
    UnknownFormat { extension: String },
}

pub fn pgm_bytes(image: &GrayscaleImage) -> Vec<u8> {
    let header = format!(
        "P5\n# ppi {}\n{} {}\n255\n",
        image.ppi,
        image.width(),
        image.height()
    );
    let mut out = header.into_bytes();
    out.extend_from_slice(image.pixels());
    out
}

pub fn write_pgm(image: &GrayscaleImage, path: impl AsRef<Path>) -> Result<(), ImageError> {
    let path = path.as_ref();
    std::fs::write(path, pgm_bytes(image)).map_err(|source| ImageError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_pgm_bytes(
    bytes: &[u8],
    ppi_override: Option<f64>,
) -> Result<GrayscaleImage, ImageError> {
    let mut comment_ppi = None;

    let skip_separators = |cursor: &mut usize, comment_ppi: &mut Option<f64>| {
        loop {
            while bytes.get(*cursor).is_some_and(|b| b.is_ascii_whitespace()) {
                *cursor += 1;
            }
            if bytes.get(*cursor) == Some(&b'#') {
                let line_end = bytes[*cursor..]
                    .iter()
                    .position(|&b| b == b'\n')
                    .map_or(bytes.len(), |at| *cursor + at);
                let comment = String::from_utf8_lossy(&bytes[*cursor + 1..line_end]);
                if let Some(value) = comment.trim().strip_prefix("ppi ") {
                    if let Ok(ppi) = value.trim().parse::<f64>() {
                        *comment_ppi = Some(ppi);
                    }
                }
                *cursor = line_end;
            } else {
                return;
            }
        }
    };

    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(ImageError::BadMagic {
            magic: String::from_utf8_lossy(bytes.get(..2).unwrap_or(b"")).into_owned(),
        });
    }
    let mut cursor = 2usize;

    let field = |cursor: &mut usize,
                     comment_ppi: &mut Option<f64>,
                     name: &'static str|
     -> Result<u32, ImageError> {
        skip_separators(cursor, comment_ppi);
        let start = *cursor;
        while bytes.get(*cursor).is_some_and(|b| b.is_ascii_digit()) {
            *cursor += 1;
        }
        if start == *cursor {
            return Err(ImageError::HeaderTruncated { missing: name });
        }
        String::from_utf8_lossy(&bytes[start..*cursor])
            .parse()
            .map_err(|_| ImageError::HeaderTruncated { missing: name })
    };

    let width = field(&mut cursor, &mut comment_ppi, "width")?;
    let height = field(&mut cursor, &mut comment_ppi, "height")?;
    let maxval = field(&mut cursor, &mut comment_ppi, "maxval")?;
    if maxval != 255 {
        return Err(ImageError::BadMaxval { maxval });
    }
    if bytes.get(cursor).is_none() {
        return Err(ImageError::HeaderTruncated { missing: "pixel data" });
    }
    cursor += 1; // exactly one separator byte after maxval

    let needed = width as usize * height as usize;
    let found = bytes.len().saturating_sub(cursor);
    if found != needed {
        return Err(ImageError::PixelCount { width, height, needed, found });
    }
    let ppi = ppi_override.or(comment_ppi).unwrap_or(DEFAULT_PPI);
    GrayscaleImage::from_pixels(width, height, ppi, bytes[cursor..].to_vec())
        .map_err(|e| ImageError::Geometry { reason: e.to_string() })
}

pub fn read_pgm(
    path: impl AsRef<Path>,
    ppi_override: Option<f64>,
) -> Result<GrayscaleImage, ImageError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| ImageError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_pgm_bytes(&bytes, ppi_override)
}

fn read_png(path: &Path, ppi_override: Option<f64>) -> Result<GrayscaleImage, ImageError> {
    let decoded = image::open(path).map_err(|e| ImageError::Png {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let gray = match decoded {
        image::DynamicImage::ImageLuma8(buffer) => buffer,
        other => {
            return Err(ImageError::PngNotGray8 {
                path: path.display().to_string(),
                found: format!("{:?}", other.color()),
            })
        }
    };
    // PNG carries no ppi here; callers pass a flag or accept the default.
    let ppi = ppi_override.unwrap_or(DEFAULT_PPI);
    GrayscaleImage::from_pixels(gray.width(), gray.height(), ppi, gray.into_raw())
        .map_err(|e| ImageError::Geometry { reason: e.to_string() })
}

/// Load a PGM or PNG by extension.
pub fn load_image(
    path: impl AsRef<Path>,
    ppi_override: Option<f64>,
) -> Result<GrayscaleImage, ImageError> {
    let path = path.as_ref();
    let extension = path
        .extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    match extension.as_str() {
        "pgm" => read_pgm(path, ppi_override),
        "png" => read_png(path, ppi_override),
        other => Err(ImageError::UnknownFormat { extension: other.to_string() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use fptarget_core::pattern::{sine_grating, GratingKind};

    #[test]
    fn pgm_roundtrip_is_pixel_exact_and_keeps_ppi() {
        let img = sine_grating(GratingKind::Circular, 9.0, 37, 23, 508.5).unwrap();
        let bytes = pgm_bytes(&img);
        let back = read_pgm_bytes(&bytes, None).unwrap();
        assert_eq!(back.pixels(), img.pixels());
        assert_eq!(back.width(), 37);
        assert_eq!(back.height(), 23);
        assert_eq!(back.ppi, 508.5);
    }

    #[test]
    fn override_beats_comment_beats_default() {
        let img = sine_grating(GratingKind::Vertical, 8.0, 8, 8, 750.0).unwrap();
        let bytes = pgm_bytes(&img);
        assert_eq!(read_pgm_bytes(&bytes, Some(300.0)).unwrap().ppi, 300.0);
        assert_eq!(read_pgm_bytes(&bytes, None).unwrap().ppi, 750.0);

        let plain = b"P5\n4 2\n255\naabbccdd";
        assert_eq!(read_pgm_bytes(plain, None).unwrap().ppi, DEFAULT_PPI);
    }

    #[test]
    fn foreign_headers_with_interleaved_comments_parse() {
        let bytes = b"P5 # written elsewhere\n# ppi 1000\n  6\n# size split over lines\n1\n255\nprints";
        let img = read_pgm_bytes(bytes, None).unwrap();
        assert_eq!((img.width(), img.height()), (6, 1));
        assert_eq!(img.ppi, 1000.0);
        assert_eq!(img.pixels(), b"prints");
    }

    #[test]
    fn bad_files_name_the_offense() {
        assert!(matches!(
            read_pgm_bytes(b"P6\n1 1\n255\nx", None),
            Err(ImageError::BadMagic { .. })
        ));
        assert!(matches!(
            read_pgm_bytes(b"P5\n2 2\n65535\nxxxxxxxx", None),
            Err(ImageError::BadMaxval { maxval: 65535 })
        ));
        assert!(matches!(
            read_pgm_bytes(b"P5\n4 4\n255\nshort", None),
            Err(ImageError::PixelCount { needed: 16, found: 5, .. })
        ));
        assert!(matches!(
            read_pgm_bytes(b"P5\n4\n", None),
            Err(ImageError::HeaderTruncated { .. })
        ));
    }
}
