//! PGM/PPM reading and writing.
//!
//! Input images are single-channel PGM, binary (P5) or plain (P2), with any
//! maxval up to 65535. Output masks are P5 with values 0/255; overlays are
//! P6.

use std::fs;
use std::io;
use std::path::Path;

use lvseg_core::drlse::{Contour, Point};
use lvseg_core::imgrid::{BinaryMask, GrayImage};

use crate::error::{CliError, ImageError, Result};

pub type Rgb = [u8; 3];

pub const ENDO_COLOR: Rgb = [255, 0, 0];
pub const EPI_COLOR: Rgb = [0, 255, 0];

/// Decoded PGM samples, row-major, with their declared maxval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub samples: Vec<u16>,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> std::result::Result<u32, ImageError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(if self.pos >= self.bytes.len() {
                ImageError::Truncated(format!("missing {what}"))
            } else {
                ImageError::Malformed(format!("expected a number for {what}"))
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ImageError::Malformed(format!("{what} out of range")))
    }
}

/// Decodes a P2 or P5 byte stream.
pub fn decode_pgm(bytes: &[u8]) -> std::result::Result<Pgm, ImageError> {
    if bytes.len() < 2 {
        return Err(ImageError::Truncated("missing magic number".into()));
    }
    let binary = match &bytes[..2] {
        b"P5" => true,
        b"P2" => false,
        b"P6" => return Err(ImageError::MultiChannel("P6")),
        b"P3" => return Err(ImageError::MultiChannel("P3")),
        other => {
            return Err(ImageError::Unsupported(format!(
                "magic {:?}",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(ImageError::Malformed("zero dimension".into()));
    }
    if maxval == 0 || maxval > u16::MAX as u32 {
        return Err(ImageError::Unsupported(format!("maxval {maxval}")));
    }
    let maxval = maxval as u16;
    let n = width
        .checked_mul(height)
        .ok_or_else(|| ImageError::Malformed("dimensions overflow".into()))?;

    let samples = if binary {
        // Exactly one whitespace byte separates the header from the raster.
        match bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            Some(_) => return Err(ImageError::Malformed("no whitespace after maxval".into())),
            None => return Err(ImageError::Truncated("no raster data".into())),
        }
        let wide = maxval > 255;
        let need = if wide { 2 * n } else { n };
        let raster = &bytes[cur.pos..];
        if raster.len() < need {
            return Err(ImageError::Truncated(format!(
                "expected {need} raster bytes, found {}",
                raster.len()
            )));
        }
        if wide {
            raster[..need]
                .chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]))
                .collect()
        } else {
            raster[..need].iter().map(|&b| b as u16).collect()
        }
    } else {
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let v = cur.number(&format!("sample {i}"))?;
            out.push(v.min(u16::MAX as u32) as u16);
        }
        out
    };
    if let Some(&v) = samples.iter().find(|&&v| v > maxval) {
        return Err(ImageError::Malformed(format!(
            "sample {v} exceeds maxval {maxval}"
        )));
    }
    Ok(Pgm {
        width,
        height,
        maxval,
        samples,
    })
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| {
        if source.kind() == io::ErrorKind::NotFound {
            CliError::Missing(path.to_path_buf())
        } else {
            CliError::Read {
                path: path.to_path_buf(),
                source,
            }
        }
    })
}

fn read_pgm(path: &Path) -> Result<Pgm> {
    let bytes = read_bytes(path)?;
    decode_pgm(&bytes).map_err(|kind| CliError::Image {
        path: path.to_path_buf(),
        kind,
    })
}

/// Loads a grayscale image normalized to `[0, 1]` by its maxval.
pub fn load_gray(path: &Path) -> Result<GrayImage> {
    let pgm = read_pgm(path)?;
    let scale = pgm.maxval as f64;
    let data = pgm.samples.iter().map(|&v| v as f64 / scale).collect();
    Ok(GrayImage::new(pgm.width, pgm.height, data)?)
}

/// Loads a label mask; any nonzero sample is foreground.
pub fn load_mask(path: &Path) -> Result<BinaryMask> {
    let pgm = read_pgm(path)?;
    Ok(BinaryMask::new(
        pgm.width,
        pgm.height,
        pgm.samples.iter().map(|&v| v != 0).collect(),
    )?)
}

pub fn encode_mask(mask: &BinaryMask) -> Vec<u8> {
    let (w, h) = mask.dims();
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(mask.bits().iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

/// Quantizes `[0, 1]` intensities to 8 bits.
pub fn encode_gray(img: &GrayImage) -> Vec<u8> {
    let (w, h) = img.dims();
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(img.data().iter().map(|&v| to_byte(v)));
    out
}

fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// RGB raster used to compose overlays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl RgbImage {
    pub fn from_gray(img: &GrayImage) -> Self {
        let (width, height) = img.dims();
        let pixels = img.data().iter().map(|&v| [to_byte(v); 3]).collect();
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    fn plot(&mut self, x: f64, y: f64, color: Rgb) {
        let (xi, yi) = (x.round(), y.round());
        if xi >= 0.0 && yi >= 0.0 && (xi as usize) < self.width && (yi as usize) < self.height {
            self.pixels[yi as usize * self.width + xi as usize] = color;
        }
    }

    /// Rasterizes the segment `a`-`b` by uniform sampling, one sample per
    /// pixel along the major axis.
    pub fn draw_line(&mut self, a: Point, b: Point, color: Rgb) {
        let steps = (b.x - a.x).abs().max((b.y - a.y).abs()).ceil().max(1.0) as usize;
        for i in 0..=steps {
            let t = i as f64 / steps as f64;
            self.plot(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), color);
        }
    }

    pub fn draw_contour(&mut self, c: &Contour, color: Rgb) {
        for pair in c.points.windows(2) {
            self.draw_line(pair[0], pair[1], color);
        }
        if c.closed {
            if let (Some(&first), Some(&last)) = (c.points.first(), c.points.last()) {
                self.draw_line(last, first, color);
            }
        }
        if let [only] = c.points[..] {
            self.plot(only.x, only.y, color);
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.pixels.iter().flatten());
        out
    }
}

/// Grayscale image with endocardial contours in red and epicardial ones in
/// green (drawn last, so green wins where they touch).
pub fn render_overlay(img: &GrayImage, endo: &[Contour], epi: &[Contour]) -> RgbImage {
    let mut rgb = RgbImage::from_gray(img);
    for c in endo {
        rgb.draw_contour(c, ENDO_COLOR);
    }
    for c in epi {
        rgb.draw_contour(c, EPI_COLOR);
    }
    rgb
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn save_mask(mask: &BinaryMask, path: &Path) -> Result<()> {
    write_file(path, &encode_mask(mask))
}

pub fn save_overlay(img: &GrayImage, endo: &[Contour], epi: &[Contour], path: &Path) -> Result<()> {
    write_file(path, &render_overlay(img, endo, epi).encode())
}
