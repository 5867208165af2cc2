//! Binary greyscale heatmaps (PGM `P5`). Brighter means lower affinity.

use std::fs;
use std::path::Path;

use affinity_core::field::ScalarFieldGrid;

use crate::{FormatError, FormatResult};

/// `round(255 (1 - score))`.
pub fn pixel(score: f64) -> u8 {
    (255.0 * (1.0 - score)).round().clamp(0.0, 255.0) as u8
}

/// Encoded image: `nx` columns, `ny` rows, top row at the largest y.
pub fn encode_pgm(grid: &ScalarFieldGrid) -> Vec<u8> {
    let (nx, ny) = (grid.spec().nx, grid.spec().ny);
    let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
    for j in (0..ny).rev() {
        out.extend((0..nx).map(|i| pixel(grid.score(i, j))));
    }
    out
}

pub fn write_heatmap_pgm(grid: &ScalarFieldGrid, path: &Path) -> FormatResult<()> {
    fs::write(path, encode_pgm(grid)).map_err(|e| FormatError::io(path, e))
}

/// Decoded `P5` image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Greymap {
    pub width: usize,
    pub height: usize,
    pub max: u16,
    /// Row-major from the top row.
    pub pixels: Vec<u8>,
}

impl Greymap {
    /// Scores of the pixels in field order (row-major from the bottom row).
    pub fn scores(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.pixels.len());
        for row in self.pixels.chunks_exact(self.width).rev() {
            out.extend(row.iter().map(|&p| 1.0 - p as f64 / self.max as f64));
        }
        out
    }
}

/// Parses an 8-bit `P5` image; `#` comments in the header are allowed.
pub fn decode_pgm(bytes: &[u8], source: &Path) -> FormatResult<Greymap> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(FormatError::parse(source, 1, "truncated header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    if fields[0] != "P5" {
        return Err(FormatError::parse(source, 1, "not a binary PGM (P5)"));
    }
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| FormatError::parse(source, 1, format!("bad header field {s:?}")))
    };
    let (width, height, max) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    if max == 0 || max > 255 {
        return Err(FormatError::parse(
            source,
            1,
            "only 8-bit images are supported",
        ));
    }
    let raster = bytes.get(pos..).unwrap_or(&[]);
    if raster.len() != width * height {
        return Err(FormatError::parse(
            source,
            1,
            format!("expected {} pixels, found {}", width * height, raster.len()),
        ));
    }
    Ok(Greymap {
        width,
        height,
        max: max as u16,
        pixels: raster.to_vec(),
    })
}

pub fn read_pgm(path: &Path) -> FormatResult<Greymap> {
    let bytes = fs::read(path).map_err(|e| FormatError::io(path, e))?;
    decode_pgm(&bytes, path)
}
