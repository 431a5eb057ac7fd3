//! Forward warping of a view by the disparity change a baseline ratio induces.

use std::fs;
use std::path::Path;

use super::io::HeaderReader;
use super::DisparityMap;
use crate::error::{Error, Result};

/// 8-bit grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                got: data.len(),
            });
        }
        Ok(Self { width, height, data })
    }

    /// Reads an 8-bit binary PGM.
    pub fn load_pgm(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut hdr = HeaderReader::new(&bytes);
        if hdr.token()? != "P5" {
            return Err(Error::Format(format!("{}: not a binary PGM", path.display())));
        }
        let w: usize = hdr.number("width")?;
        let h: usize = hdr.number("height")?;
        let maxval: u32 = hdr.number("maxval")?;
        if maxval == 0 || maxval > 255 {
            return Err(Error::Format(format!("{}: expected 8-bit samples", path.display())));
        }
        let data = hdr
            .payload()?
            .get(..w * h)
            .ok_or_else(|| Error::Format(format!("{}: truncated payload", path.display())))?
            .to_vec();
        Self::new(w, h, data)
    }

    pub fn save_pgm(&self, path: &Path) -> Result<()> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.data);
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Re-renders `image` as seen with the baseline scaled by `ratio`.
///
/// Each pixel moves horizontally by `(ratio - 1) * d`, rounded to the
/// nearest column. When several pixels land on one column the one with the
/// larger disparity (nearer the viewer) wins. Invalid-disparity pixels stay
/// put and lose every conflict. Holes take the nearest filled pixel to the
/// left, else to the right.
pub fn warp_view(image: &GrayImage, map: &DisparityMap, ratio: f64) -> Result<GrayImage> {
    if (image.width, image.height) != map.dims() {
        return Err(Error::ShapeMismatch {
            expected: map.dims(),
            got: (image.width, image.height),
        });
    }
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(Error::Domain(format!("baseline ratio must be positive, got {ratio}")));
    }
    let w = image.width;
    let mut out = vec![0u8; image.data.len()];
    let mut depth = vec![f64::NEG_INFINITY; w];
    let mut filled = vec![false; w];

    for y in 0..image.height {
        depth.fill(f64::NEG_INFINITY);
        filled.fill(false);
        let row = &mut out[y * w..(y + 1) * w];
        for x in 0..w {
            let (target, priority) = match map.get(x, y) {
                Some(d) => (x as f64 + ((ratio - 1.0) * d).round(), d),
                None => (x as f64, f64::NEG_INFINITY),
            };
            if target < 0.0 || target >= w as f64 {
                continue;
            }
            let t = target as usize;
            if !filled[t] || priority > depth[t] {
                row[t] = image.data[y * w + x];
                depth[t] = priority;
                filled[t] = true;
            }
        }
        if !filled.iter().any(|&f| f) {
            row.copy_from_slice(&image.data[y * w..(y + 1) * w]);
            continue;
        }
        let mut last_left: Option<u8> = None;
        let mut holes = Vec::new();
        for x in 0..w {
            if filled[x] {
                last_left = Some(row[x]);
            } else if let Some(v) = last_left {
                row[x] = v;
            } else {
                holes.push(x);
            }
        }
        // leading holes: nothing to the left, use nearest to the right
        if let Some(first) = filled.iter().position(|&f| f) {
            for x in holes {
                row[x] = row[first];
            }
        }
    }
    GrayImage::new(image.width, image.height, out)
}
