//! Disparity ingestion and export: binary PGM (P5), PFM (`Pf`) and CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DisparityMap;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisparityFormat {
    Pgm16,
    Pfm,
    Csv,
}

impl DisparityFormat {
    /// Guess the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "pgm" => Some(Self::Pgm16),
            "pfm" => Some(Self::Pfm),
            "csv" | "txt" => Some(Self::Csv),
            _ => None,
        }
    }
}

impl FromStr for DisparityFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pgm" | "pgm16" => Ok(Self::Pgm16),
            "pfm" => Ok(Self::Pfm),
            "csv" => Ok(Self::Csv),
            other => Err(Error::Format(format!("unknown disparity format `{other}`"))),
        }
    }
}

/// Affine mapping from stored samples to disparity: `d = scale * raw + offset`.
///
/// Stored as a JSON sidecar next to quantized scene files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantization {
    pub offset: f64,
    pub scale: f64,
    /// Treat a stored PGM sample of 0 as an unknown disparity.
    #[serde(default)]
    pub zero_is_invalid: bool,
}

impl Default for Quantization {
    fn default() -> Self {
        Self::identity()
    }
}

impl Quantization {
    pub const fn identity() -> Self {
        Self {
            offset: 0.0,
            scale: 1.0,
            zero_is_invalid: false,
        }
    }

    /// 1/128 px steps over [-256, 256) px; sample 0 is reserved for invalid pixels.
    pub const fn pgm_default() -> Self {
        Self {
            offset: -256.0,
            scale: 1.0 / 128.0,
            zero_is_invalid: true,
        }
    }

    fn apply(&self, raw: f64) -> f64 {
        self.scale * raw + self.offset
    }

    pub fn read_sidecar(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }

    pub fn write_sidecar(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("quantization serializes");
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

pub fn load_disparity(path: &Path, format: DisparityFormat, quant: Quantization) -> Result<DisparityMap> {
    if !(quant.scale.is_finite() && quant.offset.is_finite()) || quant.scale == 0.0 {
        return Err(Error::Domain(format!("invalid quantization {quant:?}")));
    }
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    match format {
        DisparityFormat::Pgm16 => parse_pgm(&bytes, quant),
        DisparityFormat::Pfm => parse_pfm(&bytes, quant),
        DisparityFormat::Csv => {
            let text = std::str::from_utf8(&bytes).map_err(|_| Error::Format("CSV is not UTF-8".into()))?;
            parse_csv(text, quant)
        }
    }
}

/// Reads whitespace-separated header tokens, skipping `#` comments.
pub(super) struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    pub(super) fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub(super) fn token(&mut self) -> Result<&'a str> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format("truncated header".into()));
        }
        std::str::from_utf8(&self.bytes[start..self.pos]).map_err(|_| Error::Format("non-ASCII header".into()))
    }

    pub(super) fn number<T: FromStr>(&mut self, what: &str) -> Result<T> {
        let tok = self.token()?;
        tok.parse()
            .map_err(|_| Error::Format(format!("bad {what} `{tok}` in header")))
    }

    /// Consumes the single whitespace byte that ends the header.
    pub(super) fn payload(mut self) -> Result<&'a [u8]> {
        if self.pos >= self.bytes.len() {
            return Err(Error::Format("missing payload".into()));
        }
        self.pos += 1;
        Ok(&self.bytes[self.pos..])
    }
}

fn check_dims(width: usize, height: usize) -> Result<usize> {
    width
        .checked_mul(height)
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Format(format!("bad dimensions {width}x{height}")))
}

fn parse_pgm(bytes: &[u8], quant: Quantization) -> Result<DisparityMap> {
    let mut hdr = HeaderReader::new(bytes);
    match hdr.token()? {
        "P5" => {}
        "P6" | "P3" => return Err(Error::Format("color PNM is not a disparity map".into())),
        other => return Err(Error::Format(format!("unsupported PGM magic `{other}`"))),
    }
    let width: usize = hdr.number("width")?;
    let height: usize = hdr.number("height")?;
    let maxval: u32 = hdr.number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!("maxval {maxval} out of range")));
    }
    let n = check_dims(width, height)?;
    let payload = hdr.payload()?;
    let sample_bytes = if maxval < 256 { 1 } else { 2 };
    if payload.len() < n * sample_bytes {
        return Err(Error::Format(format!(
            "PGM payload has {} bytes, expected {}",
            payload.len(),
            n * sample_bytes
        )));
    }
    let raw: Vec<u32> = if sample_bytes == 1 {
        payload[..n].iter().map(|&b| b as u32).collect()
    } else {
        payload[..2 * n]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as u32)
            .collect()
    };
    if raw.iter().any(|&s| s > maxval) {
        return Err(Error::Format("PGM sample exceeds maxval".into()));
    }
    let valid: Vec<bool> = raw.iter().map(|&s| !(quant.zero_is_invalid && s == 0)).collect();
    let values = raw.iter().map(|&s| quant.apply(s as f64)).collect();
    DisparityMap::new(width, height, values, valid)
}

fn parse_pfm(bytes: &[u8], quant: Quantization) -> Result<DisparityMap> {
    let mut hdr = HeaderReader::new(bytes);
    match hdr.token()? {
        "Pf" => {}
        "PF" => return Err(Error::Format("color PFM is not a disparity map".into())),
        other => return Err(Error::Format(format!("unsupported PFM magic `{other}`"))),
    }
    let width: usize = hdr.number("width")?;
    let height: usize = hdr.number("height")?;
    let endian_scale: f64 = hdr.number("scale")?;
    if endian_scale == 0.0 || !endian_scale.is_finite() {
        return Err(Error::Format("PFM scale must be non-zero".into()));
    }
    let little = endian_scale < 0.0;
    let n = check_dims(width, height)?;
    let payload = hdr.payload()?;
    if payload.len() < 4 * n {
        return Err(Error::Format(format!(
            "PFM payload has {} bytes, expected {}",
            payload.len(),
            4 * n
        )));
    }
    let mut values = vec![0.0; n];
    let mut valid = vec![false; n];
    // PFM rows run bottom to top.
    for (i, c) in payload[..4 * n].chunks_exact(4).enumerate() {
        let b = [c[0], c[1], c[2], c[3]];
        let v = if little {
            f32::from_le_bytes(b)
        } else {
            f32::from_be_bytes(b)
        } as f64;
        let (x, y) = (i % width, height - 1 - i / width);
        let j = y * width + x;
        if v.is_finite() {
            values[j] = quant.apply(v);
            valid[j] = true;
        } else {
            values[j] = v;
        }
    }
    DisparityMap::new(width, height, values, valid)
}

fn parse_csv(text: &str, quant: Quantization) -> Result<DisparityMap> {
    let mut width = None;
    let mut values = Vec::new();
    let mut valid = Vec::new();
    let mut height = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut count = 0;
        for tok in line.split(',') {
            let tok = tok.trim();
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::Format(format!("line {}: non-numeric token `{tok}`", lineno + 1)))?;
            if v.is_finite() {
                values.push(quant.apply(v));
                valid.push(true);
            } else {
                values.push(v);
                valid.push(false);
            }
            count += 1;
        }
        match width {
            None => width = Some(count),
            Some(w) if w != count => {
                return Err(Error::Format(format!(
                    "line {}: {count} columns, expected {w}",
                    lineno + 1
                )))
            }
            _ => {}
        }
        height += 1;
    }
    let width = width.ok_or_else(|| Error::Format("empty CSV".into()))?;
    DisparityMap::new(width, height, values, valid)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes a 16-bit P5 PGM. Valid disparities are quantized with `quant`
/// (clamped into the sample range); invalid pixels are written as 0 and
/// `quant.zero_is_invalid` must be set for them to survive a round trip.
pub fn save_pgm16(map: &DisparityMap, path: &Path, quant: Quantization) -> Result<()> {
    let mut out = format!("P5\n{} {}\n65535\n", map.width(), map.height()).into_bytes();
    let lowest = if quant.zero_is_invalid { 1.0 } else { 0.0 };
    for (&d, &ok) in map.values().iter().zip(map.valid()) {
        let raw = if ok {
            ((d - quant.offset) / quant.scale).round().clamp(lowest, 65535.0) as u16
        } else {
            0
        };
        out.extend_from_slice(&raw.to_be_bytes());
    }
    write_file(path, &out)
}

/// Writes a little-endian grayscale PFM; invalid pixels become +inf.
pub fn save_pfm(map: &DisparityMap, path: &Path) -> Result<()> {
    let (w, h) = map.dims();
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    for y in (0..h).rev() {
        for x in 0..w {
            let v = map.get(x, y).map_or(f32::INFINITY, |d| d as f32);
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    write_file(path, &out)
}

/// Writes one CSV row per image row; invalid pixels are written as `NaN`.
pub fn save_csv(map: &DisparityMap, path: &Path) -> Result<()> {
    let (w, h) = map.dims();
    let mut out = String::new();
    for y in 0..h {
        for x in 0..w {
            if x > 0 {
                out.push(',');
            }
            match map.get(x, y) {
                Some(d) => write!(out, "{d}").unwrap(),
                None => out.push_str("NaN"),
            }
        }
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}
