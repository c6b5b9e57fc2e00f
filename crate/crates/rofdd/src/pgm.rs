//! Grayscale PGM (`P2` ASCII and `P5` binary) reading, `P5` writing.
//!
//! Samples are mapped to `[0, 1]` by dividing by `maxval`. Writing clamps to
//! `[0, 1]` and rounds to the nearest of 256 levels.

use rofdd_core::{GridDims, Image};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PgmError {
    #[error("byte {offset}: expected magic `P2` or `P5`, found {found:?}")]
    BadMagic { offset: usize, found: String },
    #[error("byte {offset}: expected {what}, found {found:?}")]
    BadHeader {
        offset: usize,
        what: &'static str,
        found: String,
    },
    #[error("byte {offset}: maxval {maxval} outside 1..=65535")]
    BadMaxval { offset: usize, maxval: u64 },
    #[error("byte {offset}: image has zero width or height")]
    EmptyImage { offset: usize },
    #[error("byte {offset}: payload truncated, expected {expected} samples, got {got}")]
    Truncated {
        offset: usize,
        expected: usize,
        got: usize,
    },
    #[error("byte {offset}: sample {value} exceeds maxval {maxval}")]
    SampleTooLarge { offset: usize, value: u64, maxval: u64 },
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    /// Skip whitespace and `#` comments.
    fn skip_blank(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> (usize, &'a [u8]) {
        self.skip_blank();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() && self.bytes[self.pos] != b'#' {
            self.pos += 1;
        }
        (start, &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &'static str) -> Result<(usize, u64), PgmError> {
        let (offset, tok) = self.token();
        let text = String::from_utf8_lossy(tok);
        if tok.is_empty() || !tok.iter().all(u8::is_ascii_digit) {
            return Err(PgmError::BadHeader {
                offset,
                what,
                found: if tok.is_empty() { "end of input".into() } else { text.into_owned() },
            });
        }
        text.parse().map(|v| (offset, v)).map_err(|_| PgmError::BadHeader {
            offset,
            what,
            found: text.into_owned(),
        })
    }
}

pub fn read_pgm(bytes: &[u8]) -> Result<Image, PgmError> {
    let mut c = Cursor { bytes, pos: 0 };
    let (offset, magic) = c.token();
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        other => {
            return Err(PgmError::BadMagic {
                offset,
                found: String::from_utf8_lossy(other).into_owned(),
            })
        }
    };
    let (woff, width) = c.number("width")?;
    let (_, height) = c.number("height")?;
    let (moff, maxval) = c.number("maxval")?;
    if !(1..=65535).contains(&maxval) {
        return Err(PgmError::BadMaxval { offset: moff, maxval });
    }
    if width == 0 || height == 0 {
        return Err(PgmError::EmptyImage { offset: woff });
    }
    let (rows, cols) = (height as usize, width as usize);
    let n = rows * cols;
    let scale = maxval as f64;
    let mut values = Vec::with_capacity(n);

    if binary {
        // exactly one whitespace byte separates maxval from the raster
        let start = c.pos + 1;
        let width_bytes = if maxval < 256 { 1 } else { 2 };
        let available = bytes.len().saturating_sub(start) / width_bytes;
        if available < n {
            return Err(PgmError::Truncated {
                offset: bytes.len(),
                expected: n,
                got: available,
            });
        }
        for k in 0..n {
            let at = start + k * width_bytes;
            let v = if width_bytes == 1 {
                bytes[at] as u64
            } else {
                u16::from_be_bytes([bytes[at], bytes[at + 1]]) as u64
            };
            if v > maxval {
                return Err(PgmError::SampleTooLarge { offset: at, value: v, maxval });
            }
            values.push(v as f64 / scale);
        }
    } else {
        for k in 0..n {
            let (offset, tok) = c.token();
            if tok.is_empty() {
                return Err(PgmError::Truncated { offset, expected: n, got: k });
            }
            let (offset, v) = {
                c.pos = offset;
                c.number("sample")?
            };
            if v > maxval {
                return Err(PgmError::SampleTooLarge { offset, value: v, maxval });
            }
            values.push(v as f64 / scale);
        }
    }
    let dims = GridDims::new(rows, cols).map_err(|_| PgmError::EmptyImage { offset: woff })?;
    Ok(Image::new(dims, values).expect("sample count matches dims"))
}

/// Quantize one intensity to `0..=255`.
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Binary `P5` with maxval 255.
pub fn write_pgm(image: &Image) -> Vec<u8> {
    let d = image.dims();
    let mut out = format!("P5\n{} {}\n255\n", d.cols, d.rows).into_bytes();
    out.extend(image.values().iter().map(|&v| quantize(v)));
    out
}
