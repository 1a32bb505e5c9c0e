//! Binary (`P5`) PGM images with 8-bit samples.
//!
//! Pixels map to `[0, 1]` by dividing by the header's maxval; writing clamps
//! to `[0, 1]` and rounds to the nearest of 256 levels. Image rows become
//! matrix rows.

use std::fmt;
use std::fs;
use std::path::Path;

use pbpqlp_core::DenseMatrix;

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmError {
    /// Byte offset in the file where decoding failed.
    pub offset: usize,
    pub kind: PgmErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PgmErrorKind {
    BadMagic,
    BadHeader(String),
    UnsupportedMaxval(u32),
    Truncated { expected: usize, actual: usize },
}

impl fmt::Display for PgmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PGM format error at byte {}: ", self.offset)?;
        match &self.kind {
            PgmErrorKind::BadMagic => f.write_str("expected magic number P5"),
            PgmErrorKind::BadHeader(m) => f.write_str(m),
            PgmErrorKind::UnsupportedMaxval(v) => write!(f, "maxval {v} not supported (need 1..=255)"),
            PgmErrorKind::Truncated { expected, actual } => {
                write!(f, "truncated payload: expected {expected} bytes, found {actual}")
            }
        }
    }
}

impl std::error::Error for PgmError {}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn err(&self, kind: PgmErrorKind) -> PgmError {
        PgmError { offset: self.pos, kind }
    }

    fn skip_space(&mut self) {
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

    fn number(&mut self, what: &str) -> std::result::Result<u32, PgmError> {
        self.skip_space();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PgmError {
                offset: start,
                kind: PgmErrorKind::BadHeader(format!("expected {what}")),
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(PgmError {
                offset: start,
                kind: PgmErrorKind::BadHeader(format!("{what} out of range")),
            })
    }
}

/// Decodes a `P5` image into a `height × width` matrix.
pub fn decode_pgm(bytes: &[u8]) -> std::result::Result<DenseMatrix, PgmError> {
    let mut h = Header { bytes, pos: 0 };
    if !bytes.starts_with(b"P5") {
        return Err(h.err(PgmErrorKind::BadMagic));
    }
    h.pos = 2;
    if !bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(h.err(PgmErrorKind::BadHeader("expected whitespace after magic".into())));
    }
    let width = h.number("width")? as usize;
    let height = h.number("height")? as usize;
    h.skip_space();
    let maxval_at = h.pos;
    let maxval = h.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PgmError {
            offset: maxval_at,
            kind: PgmErrorKind::BadHeader(format!("empty image {width}x{height}")),
        });
    }
    if maxval == 0 || maxval > 255 {
        return Err(PgmError {
            offset: maxval_at,
            kind: PgmErrorKind::UnsupportedMaxval(maxval),
        });
    }
    if !bytes.get(h.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(h.err(PgmErrorKind::BadHeader("expected single whitespace before payload".into())));
    }
    h.pos += 1;
    let payload = &bytes[h.pos..];
    let expected = width * height;
    if payload.len() < expected {
        return Err(h.err(PgmErrorKind::Truncated {
            expected,
            actual: payload.len(),
        }));
    }
    let scale = f64::from(maxval);
    DenseMatrix::from_fn(height, width, |i, j| f64::from(payload[i * width + j]) / scale).map_err(|e| PgmError {
        offset: h.pos,
        kind: PgmErrorKind::BadHeader(e.to_string()),
    })
}

/// Encodes `m` as an 8-bit `P5` image, clamping to `[0, 1]`.
pub fn encode_pgm(m: &DenseMatrix) -> Vec<u8> {
    let (rows, cols) = m.shape();
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.reserve(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let v = m.get(i, j);
            let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
            out.push((v * 255.0).round() as u8);
        }
    }
    out
}

pub fn load_pgm(path: &Path) -> Result<DenseMatrix> {
    let bytes = fs::read(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_pgm(&bytes).map_err(|source| BenchError::Pgm {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_pgm(path: &Path, m: &DenseMatrix) -> Result<()> {
    fs::write(path, encode_pgm(m)).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })
}
