//! On-disk artifacts: coefficient dumps ("GFRC"), feature matrices ("GFRF"),
//! serialized ensemble models ("GFRE"), and CSV emitters for feature rows and
//! kernel banks. All integers are little-endian.

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use gfr_core::ensemble::{EnsembleModel, FldBase};
use gfr_core::gabor::Kernel8;
use gfr_core::jpeg::{QuantTable, QuantizedJpeg};

pub const COEF_MAGIC: [u8; 4] = *b"GFRC";
pub const FEATURE_MAGIC: [u8; 4] = *b"GFRF";
pub const MODEL_MAGIC: [u8; 4] = *b"GFRE";
pub const MODEL_VERSION: u8 = 1;

#[derive(Debug)]
pub enum FormatError {
    Io(io::Error),
    /// The file does not start with the expected magic.
    BadMagic { expected: [u8; 4] },
    /// A model file written by a newer layout revision.
    UnsupportedVersion(u8),
    /// The file ended before its header said it would.
    Truncated,
    /// Structurally valid but self-contradictory content.
    Inconsistent(String),
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatError::Io(e) => write!(f, "i/o error: {e}"),
            FormatError::BadMagic { expected } => {
                write!(f, "bad magic, expected {:?}", core::str::from_utf8(expected).unwrap())
            }
            FormatError::UnsupportedVersion(v) => write!(f, "unsupported format version {v}"),
            FormatError::Truncated => write!(f, "file is truncated"),
            FormatError::Inconsistent(why) => write!(f, "inconsistent file: {why}"),
        }
    }
}

impl std::error::Error for FormatError {}

impl From<io::Error> for FormatError {
    fn from(e: io::Error) -> FormatError {
        FormatError::Io(e)
    }
}

/// Little-endian slice reader with truncation checks.
struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Reader<'a> {
        Reader { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        if self.buf.len() - self.pos < n {
            return Err(FormatError::Truncated);
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn magic(&mut self, expected: [u8; 4]) -> Result<(), FormatError> {
        if self.take(4).map_err(|_| FormatError::BadMagic { expected })? != expected {
            return Err(FormatError::BadMagic { expected });
        }
        Ok(())
    }

    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, FormatError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn finish(&self) -> Result<(), FormatError> {
        if self.pos != self.buf.len() {
            return Err(FormatError::Inconsistent(format!(
                "{} trailing bytes",
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Coefficient dumps
// ---------------------------------------------------------------------------

/// Serializes quantized coefficients: 16-byte header (magic, blocks_w,
/// blocks_h, reserved) followed by one little-endian i16 per coefficient,
/// natural order within each block, blocks in raster order. The quantization
/// table is *not* stored; readers must supply it.
pub fn encode_coef_dump(j: &QuantizedJpeg) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + j.coeffs.len() * 128);
    out.extend_from_slice(&COEF_MAGIC);
    out.extend_from_slice(&(j.blocks_w as u32).to_le_bytes());
    out.extend_from_slice(&(j.blocks_h as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for block in &j.coeffs {
        for &c in block.iter() {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
    out
}

pub fn write_coef_dump(path: &Path, j: &QuantizedJpeg) -> Result<(), FormatError> {
    fs::write(path, encode_coef_dump(j))?;
    Ok(())
}

/// Parses a coefficient dump. The dump carries no quantization table or
/// pixel dimensions, so the caller provides the table (and optionally the
/// quality factor it came from); dimensions are whole blocks.
pub fn read_coef_dump(
    bytes: &[u8],
    qtable: QuantTable,
    quality_hint: Option<u8>,
) -> Result<QuantizedJpeg, FormatError> {
    let mut r = Reader::new(bytes);
    r.magic(COEF_MAGIC)?;
    let blocks_w = r.u32()? as usize;
    let blocks_h = r.u32()? as usize;
    let _reserved = r.u32()?;
    let n = blocks_w
        .checked_mul(blocks_h)
        .ok_or_else(|| FormatError::Inconsistent("block count overflows".into()))?;
    let mut coeffs = Vec::with_capacity(n);
    for _ in 0..n {
        let raw = r.take(128)?;
        let mut block = [0i16; 64];
        for (c, pair) in block.iter_mut().zip(raw.chunks_exact(2)) {
            *c = i16::from_le_bytes([pair[0], pair[1]]);
        }
        coeffs.push(block);
    }
    r.finish()?;
    Ok(QuantizedJpeg {
        width: blocks_w * 8,
        height: blocks_h * 8,
        blocks_w,
        blocks_h,
        coeffs,
        qtable,
        quality_hint,
    })
}

// ---------------------------------------------------------------------------
// Feature matrices
// ---------------------------------------------------------------------------

/// A row-major feature matrix with the metadata its header carries.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub variant_id: u8,
    pub layout_hash: u64,
    pub cols: usize,
    /// Row-major `rows * cols` values.
    pub data: Vec<f32>,
}

impl FeatureMatrix {
    pub fn new(variant_id: u8, layout_hash: u64, cols: usize) -> FeatureMatrix {
        FeatureMatrix { variant_id, layout_hash, cols, data: Vec::new() }
    }

    pub fn rows(&self) -> usize {
        if self.cols == 0 {
            0
        } else {
            self.data.len() / self.cols
        }
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn push_row(&mut self, row: &[f64]) -> Result<(), FormatError> {
        if row.len() != self.cols {
            return Err(FormatError::Inconsistent(format!(
                "row has {} values, matrix has {} columns",
                row.len(),
                self.cols
            )));
        }
        self.data.extend(row.iter().map(|&v| v as f32));
        Ok(())
    }

    /// Rows widened back to f64 for the classifier.
    pub fn rows_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows()).map(|i| self.row(i).iter().map(|&v| v as f64).collect()).collect()
    }
}

pub fn encode_features(m: &FeatureMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(21 + m.data.len() * 4);
    out.extend_from_slice(&FEATURE_MAGIC);
    out.extend_from_slice(&(m.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(m.cols as u32).to_le_bytes());
    out.push(m.variant_id);
    out.extend_from_slice(&m.layout_hash.to_le_bytes());
    for &v in &m.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn write_features(path: &Path, m: &FeatureMatrix) -> Result<(), FormatError> {
    fs::write(path, encode_features(m))?;
    Ok(())
}

pub fn read_features(bytes: &[u8]) -> Result<FeatureMatrix, FormatError> {
    let mut r = Reader::new(bytes);
    r.magic(FEATURE_MAGIC)?;
    let rows = r.u32()? as usize;
    let cols = r.u32()? as usize;
    let variant_id = r.u8()?;
    let layout_hash = r.u64()?;
    let n = rows
        .checked_mul(cols)
        .ok_or_else(|| FormatError::Inconsistent("matrix size overflows".into()))?;
    let raw = r.take(n * 4)?;
    let data =
        raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    r.finish()?;
    Ok(FeatureMatrix { variant_id, layout_hash, cols, data })
}

pub fn read_features_file(path: &Path) -> Result<FeatureMatrix, FormatError> {
    read_features(&fs::read(path)?)
}

/// Optional CSV view of a feature matrix: one row per line.
pub fn write_features_csv(path: &Path, m: &FeatureMatrix) -> Result<(), FormatError> {
    let mut s = String::new();
    for i in 0..m.rows() {
        let mut first = true;
        for v in m.row(i) {
            if !first {
                s.push(',');
            }
            s.push_str(&format!("{v}"));
            first = false;
        }
        s.push('\n');
    }
    fs::write(path, s)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Ensemble models
// ---------------------------------------------------------------------------

pub fn encode_model(m: &EnsembleModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&MODEL_MAGIC);
    out.push(MODEL_VERSION);
    out.extend_from_slice(&m.layout_hash.to_le_bytes());
    out.extend_from_slice(&(m.dim as u32).to_le_bytes());
    out.extend_from_slice(&(m.d_sub as u32).to_le_bytes());
    out.extend_from_slice(&(m.bases.len() as u32).to_le_bytes());
    out.extend_from_slice(&m.seed.to_le_bytes());
    out.extend_from_slice(&m.oob_error.to_le_bytes());
    for b in &m.bases {
        for &i in &b.indices {
            out.extend_from_slice(&i.to_le_bytes());
        }
        for &w in &b.weights {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out.extend_from_slice(&b.threshold.to_le_bytes());
    }
    out
}

pub fn write_model(path: &Path, m: &EnsembleModel) -> Result<(), FormatError> {
    fs::write(path, encode_model(m))?;
    Ok(())
}

pub fn read_model(bytes: &[u8]) -> Result<EnsembleModel, FormatError> {
    let mut r = Reader::new(bytes);
    r.magic(MODEL_MAGIC)?;
    let version = r.u8()?;
    if version != MODEL_VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let layout_hash = r.u64()?;
    let dim = r.u32()? as usize;
    let d_sub = r.u32()? as usize;
    let n_learners = r.u32()? as usize;
    let seed = r.u64()?;
    let oob_error = r.f64()?;
    let mut bases = Vec::with_capacity(n_learners);
    for _ in 0..n_learners {
        let raw = r.take(d_sub * 4)?;
        let indices: Vec<u32> =
            raw.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect();
        if let Some(&bad) = indices.iter().find(|&&i| i as usize >= dim) {
            return Err(FormatError::Inconsistent(format!(
                "feature index {bad} outside dimension {dim}"
            )));
        }
        let raw = r.take(d_sub * 8)?;
        let weights =
            raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        let threshold = r.f64()?;
        bases.push(FldBase { indices, weights, threshold });
    }
    r.finish()?;
    Ok(EnsembleModel { bases, d_sub, n_learners, seed, layout_hash, dim, oob_error })
}

pub fn read_model_file(path: &Path) -> Result<EnsembleModel, FormatError> {
    read_model(&fs::read(path)?)
}

// ---------------------------------------------------------------------------
// Bank dump
// ---------------------------------------------------------------------------

/// CSV rendering of a kernel list: each kernel is eight lines of eight
/// comma-separated weights (shortest round-trippable decimal form).
pub fn bank_csv(bank: &[Kernel8]) -> String {
    let mut s = String::new();
    for k in bank {
        for r in 0..8 {
            for c in 0..8 {
                if c > 0 {
                    s.push(',');
                }
                s.push_str(&format!("{}", k.at(r, c)));
            }
            s.push('\n');
        }
    }
    s
}

pub fn write_bank_csv(path: &Path, bank: &[Kernel8]) -> Result<(), FormatError> {
    fs::write(path, bank_csv(bank))?;
    Ok(())
}
