//! Baseline JPEG parsing to quantized DCT coefficients, and unrounded
//! decompression back to a real-valued spatial plane.
//!
//! Only baseline sequential, single-component (grayscale), 8-bit streams are
//! accepted; anything else is an explicit error rather than a silent
//! conversion. Decompression dequantizes, applies the orthonormal 2-D IDCT
//! per block, and adds the +128 level shift — pixel values stay `f64` with no
//! rounding and no clamping, because the downstream filter residuals are
//! computed on the continuous decompression.

use alloc::vec;
use alloc::vec::Vec;

/// Zig-zag scan order: `ZIGZAG[i]` is the natural (row-major) position of the
/// i-th coefficient in scan order.
pub const ZIGZAG: [usize; 64] = [
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5, 12, 19, 26, 33, 40, 48, 41, 34, 27,
    20, 13, 6, 7, 14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51, 58,
    59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
];

/// Annex-K luminance quantization table (natural, row-major order). Used only
/// to recognize the effective quality factor of a parsed stream.
const STD_LUMA_QTABLE: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Errors raised while parsing a JPEG stream. Every variant reports the byte
/// offset at which the problem was detected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JpegError {
    /// Progressive-mode frame header (SOF2); only baseline is supported.
    ProgressiveUnsupported { offset: usize },
    /// More than one image component; only grayscale is supported.
    MultiComponentUnsupported { offset: usize, components: u8 },
    /// The stream ended before the structure it was inside was complete.
    TruncatedStream { offset: usize },
    /// A marker or segment that is malformed or unsupported here.
    InvalidMarker { offset: usize, marker: u8 },
    /// Entropy-coded data did not decode to a valid symbol sequence.
    HuffmanDecodeError { offset: usize },
}

impl core::fmt::Display for JpegError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            JpegError::ProgressiveUnsupported { offset } => {
                write!(f, "progressive JPEG not supported (SOF2 at byte {offset})")
            }
            JpegError::MultiComponentUnsupported { offset, components } => {
                write!(f, "{components}-component JPEG not supported, grayscale only (frame header at byte {offset})")
            }
            JpegError::TruncatedStream { offset } => {
                write!(f, "stream truncated at byte {offset}")
            }
            JpegError::InvalidMarker { offset, marker } => {
                write!(f, "invalid or unsupported marker 0x{marker:02x} at byte {offset}")
            }
            JpegError::HuffmanDecodeError { offset } => {
                write!(f, "entropy decode error near byte {offset}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for JpegError {}

/// A quantization table as carried in the stream: 64 positive steps in
/// zig-zag order, with the declared precision (8 or 16 bit entries).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantTable {
    /// Steps in zig-zag scan order, each >= 1.
    pub entries: [u16; 64],
    /// Declared entry width in bits: 8 or 16.
    pub precision: u8,
}

impl QuantTable {
    /// Quantization step of DCT mode (k, l) — natural row/column indexing.
    #[inline]
    pub fn step(&self, k: usize, l: usize) -> u16 {
        debug_assert!(k < 8 && l < 8);
        self.natural()[k * 8 + l]
    }

    /// The 64 steps rearranged to natural (row-major) order.
    pub fn natural(&self) -> [u16; 64] {
        let mut out = [0u16; 64];
        for (scan, &nat) in ZIGZAG.iter().enumerate() {
            out[nat] = self.entries[scan];
        }
        out
    }

    /// Build a table from steps given in natural order.
    pub fn from_natural(natural: &[u16; 64], precision: u8) -> QuantTable {
        let mut entries = [0u16; 64];
        for (scan, &nat) in ZIGZAG.iter().enumerate() {
            entries[scan] = natural[nat];
        }
        QuantTable { entries, precision }
    }
}

/// A parsed single-component JPEG: quantized coefficients exactly as
/// entropy-coded (de-zig-zagged to natural order, not dequantized).
#[derive(Debug, Clone)]
pub struct QuantizedJpeg {
    /// Declared image width in pixels.
    pub width: usize,
    /// Declared image height in pixels.
    pub height: usize,
    /// Number of 8x8 blocks per row: ceil(width / 8).
    pub blocks_w: usize,
    /// Number of block rows: ceil(height / 8).
    pub blocks_h: usize,
    /// `blocks_h * blocks_w` blocks in raster order, each 64 quantized
    /// coefficients in natural (row-major) order.
    pub coeffs: Vec<[i16; 64]>,
    /// The quantization table the scan referenced.
    pub qtable: QuantTable,
    /// Standard quality factor whose scaled Annex-K luminance table exactly
    /// matches `qtable`, if any.
    pub quality_hint: Option<u8>,
}

/// A decompressed plane: real-valued, level-shifted to the nominal [0, 255]
/// range but never rounded and never clamped. Dimensions cover the full
/// padded block grid (multiples of 8).
#[derive(Debug, Clone)]
pub struct SpatialImage {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows * cols` values.
    pub data: Vec<f64>,
}

impl SpatialImage {
    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }
}

// ---------------------------------------------------------------------------
// IDCT
// ---------------------------------------------------------------------------

/// 1-D basis factors C[u][x] = (w_u / 2) * cos(pi * u * (2x + 1) / 16),
/// w_0 = 1/sqrt(2), w_u = 1 otherwise. The 2-D basis is the outer product, so
/// the block transform runs as two separable passes.
fn cos_table() -> [[f64; 8]; 8] {
    let mut c = [[0.0f64; 8]; 8];
    for (u, row) in c.iter_mut().enumerate() {
        let w = if u == 0 { 1.0 / core::f64::consts::SQRT_2 } else { 1.0 };
        for (x, v) in row.iter_mut().enumerate() {
            *v = 0.5
                * w
                * libm::cos(core::f64::consts::PI * u as f64 * (2.0 * x as f64 + 1.0) / 16.0);
        }
    }
    c
}

/// Inverse 2-D DCT of one block: out[x][y] = sum_{i,j} block[i][j] * B^{i,j}[x][y]
/// with the orthonormal basis B^{i,j}[x][y] = (w_i w_j / 4) cos(pi i (2x+1)/16) cos(pi j (2y+1)/16).
pub fn idct_block(block: &[f64; 64]) -> [f64; 64] {
    let c = cos_table();
    // rows of `tmp` are still frequency in u, columns already spatial in y
    let mut tmp = [0.0f64; 64];
    for u in 0..8 {
        for y in 0..8 {
            let mut s = 0.0;
            for v in 0..8 {
                s += block[u * 8 + v] * c[v][y];
            }
            tmp[u * 8 + y] = s;
        }
    }
    let mut out = [0.0f64; 64];
    for x in 0..8 {
        for y in 0..8 {
            let mut s = 0.0;
            for u in 0..8 {
                s += tmp[u * 8 + y] * c[u][x];
            }
            out[x * 8 + y] = s;
        }
    }
    out
}

/// Forward 2-D DCT (the exact inverse of [`idct_block`]); used by tests and
/// by the simulator round-trips.
pub fn dct_block(pixels: &[f64; 64]) -> [f64; 64] {
    let c = cos_table();
    let mut tmp = [0.0f64; 64];
    for x in 0..8 {
        for v in 0..8 {
            let mut s = 0.0;
            for y in 0..8 {
                s += pixels[x * 8 + y] * c[v][y];
            }
            tmp[x * 8 + v] = s;
        }
    }
    let mut out = [0.0f64; 64];
    for u in 0..8 {
        for v in 0..8 {
            let mut s = 0.0;
            for x in 0..8 {
                s += tmp[x * 8 + v] * c[u][x];
            }
            out[u * 8 + v] = s;
        }
    }
    out
}

/// Decompress to the spatial domain without rounding: per block, dequantize
/// (coefficient times step), inverse DCT, then add the +128 level shift.
/// Output dimensions are the padded block grid (8 * blocks_h by 8 * blocks_w).
pub fn decompress_unrounded(j: &QuantizedJpeg) -> SpatialImage {
    let rows = j.blocks_h * 8;
    let cols = j.blocks_w * 8;
    let mut data = vec![0.0f64; rows * cols];
    let qnat = j.qtable.natural();
    let mut deq = [0.0f64; 64];
    for br in 0..j.blocks_h {
        for bc in 0..j.blocks_w {
            let blk = &j.coeffs[br * j.blocks_w + bc];
            for i in 0..64 {
                deq[i] = blk[i] as f64 * qnat[i] as f64;
            }
            let px = idct_block(&deq);
            for x in 0..8 {
                let dst = (br * 8 + x) * cols + bc * 8;
                for y in 0..8 {
                    data[dst + y] = px[x * 8 + y] + 128.0;
                }
            }
        }
    }
    SpatialImage { rows, cols, data }
}

// ---------------------------------------------------------------------------
// Quality factor recognition
// ---------------------------------------------------------------------------

/// Scale the Annex-K luminance table to the given quality factor using the
/// conventional mapping (50/qf below 50, 2 - qf/50 above), clamping steps to
/// at least 1. Returned in natural order.
pub fn standard_luma_qtable(qf: u8) -> [u16; 64] {
    let qf = qf.clamp(1, 100) as u32;
    let scale = if qf < 50 { 5000 / qf } else { 200 - 2 * qf };
    let mut out = [0u16; 64];
    for i in 0..64 {
        let v = (STD_LUMA_QTABLE[i] as u32 * scale + 50) / 100;
        out[i] = v.clamp(1, 255) as u16;
    }
    out
}

fn recognize_quality(qtable: &QuantTable) -> Option<u8> {
    let nat = qtable.natural();
    (1..=100u8).find(|&qf| standard_luma_qtable(qf) == nat)
}

// ---------------------------------------------------------------------------
// Stream parsing
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Default)]
struct HuffTable {
    // classic canonical-code decode tables indexed by code length 1..=16
    mincode: [i32; 17],
    maxcode: [i32; 17],
    valptr: [usize; 17],
    nvals: usize,
}

struct HuffStore {
    tables: [Option<(HuffTable, Vec<u8>)>; 8], // Tc * 4 + Th
}

fn build_huff(bits: &[u8; 16], vals: &[u8]) -> HuffTable {
    let mut t = HuffTable { mincode: [0; 17], maxcode: [-1; 17], valptr: [0; 17], nvals: vals.len() };
    let mut code: i32 = 0;
    let mut k: usize = 0;
    for len in 1..=16usize {
        let n = bits[len - 1] as usize;
        if n > 0 {
            t.valptr[len] = k;
            t.mincode[len] = code;
            code += n as i32;
            k += n;
            t.maxcode[len] = code - 1;
        } else {
            t.maxcode[len] = -1;
        }
        code <<= 1;
    }
    t
}

/// Bit-level reader over entropy-coded segments. Handles 0xFF00 byte
/// stuffing; stops (without consuming) at any real marker.
struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    bitbuf: u32,
    bitcnt: u32,
    /// Set when the reader ran into a non-RST marker inside the scan.
    at_marker: bool,
}

impl<'a> BitReader<'a> {
    fn new(data: &'a [u8], pos: usize) -> Self {
        BitReader { data, pos, bitbuf: 0, bitcnt: 0, at_marker: false }
    }

    /// Pull one bit; `None` when the compressed segment is exhausted.
    #[inline]
    fn bit(&mut self) -> Option<u32> {
        if self.bitcnt == 0 {
            if self.at_marker || self.pos >= self.data.len() {
                return None;
            }
            let b = self.data[self.pos];
            if b == 0xFF {
                match self.data.get(self.pos + 1) {
                    Some(0x00) => {
                        self.pos += 2;
                        self.bitbuf = 0xFF;
                        self.bitcnt = 8;
                    }
                    _ => {
                        self.at_marker = true;
                        return None;
                    }
                }
            } else {
                self.pos += 1;
                self.bitbuf = b as u32;
                self.bitcnt = 8;
            }
        }
        self.bitcnt -= 1;
        Some((self.bitbuf >> self.bitcnt) & 1)
    }

    fn receive(&mut self, n: u32) -> Option<u32> {
        let mut v = 0;
        for _ in 0..n {
            v = (v << 1) | self.bit()?;
        }
        Some(v)
    }

    /// Drop any partial byte and consume an expected RSTn marker.
    fn restart(&mut self) -> Result<(), JpegError> {
        self.bitcnt = 0;
        self.at_marker = false;
        if self.pos + 1 >= self.data.len() {
            return Err(JpegError::TruncatedStream { offset: self.data.len() });
        }
        if self.data[self.pos] != 0xFF || !(0xD0..=0xD7).contains(&self.data[self.pos + 1]) {
            return Err(JpegError::InvalidMarker {
                offset: self.pos,
                marker: self.data[self.pos + 1],
            });
        }
        self.pos += 2;
        Ok(())
    }

    fn decode_symbol(&mut self, t: &HuffTable, vals: &[u8]) -> Result<u8, JpegError> {
        let mut code: i32 = 0;
        for len in 1..=16usize {
            code = (code << 1)
                | self.bit().ok_or(JpegError::TruncatedStream { offset: self.pos })? as i32;
            if t.maxcode[len] >= code && t.mincode[len] <= code {
                let idx = t.valptr[len] + (code - t.mincode[len]) as usize;
                if idx < t.nvals {
                    return Ok(vals[idx]);
                }
                break;
            }
        }
        Err(JpegError::HuffmanDecodeError { offset: self.pos })
    }
}

/// Sign-extend a magnitude-category value (JPEG EXTEND procedure).
#[inline]
fn extend(v: u32, ssss: u32) -> i32 {
    if ssss == 0 {
        0
    } else if v < (1 << (ssss - 1)) {
        v as i32 - (1 << ssss) + 1
    } else {
        v as i32
    }
}

fn read_u16(data: &[u8], at: usize) -> Result<u16, JpegError> {
    if at + 1 >= data.len() {
        return Err(JpegError::TruncatedStream { offset: data.len() });
    }
    Ok(u16::from_be_bytes([data[at], data[at + 1]]))
}

/// Parse a baseline sequential grayscale JPEG into its quantized
/// coefficients. Restart markers are honored; progressive or multi-component
/// streams are rejected with the offending byte offset.
pub fn parse_jpeg(bytes: &[u8]) -> Result<QuantizedJpeg, JpegError> {
    if bytes.len() < 2 || bytes[0] != 0xFF || bytes[1] != 0xD8 {
        return Err(JpegError::InvalidMarker { offset: 0, marker: *bytes.first().unwrap_or(&0) });
    }
    let mut pos = 2usize;
    let mut qtables: [Option<QuantTable>; 4] = [None, None, None, None];
    let mut huff = HuffStore { tables: Default::default() };
    let mut frame: Option<(usize, usize, u8)> = None; // (height, width, qtable id)
    let mut restart_interval: usize = 0;

    loop {
        // find the next marker, tolerating fill bytes
        if pos >= bytes.len() {
            return Err(JpegError::TruncatedStream { offset: bytes.len() });
        }
        if bytes[pos] != 0xFF {
            return Err(JpegError::InvalidMarker { offset: pos, marker: bytes[pos] });
        }
        let mut mpos = pos;
        while mpos < bytes.len() && bytes[mpos] == 0xFF {
            mpos += 1;
        }
        if mpos >= bytes.len() {
            return Err(JpegError::TruncatedStream { offset: bytes.len() });
        }
        let marker = bytes[mpos];
        // error offsets name the 0xFF byte that introduced the marker
        let mstart = mpos - 1;
        let seg = mpos + 1;
        pos = seg;

        match marker {
            0xD8 => {} // spurious SOI: ignore
            0xD9 => return Err(JpegError::TruncatedStream { offset: mstart }), // EOI before scan
            0x01 | 0xD0..=0xD7 => {} // standalone markers outside a scan: skip
            0xC0 => {
                // baseline sequential frame
                let len = read_u16(bytes, seg)? as usize;
                if seg + len > bytes.len() {
                    return Err(JpegError::TruncatedStream { offset: bytes.len() });
                }
                if len < 8 {
                    return Err(JpegError::InvalidMarker { offset: mstart, marker });
                }
                let precision = bytes[seg + 2];
                if precision != 8 {
                    return Err(JpegError::InvalidMarker { offset: seg + 2, marker });
                }
                let height = read_u16(bytes, seg + 3)? as usize;
                let width = read_u16(bytes, seg + 5)? as usize;
                let nf = bytes[seg + 7];
                if nf != 1 {
                    return Err(JpegError::MultiComponentUnsupported {
                        offset: seg + 7,
                        components: nf,
                    });
                }
                if len < 8 + 3 || height == 0 || width == 0 {
                    return Err(JpegError::InvalidMarker { offset: mstart, marker });
                }
                let tq = bytes[seg + 10];
                frame = Some((height, width, tq));
                pos = seg + len;
            }
            0xC2 => return Err(JpegError::ProgressiveUnsupported { offset: mstart }),
            0xC1 | 0xC3 | 0xC5..=0xC7 | 0xC9..=0xCB | 0xCD..=0xCF => {
                return Err(JpegError::InvalidMarker { offset: mstart, marker });
            }
            0xC4 => {
                let len = read_u16(bytes, seg)? as usize;
                let end = seg + len;
                if end > bytes.len() {
                    return Err(JpegError::TruncatedStream { offset: bytes.len() });
                }
                let mut p = seg + 2;
                while p < end {
                    let tc_th = bytes[p];
                    let tc = tc_th >> 4;
                    let th = tc_th & 0x0F;
                    if tc > 1 || th > 3 || p + 17 > end {
                        return Err(JpegError::InvalidMarker { offset: p, marker });
                    }
                    let mut bits = [0u8; 16];
                    bits.copy_from_slice(&bytes[p + 1..p + 17]);
                    let total: usize = bits.iter().map(|&b| b as usize).sum();
                    if p + 17 + total > end || total > 256 {
                        return Err(JpegError::InvalidMarker { offset: p, marker });
                    }
                    let vals = bytes[p + 17..p + 17 + total].to_vec();
                    huff.tables[(tc * 4 + th) as usize] = Some((build_huff(&bits, &vals), vals));
                    p += 17 + total;
                }
                pos = end;
            }
            0xDB => {
                let len = read_u16(bytes, seg)? as usize;
                let end = seg + len;
                if end > bytes.len() {
                    return Err(JpegError::TruncatedStream { offset: bytes.len() });
                }
                let mut p = seg + 2;
                while p < end {
                    let pq_tq = bytes[p];
                    let pq = pq_tq >> 4;
                    let tq = pq_tq & 0x0F;
                    let (width_bytes, precision) = match pq {
                        0 => (1usize, 8u8),
                        1 => (2usize, 16u8),
                        _ => return Err(JpegError::InvalidMarker { offset: p, marker }),
                    };
                    if tq > 3 || p + 1 + 64 * width_bytes > end {
                        return Err(JpegError::InvalidMarker { offset: p, marker });
                    }
                    let mut entries = [0u16; 64];
                    for (i, e) in entries.iter_mut().enumerate() {
                        *e = if pq == 0 {
                            bytes[p + 1 + i] as u16
                        } else {
                            u16::from_be_bytes([bytes[p + 1 + 2 * i], bytes[p + 2 + 2 * i]])
                        };
                        if *e == 0 {
                            return Err(JpegError::InvalidMarker { offset: p, marker });
                        }
                    }
                    qtables[tq as usize] = Some(QuantTable { entries, precision });
                    p += 1 + 64 * width_bytes;
                }
                pos = end;
            }
            0xDD => {
                let len = read_u16(bytes, seg)? as usize;
                if len != 4 || seg + 4 > bytes.len() {
                    return Err(JpegError::InvalidMarker { offset: mstart, marker });
                }
                restart_interval = read_u16(bytes, seg + 2)? as usize;
                pos = seg + len;
            }
            0xDA => {
                let len = read_u16(bytes, seg)? as usize;
                if seg + len > bytes.len() {
                    return Err(JpegError::TruncatedStream { offset: bytes.len() });
                }
                let (height, width, tq) =
                    frame.ok_or(JpegError::InvalidMarker { offset: mstart, marker })?;
                let ns = bytes[seg + 2];
                if ns != 1 {
                    return Err(JpegError::MultiComponentUnsupported {
                        offset: seg + 2,
                        components: ns,
                    });
                }
                let td_ta = bytes[seg + 4];
                let td = (td_ta >> 4) as usize;
                let ta = (td_ta & 0x0F) as usize;
                let qtable = qtables[tq as usize]
                    .clone()
                    .ok_or(JpegError::InvalidMarker { offset: mstart, marker })?;
                let (dc_t, dc_v) = huff.tables[td]
                    .as_ref()
                    .ok_or(JpegError::HuffmanDecodeError { offset: seg + 4 })?;
                let (ac_t, ac_v) = huff.tables[4 + ta]
                    .as_ref()
                    .ok_or(JpegError::HuffmanDecodeError { offset: seg + 4 })?;

                let blocks_w = width.div_ceil(8);
                let blocks_h = height.div_ceil(8);
                let nblocks = blocks_w * blocks_h;
                let mut coeffs = vec![[0i16; 64]; nblocks];
                let mut rd = BitReader::new(bytes, seg + len);
                let mut pred: i32 = 0;
                for (bi, block) in coeffs.iter_mut().enumerate() {
                    if restart_interval > 0 && bi > 0 && bi % restart_interval == 0 {
                        rd.restart()?;
                        pred = 0;
                    }
                    // DC
                    let ssss = rd.decode_symbol(dc_t, dc_v)? as u32;
                    if ssss > 15 {
                        return Err(JpegError::HuffmanDecodeError { offset: rd.pos });
                    }
                    let diff = if ssss == 0 {
                        0
                    } else {
                        let v = rd
                            .receive(ssss)
                            .ok_or(JpegError::TruncatedStream { offset: rd.pos })?;
                        extend(v, ssss)
                    };
                    pred += diff;
                    if pred.unsigned_abs() > i16::MAX as u32 {
                        return Err(JpegError::HuffmanDecodeError { offset: rd.pos });
                    }
                    block[0] = pred as i16;
                    // AC
                    let mut k = 1usize;
                    while k < 64 {
                        let rs = rd.decode_symbol(ac_t, ac_v)?;
                        let rrrr = (rs >> 4) as usize;
                        let ssss = (rs & 0x0F) as u32;
                        if ssss == 0 {
                            if rrrr == 15 {
                                k += 16; // ZRL
                                continue;
                            }
                            break; // EOB
                        }
                        k += rrrr;
                        if k > 63 || ssss > 15 {
                            return Err(JpegError::HuffmanDecodeError { offset: rd.pos });
                        }
                        let v = rd
                            .receive(ssss)
                            .ok_or(JpegError::TruncatedStream { offset: rd.pos })?;
                        block[ZIGZAG[k]] = extend(v, ssss) as i16;
                        k += 1;
                    }
                }
                // Scan complete. A well-formed stream now carries EOI, but a
                // missing terminator after a full scan is tolerated.
                let quality_hint = recognize_quality(&qtable);
                return Ok(QuantizedJpeg {
                    width,
                    height,
                    blocks_w,
                    blocks_h,
                    coeffs,
                    qtable,
                    quality_hint,
                });
            }
            // APPn, COM, and any other length-prefixed segment: skip
            0xE0..=0xEF | 0xFE | 0xDC | 0xDE | 0xDF | 0xF0..=0xFD => {
                let len = read_u16(bytes, seg)? as usize;
                if len < 2 || seg + len > bytes.len() {
                    return Err(JpegError::TruncatedStream { offset: bytes.len() });
                }
                pos = seg + len;
            }
            _ => return Err(JpegError::InvalidMarker { offset: mstart, marker }),
        }
    }
}
