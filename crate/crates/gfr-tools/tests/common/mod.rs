//! Shared helpers for integration tests: a minimal coefficient-level JPEG
//! encoder (so round-trips don't depend on any external library), a forward
//! compressor, and deterministic synthetic texture generators.

#![allow(dead_code)]

use gfr_core::jpeg::{dct_block, QuantTable, QuantizedJpeg, ZIGZAG};

/// Bit accumulator that applies JPEG 0xFF byte stuffing.
struct BitWriter {
    out: Vec<u8>,
    acc: u32,
    nbits: u32,
}

impl BitWriter {
    fn new() -> Self {
        BitWriter { out: Vec::new(), acc: 0, nbits: 0 }
    }

    fn put(&mut self, code: u32, len: u32) {
        assert!(len <= 24);
        self.acc = (self.acc << len) | (code & ((1u32 << len) - 1).max(0));
        self.nbits += len;
        while self.nbits >= 8 {
            self.nbits -= 8;
            let b = ((self.acc >> self.nbits) & 0xFF) as u8;
            self.out.push(b);
            if b == 0xFF {
                self.out.push(0x00);
            }
        }
    }

    /// Pad the final partial byte with 1-bits, as the format requires.
    fn flush(&mut self) {
        if self.nbits > 0 {
            let pad = 8 - self.nbits;
            self.put((1u32 << pad) - 1, pad);
        }
    }
}

/// Magnitude category: number of bits needed for |v|.
fn category(v: i32) -> u32 {
    (32 - v.unsigned_abs().leading_zeros()) as u32
}

fn magnitude_bits(v: i32, ssss: u32) -> u32 {
    if v >= 0 {
        v as u32
    } else {
        (v + (1i32 << ssss) - 1) as u32
    }
}

/// Test Huffman tables: every DC category at code length 4, every AC
/// run/size symbol at code length 8. Hopeless for compression, trivially
/// correct for round-trips.
fn dc_spec() -> ([u8; 16], Vec<u8>) {
    let mut bits = [0u8; 16];
    bits[3] = 12;
    (bits, (0u8..12).collect())
}

fn ac_spec() -> ([u8; 16], Vec<u8>) {
    let mut bits = [0u8; 16];
    let mut vals = Vec::new();
    vals.push(0x00); // EOB
    vals.push(0xF0); // ZRL
    for rrrr in 0u8..16 {
        for ssss in 1u8..=10 {
            vals.push((rrrr << 4) | ssss);
        }
    }
    bits[7] = vals.len() as u8;
    (bits, vals)
}

fn code_map(bits: &[u8; 16], vals: &[u8]) -> [(u32, u32); 256] {
    let mut map = [(0u32, 0u32); 256];
    let mut code = 0u32;
    let mut k = 0usize;
    for len in 1..=16u32 {
        for _ in 0..bits[(len - 1) as usize] {
            map[vals[k] as usize] = (code, len);
            code += 1;
            k += 1;
        }
        code <<= 1;
    }
    map
}

fn push_u16(v: &mut Vec<u8>, x: u16) {
    v.extend_from_slice(&x.to_be_bytes());
}

/// Serialize quantized coefficients (natural order per block, raster block
/// order) as a baseline sequential grayscale JPEG.
pub fn encode_gray_jpeg(
    coeffs: &[[i16; 64]],
    qtable: &QuantTable,
    width: usize,
    height: usize,
) -> Vec<u8> {
    let blocks_w = width.div_ceil(8);
    let blocks_h = height.div_ceil(8);
    assert_eq!(coeffs.len(), blocks_w * blocks_h, "block count must match dimensions");

    let mut out = vec![0xFF, 0xD8];

    out.extend_from_slice(&[0xFF, 0xDB]);
    let wide = qtable.precision == 16;
    push_u16(&mut out, 2 + 1 + if wide { 128 } else { 64 });
    out.push(if wide { 0x10 } else { 0x00 });
    for &e in qtable.entries.iter() {
        if wide {
            push_u16(&mut out, e);
        } else {
            out.push(e as u8);
        }
    }

    out.extend_from_slice(&[0xFF, 0xC0]);
    push_u16(&mut out, 11);
    out.push(8);
    push_u16(&mut out, height as u16);
    push_u16(&mut out, width as u16);
    out.push(1);
    out.extend_from_slice(&[1, 0x11, 0]);

    let (dc_bits, dc_vals) = dc_spec();
    let (ac_bits, ac_vals) = ac_spec();
    out.extend_from_slice(&[0xFF, 0xC4]);
    push_u16(&mut out, (2 + (1 + 16 + dc_vals.len()) + (1 + 16 + ac_vals.len())) as u16);
    out.push(0x00);
    out.extend_from_slice(&dc_bits);
    out.extend_from_slice(&dc_vals);
    out.push(0x10);
    out.extend_from_slice(&ac_bits);
    out.extend_from_slice(&ac_vals);

    out.extend_from_slice(&[0xFF, 0xDA]);
    push_u16(&mut out, 8);
    out.extend_from_slice(&[1, 1, 0x00, 0, 63, 0]);

    let dc_map = code_map(&dc_bits, &dc_vals);
    let ac_map = code_map(&ac_bits, &ac_vals);
    let mut bw = BitWriter::new();
    let mut pred: i32 = 0;
    for block in coeffs.iter() {
        let diff = block[0] as i32 - pred;
        pred = block[0] as i32;
        let ssss = category(diff);
        assert!(ssss <= 11, "DC difference out of range");
        let (code, len) = dc_map[ssss as usize];
        bw.put(code, len);
        if ssss > 0 {
            bw.put(magnitude_bits(diff, ssss), ssss);
        }
        let mut run = 0u32;
        for scan in 1..64 {
            let v = block[ZIGZAG[scan]] as i32;
            if v == 0 {
                run += 1;
                continue;
            }
            while run >= 16 {
                let (code, len) = ac_map[0xF0];
                bw.put(code, len);
                run -= 16;
            }
            let ssss = category(v);
            assert!((1..=10).contains(&ssss), "AC magnitude out of range: {v}");
            let (code, len) = ac_map[((run as usize) << 4) | ssss as usize];
            bw.put(code, len);
            bw.put(magnitude_bits(v, ssss), ssss);
            run = 0;
        }
        if run > 0 {
            let (code, len) = ac_map[0x00];
            bw.put(code, len);
        }
    }
    bw.flush();
    out.extend_from_slice(&bw.out);
    out.extend_from_slice(&[0xFF, 0xD9]);
    out
}

/// Tiny deterministic RNG for test data (splitmix64).
pub struct TestRng(pub u64);

impl TestRng {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Deterministic textured grayscale plane: several random-phase sinusoidal
/// gratings plus spatially varying noise, values in [0, 255]. Rich enough in
/// oriented content to exercise every filter in the bank.
pub fn synth_texture(rows: usize, cols: usize, seed: u64) -> Vec<u8> {
    let mut rng = TestRng(seed);
    let mut fields = Vec::new();
    for _ in 0..6 {
        let fx = 0.04 + 0.45 * rng.unit();
        let fy = 0.04 + 0.45 * rng.unit();
        let phase = rng.unit() * core::f64::consts::TAU;
        let amp = 12.0 + 30.0 * rng.unit();
        fields.push((fx, fy, phase, amp));
    }
    let mut img = vec![0u8; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let mut v = 128.0;
            for &(fx, fy, phase, amp) in &fields {
                v += amp * (fx * r as f64 + fy * c as f64 + phase).sin();
            }
            v += (rng.unit() - 0.5) * 24.0;
            img[r * cols + c] = v.clamp(0.0, 255.0) as u8;
        }
    }
    img
}

/// Forward-compresses a grayscale plane: level shift, blockwise DCT,
/// quantize and round. Dimensions must be multiples of 8.
pub fn compress_plane(pixels: &[u8], rows: usize, cols: usize, qtable: &QuantTable) -> QuantizedJpeg {
    assert!(rows % 8 == 0 && cols % 8 == 0, "whole blocks only");
    let (blocks_h, blocks_w) = (rows / 8, cols / 8);
    let qnat = qtable.natural();
    let mut coeffs = Vec::with_capacity(blocks_h * blocks_w);
    for br in 0..blocks_h {
        for bc in 0..blocks_w {
            let mut px = [0.0f64; 64];
            for r in 0..8 {
                for c in 0..8 {
                    px[r * 8 + c] = pixels[(br * 8 + r) * cols + bc * 8 + c] as f64 - 128.0;
                }
            }
            let dct = dct_block(&px);
            let mut block = [0i16; 64];
            for (b, (&v, &q)) in block.iter_mut().zip(dct.iter().zip(qnat.iter())) {
                *b = (v / q as f64).round() as i16;
            }
            coeffs.push(block);
        }
    }
    QuantizedJpeg {
        width: cols,
        height: rows,
        blocks_w,
        blocks_h,
        coeffs,
        qtable: qtable.clone(),
        quality_hint: None,
    }
}

/// A textured cover encoded as a grayscale JPEG file in memory.
pub fn synth_cover_jpeg(rows: usize, cols: usize, seed: u64, qtable: &QuantTable) -> Vec<u8> {
    let pixels = synth_texture(rows, cols, seed);
    let j = compress_plane(&pixels, rows, cols, qtable);
    encode_gray_jpeg(&j.coeffs, qtable, cols, rows)
}
