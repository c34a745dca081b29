//! Gabor residuals (valid cross-correlation), JPEG-phase splitting, and the
//! impact-kernel / projection-vector machinery that certifies the symmetry
//! relations the feature merging relies on.
//!
//! The central object is the projection vector: a residual sample u taken
//! with window top-left at image position (8r+a, 8c+b) is a linear functional
//! of the 256 quantized coefficients of the four DCT blocks covering the
//! window. Its coefficients are impact-kernel values at the four offsets
//! (a,b), (a,b-8), (a-8,b), (a-8,b-8), one section of 64 modes per block,
//! each scaled by the mode's quantization step. Every merge rule downstream
//! is justified by an exact symmetry of these vectors, and
//! [`verify_symmetries`] checks all of them numerically.

use alloc::vec;
use alloc::vec::Vec;

use crate::gabor::{dct_basis, make_bank, GaborError, Kernel8, KernelKind};
use crate::jpeg::{QuantTable, SpatialImage};

/// Side length of an impact kernel (offsets -7..=7 in each axis).
pub const IMPACT_SIZE: usize = 15;

#[derive(Debug, Clone, PartialEq)]
pub enum ResidualError {
    /// Valid correlation needs at least an 8x8 image.
    ImageTooSmall { rows: usize, cols: usize },
}

impl core::fmt::Display for ResidualError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ResidualError::ImageTooSmall { rows, cols } => {
                write!(f, "image {rows}x{cols} too small for an 8x8 kernel")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ResidualError {}

/// A valid-correlation residual plane.
#[derive(Debug, Clone)]
pub struct Residual {
    pub rows: usize,
    pub cols: usize,
    /// Row-major samples, size rows*cols.
    pub data: Vec<f64>,
    /// Image coordinate of the first sample's window top-left corner.
    pub origin_phase: (usize, usize),
}

impl Residual {
    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }
}

/// The 64 JPEG-phase subsets of a residual; `subsets[a][b]` holds every
/// sample whose window top-left sits at image position ≡ (a, b) mod 8.
#[derive(Debug, Clone)]
pub struct PhaseSubsets {
    pub subsets: [[Vec<f64>; 8]; 8],
}

impl PhaseSubsets {
    #[inline]
    pub fn subset(&self, a: usize, b: usize) -> &[f64] {
        &self.subsets[a][b]
    }

    /// Total sample count across all 64 subsets.
    pub fn len(&self) -> usize {
        self.subsets.iter().flatten().map(|s| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Where an impact kernel came from: the filtering kernel and the DCT mode
/// whose coefficient is perturbed (when the second operand is a DCT basis).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpactProvenance {
    pub kernel: KernelKind,
    pub mode: Option<(u8, u8)>,
}

/// 15x15 footprint of a unit change of one DCT mode in a filter residual.
#[derive(Debug, Clone)]
pub struct ImpactKernel {
    /// Row-major values; index (a, b) in -7..=7 maps to (a+7)*15 + (b+7).
    pub r: [f64; IMPACT_SIZE * IMPACT_SIZE],
    pub provenance: ImpactProvenance,
}

impl ImpactKernel {
    /// Value at offset (a, b); zero outside the 15x15 support.
    #[inline]
    pub fn at(&self, a: i32, b: i32) -> f64 {
        if !(-7..=7).contains(&a) || !(-7..=7).contains(&b) {
            return 0.0;
        }
        self.r[((a + 7) * 15 + (b + 7)) as usize]
    }
}

// ---------------------------------------------------------------------------
// Correlation
// ---------------------------------------------------------------------------

/// Portable tiled correlation over full rows; the register tile keeps eight
/// independent accumulator chains live so the loop is throughput-bound.
#[inline(always)]
fn correlate_body(img: &[f64], cols: usize, w: &[f64; 64], out: &mut [f64], orows: usize, ocols: usize) {
    const TW: usize = 16;
    for r in 0..orows {
        let mut c = 0;
        while c + TW <= ocols {
            let mut acc = [0.0f64; TW];
            for x in 0..8 {
                let irow = &img[(r + x) * cols + c..(r + x) * cols + c + TW + 7];
                for y in 0..8 {
                    let kw = w[x * 8 + y];
                    for (t, a) in acc.iter_mut().enumerate() {
                        *a += irow[y + t] * kw;
                    }
                }
            }
            out[r * ocols + c..r * ocols + c + TW].copy_from_slice(&acc);
            c += TW;
        }
        while c < ocols {
            let mut s = 0.0;
            for x in 0..8 {
                for y in 0..8 {
                    s += img[(r + x) * cols + c + y] * w[x * 8 + y];
                }
            }
            out[r * ocols + c] = s;
            c += 1;
        }
    }
}

#[cfg(all(feature = "std", target_arch = "x86_64"))]
#[target_feature(enable = "avx2,fma")]
unsafe fn correlate_body_avx2(
    img: &[f64],
    cols: usize,
    w: &[f64; 64],
    out: &mut [f64],
    orows: usize,
    ocols: usize,
) {
    correlate_body(img, cols, w, out, orows, ocols);
}

#[inline]
fn correlate_dispatch(img: &[f64], cols: usize, w: &[f64; 64], out: &mut [f64], orows: usize, ocols: usize) {
    #[cfg(all(feature = "std", target_arch = "x86_64"))]
    {
        if std::arch::is_x86_feature_detected!("avx2") && std::arch::is_x86_feature_detected!("fma")
        {
            // Safety: the required CPU features were just verified.
            unsafe { correlate_body_avx2(img, cols, w, out, orows, ocols) };
            return;
        }
    }
    correlate_body(img, cols, w, out, orows, ocols);
}

/// Valid 2-D cross-correlation (no kernel flip):
/// out[r][c] = sum_{x,y} img[r+x][c+y] * k[x][y], size (rows-7) x (cols-7).
pub fn correlate_valid(img: &SpatialImage, k: &Kernel8) -> Result<Residual, ResidualError> {
    if img.rows < 8 || img.cols < 8 {
        return Err(ResidualError::ImageTooSmall { rows: img.rows, cols: img.cols });
    }
    let orows = img.rows - 7;
    let ocols = img.cols - 7;
    let mut data = vec![0.0f64; orows * ocols];
    correlate_dispatch(&img.data, img.cols, &k.weights, &mut data, orows, ocols);
    Ok(Residual { rows: orows, cols: ocols, data, origin_phase: (0, 0) })
}

/// Split a residual into its 64 JPEG-phase subsets. The phase of the sample
/// at residual position (u, v) is the window top-left image coordinate mod 8:
/// ((u + origin_row) mod 8, (v + origin_col) mod 8).
pub fn phase_split(r: &Residual) -> PhaseSubsets {
    let mut out = PhaseSubsets {
        subsets: core::array::from_fn(|_| core::array::from_fn(|_| Vec::new())),
    };
    phase_split_into(r, &mut out);
    out
}

/// [`phase_split`] into caller-owned storage, reusing the subset buffers'
/// capacity — the per-kernel extraction loop calls this to avoid churning
/// 64 allocations per residual.
pub fn phase_split_into(r: &Residual, out: &mut PhaseSubsets) {
    let cap = r.rows * r.cols / 64 + r.rows / 8 + r.cols / 8 + 2;
    for sub in out.subsets.iter_mut().flatten() {
        sub.clear();
        sub.reserve(cap);
    }
    for u in 0..r.rows {
        let a = (u + r.origin_phase.0) % 8;
        let row = &r.data[u * r.cols..(u + 1) * r.cols];
        for (v, &val) in row.iter().enumerate() {
            let b = (v + r.origin_phase.1) % 8;
            out.subsets[a][b].push(val);
        }
    }
}

/// Full cross-correlation of two 8x8 kernels:
/// R[a][b] = sum_{x,y} g[x][y] * basis[x+a][y+b], offsets a, b in -7..=7.
pub fn impact_kernel(g: &Kernel8, basis: &Kernel8) -> ImpactKernel {
    let mut r = [0.0f64; IMPACT_SIZE * IMPACT_SIZE];
    for a in -7i32..=7 {
        for b in -7i32..=7 {
            let mut s = 0.0;
            for x in 0..8i32 {
                let bx = x + a;
                if !(0..8).contains(&bx) {
                    continue;
                }
                for y in 0..8i32 {
                    let by = y + b;
                    if !(0..8).contains(&by) {
                        continue;
                    }
                    s += g.weights[(x * 8 + y) as usize] * basis.weights[(bx * 8 + by) as usize];
                }
            }
            r[((a + 7) * 15 + (b + 7)) as usize] = s;
        }
    }
    let mode = match basis.params {
        KernelKind::Dct { i, j } => Some((i, j)),
        KernelKind::Gabor(_) => None,
    };
    ImpactKernel { r, provenance: ImpactProvenance { kernel: g.params, mode } }
}

/// The four section offsets of the projection vector at phase (a, b):
/// block A (containing the window anchor) then its right, lower, and
/// diagonal neighbors.
#[inline]
fn section_offsets(a: usize, b: usize) -> [(i32, i32); 4] {
    let (a, b) = (a as i32, b as i32);
    [(a, b), (a, b - 8), (a - 8, b), (a - 8, b - 8)]
}

fn assemble_projection(impacts: &[ImpactKernel], a: usize, b: usize, qnat: &[u16; 64]) -> [f64; 256] {
    let mut p = [0.0f64; 256];
    let offs = section_offsets(a, b);
    for (s, &(oa, ob)) in offs.iter().enumerate() {
        for m in 0..64 {
            p[s * 64 + m] = qnat[m] as f64 * impacts[m].at(oa, ob);
        }
    }
    p
}

/// Projection vector of the kernel at phase (a, b): 256 entries, one section
/// of 64 DCT modes (natural order) per covering block in the order
/// anchor / right / below / diagonal, each entry Q_kl * R_kl(offset). The dot
/// product of this vector with the four blocks' raw quantized coefficients
/// reproduces the residual sample at that phase.
pub fn projection_vector(g: &Kernel8, a: usize, b: usize, qtable: &QuantTable) -> [f64; 256] {
    assert!(a < 8 && b < 8, "phase indices must be in 0..8");
    let impacts: Vec<ImpactKernel> = (0..64)
        .map(|m| impact_kernel(g, &dct_basis(m / 8, m % 8).expect("mode in range")))
        .collect();
    assemble_projection(&impacts, a, b, &qtable.natural())
}

// ---------------------------------------------------------------------------
// Symmetry verification
// ---------------------------------------------------------------------------

/// Outcome of one equality relation checked across kernels and phases.
#[derive(Debug, Clone)]
pub struct RelationStat {
    pub name: &'static str,
    /// Number of (kernel-pair, phase) comparisons.
    pub cases: usize,
    /// Largest absolute deviation of any compared |entry| pair.
    pub max_deviation: f64,
    /// Comparisons whose deviation exceeded the tolerance.
    pub violations: usize,
}

/// Outcome of one claimed non-equality: how many sampled cases were strictly
/// separated by more than the required margin.
#[derive(Debug, Clone)]
pub struct SeparationStat {
    pub name: &'static str,
    pub cases: usize,
    pub separated: usize,
    pub required_margin: f64,
}

/// Full report of [`verify_symmetries`].
#[derive(Debug, Clone)]
pub struct SymmetryReport {
    pub tolerance: f64,
    pub equalities: Vec<RelationStat>,
    pub inequalities: Vec<SeparationStat>,
}

impl SymmetryReport {
    /// True when every equality held within tolerance and every claimed
    /// inequality was separated in at least `min_fraction` of its cases.
    pub fn pass(&self, min_fraction: f64) -> bool {
        self.equalities.iter().all(|r| r.violations == 0)
            && self
                .inequalities
                .iter()
                .all(|s| s.cases > 0 && s.separated as f64 >= min_fraction * s.cases as f64)
    }

    pub fn max_equality_deviation(&self) -> f64 {
        self.equalities.iter().map(|r| r.max_deviation).fold(0.0, f64::max)
    }
}

/// One projection-vector comparison under an offset remapping.
///
/// Every entry of `from` (at `phase_from`) must equal in absolute value the
/// entry of `to` (at `phase_to`) whose section offset is `f(offset)` and
/// whose mode is `mode_map(mode)`. Offsets that leave the partner's section
/// set can only occur where the entry itself is structurally zero, so those
/// entries are compared against zero. Returns the max absolute deviation.
fn compare_projection(
    from: &[f64; 256],
    phase_from: (usize, usize),
    to: &[f64; 256],
    phase_to: (usize, usize),
    f: impl Fn((i32, i32)) -> (i32, i32),
    mode_map: impl Fn(usize) -> usize,
) -> f64 {
    let offs_from = section_offsets(phase_from.0, phase_from.1);
    let offs_to = section_offsets(phase_to.0, phase_to.1);
    let mut max_dev = 0.0f64;
    for (s, &o) in offs_from.iter().enumerate() {
        let fo = f(o);
        let partner = offs_to.iter().position(|&p| p == fo);
        for m in 0..64 {
            let v = from[s * 64 + m].abs();
            let w = match partner {
                Some(sp) => to[sp * 64 + mode_map(m)].abs(),
                None => 0.0,
            };
            let d = (v - w).abs();
            if d > max_dev {
                max_dev = d;
            }
        }
    }
    max_dev
}

/// Check every symmetry the merging rules use, for a bank built over
/// `scales` with the standard 32 orientations and both phases.
pub fn verify_symmetries(
    scales: &[f64],
    qtable: &QuantTable,
    tolerance: f64,
) -> Result<SymmetryReport, GaborError> {
    Ok(verify_symmetries_bank(&make_bank(scales)?, qtable, tolerance))
}

/// [`verify_symmetries`] over an explicit kernel list. The bank must use the
/// standard layout (orientation-minor, 32 orientations per (phase, scale)
/// group); groups are processed independently.
pub fn verify_symmetries_bank(
    bank: &[Kernel8],
    qtable: &QuantTable,
    tolerance: f64,
) -> SymmetryReport {
    const SEP_MARGIN: f64 = 1e-6;
    let qnat = qtable.natural();
    let basis: Vec<Kernel8> = (0..64).map(|m| dct_basis(m / 8, m % 8).unwrap()).collect();

    let mut axis = RelationStat { name: "dctr-axis", cases: 0, max_deviation: 0.0, violations: 0 };
    let mut centro = RelationStat { name: "centro", cases: 0, max_deviation: 0.0, violations: 0 };
    let mut mirror = RelationStat { name: "mirror", cases: 0, max_deviation: 0.0, violations: 0 };
    let mut transp =
        RelationStat { name: "transpose", cases: 0, max_deviation: 0.0, violations: 0 };
    let mut sep_v = SeparationStat {
        name: "axis-inequality-vertical",
        cases: 0,
        separated: 0,
        required_margin: SEP_MARGIN,
    };
    let mut sep_h = SeparationStat {
        name: "axis-inequality-horizontal",
        cases: 0,
        separated: 0,
        required_margin: SEP_MARGIN,
    };

    let record = |stat: &mut RelationStat, dev: f64| {
        stat.cases += 1;
        if dev > stat.max_deviation {
            stat.max_deviation = dev;
        }
        if dev > tolerance {
            stat.violations += 1;
        }
    };

    for group in bank.chunks(32) {
        if group.len() < 32 {
            break; // partial trailing group: not a standard bank layout
        }
        // all 64 projection tables per orientation, assembled lazily
        let tables: Vec<Vec<[f64; 256]>> = group
            .iter()
            .map(|g| {
                let impacts: Vec<ImpactKernel> =
                    basis.iter().map(|b| impact_kernel(g, b)).collect();
                (0..64).map(|ph| assemble_projection(&impacts, ph / 8, ph % 8, &qnat)).collect()
            })
            .collect();

        for k in 0..32usize {
            let axis_kernel = k == 0 || k == 16;
            for a in 0..8usize {
                for b in 0..8usize {
                    let p = &tables[k][a * 8 + b];
                    // centrosymmetry holds for every orientation
                    let pc = ((8 - a) % 8, (8 - b) % 8);
                    let dev = compare_projection(
                        p,
                        (a, b),
                        &tables[k][pc.0 * 8 + pc.1],
                        pc,
                        |(x, y)| (-x, -y),
                        |m| m,
                    );
                    record(&mut centro, dev);

                    // axis symmetry: exact for theta in {0, pi/2}, and the
                    // claimed strict failure elsewhere
                    let pv = ((8 - a) % 8, b);
                    let dev_v = compare_projection(
                        p,
                        (a, b),
                        &tables[k][pv.0 * 8 + pv.1],
                        pv,
                        |(x, y)| (-x, y),
                        |m| m,
                    );
                    let ph = (a, (8 - b) % 8);
                    let dev_h = compare_projection(
                        p,
                        (a, b),
                        &tables[k][ph.0 * 8 + ph.1],
                        ph,
                        |(x, y)| (x, -y),
                        |m| m,
                    );
                    if axis_kernel {
                        record(&mut axis, dev_v);
                        record(&mut axis, dev_h);
                    } else if a != 0 && b != 0 {
                        // phases on the coordinate cross carry no inequality
                        // claim: at b = 0 the right/diagonal sections leave
                        // the 15x15 support and the remaining column beta = 0
                        // is self-conjugate under the centro symmetry, which
                        // forces the axis reflection to hold exactly there
                        // (same for a = 0 and the horizontal check)
                        sep_v.cases += 1;
                        if dev_v > SEP_MARGIN {
                            sep_v.separated += 1;
                        }
                        sep_h.cases += 1;
                        if dev_h > SEP_MARGIN {
                            sep_h.separated += 1;
                        }
                    }

                    // mirror chain: theta paired with pi - theta
                    let km = (32 - k) % 32;
                    if k <= km {
                        let pm = (a, (8 - b) % 8);
                        let dev_m1 = compare_projection(
                            p,
                            (a, b),
                            &tables[km][pm.0 * 8 + pm.1],
                            pm,
                            |(x, y)| (x, -y),
                            |m| m,
                        );
                        record(&mut mirror, dev_m1);
                        let pm2 = ((8 - a) % 8, b);
                        let dev_m2 = compare_projection(
                            p,
                            (a, b),
                            &tables[km][pm2.0 * 8 + pm2.1],
                            pm2,
                            |(x, y)| (-x, y),
                            |m| m,
                        );
                        record(&mut mirror, dev_m2);
                    }

                    // transpose chain: theta paired with pi/2 - theta, modes
                    // and offsets transposed
                    let kt = (48 - k) % 32; // orientation index of pi/2 - theta
                    if k <= kt {
                        let pt = (b, a);
                        let dev_t = compare_projection(
                            p,
                            (a, b),
                            &tables[kt][pt.0 * 8 + pt.1],
                            pt,
                            |(x, y)| (y, x),
                            |m| (m % 8) * 8 + m / 8,
                        );
                        record(&mut transp, dev_t);
                    }
                }
            }
        }
    }

    SymmetryReport {
        tolerance,
        equalities: vec![axis, centro, mirror, transp],
        inequalities: vec![sep_v, sep_h],
    }
}
