//! Histogram merging and feature assembly for the three feature variants.
//!
//! The 64 per-phase histograms of each kernel collapse under the symmetry
//! relations certified by the residual module:
//!
//! * axis-aligned orientations use the four-way phase merge (25 classes),
//! * oblique orientations use the centro merge (34 classes),
//! * orientations theta and pi-theta merge through the mirror chain,
//! * orientations theta and pi/2-theta merge through index transposition.
//!
//! Merged histograms combine by arithmetic mean over the distinct members of
//! each orbit, which keeps every output a convex combination of normalized
//! histograms regardless of orbit size. The final vectors follow a frozen
//! ordering: phase phi major, then scale, then orientation class ascending by
//! its smallest angle, then phase class ascending by canonical representative,
//! then bin.

use alloc::vec;
use alloc::vec::Vec;

use crate::gabor::{GaborParams, Kernel8, KernelKind, N_ORIENTATIONS, PHASES};
use crate::histogram::{
    hist_conventional, hist_weighted, sigma_from_pcenter, Histogram, HistogramError,
};
use crate::jpeg::SpatialImage;
use crate::math::fnv1a;
use crate::residual::{correlate_valid, phase_split_into, PhaseSubsets, Residual, ResidualError};

/// The three assembled feature sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureVariant {
    /// Conventional histograms, 25-class merge everywhere, mirror pairing.
    Gfr,
    /// Conventional histograms with the symmetry-exact merging rules.
    GfrGsm,
    /// Gaussian-weighted histograms with the symmetry-exact merging rules.
    GfrGw,
}

impl FeatureVariant {
    pub fn id(&self) -> u8 {
        match self {
            FeatureVariant::Gfr => 0,
            FeatureVariant::GfrGsm => 1,
            FeatureVariant::GfrGw => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FeatureVariant::Gfr => "gfr",
            FeatureVariant::GfrGsm => "gfr-gsm",
            FeatureVariant::GfrGw => "gfr-gw",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureError {
    /// Inputs to a merge do not form the claimed orientation pairing.
    MismatchedProvenance,
    /// The kernel bank does not follow the standard layout for the params.
    BankLayout,
    /// Inconsistent assembly parameters.
    BadParams(&'static str),
    Histogram(HistogramError),
    Residual(ResidualError),
}

impl core::fmt::Display for FeatureError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FeatureError::MismatchedProvenance => {
                write!(f, "merge inputs are not the required orientation pair")
            }
            FeatureError::BankLayout => write!(f, "kernel bank does not match the parameters"),
            FeatureError::BadParams(why) => write!(f, "bad assembly parameters: {why}"),
            FeatureError::Histogram(e) => write!(f, "histogram: {e}"),
            FeatureError::Residual(e) => write!(f, "residual: {e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FeatureError {}

impl From<HistogramError> for FeatureError {
    fn from(e: HistogramError) -> Self {
        FeatureError::Histogram(e)
    }
}

impl From<ResidualError> for FeatureError {
    fn from(e: ResidualError) -> Self {
        FeatureError::Residual(e)
    }
}

/// The 64 per-phase histograms of one kernel's residual.
#[derive(Debug, Clone)]
pub struct PhaseHistogramGrid {
    pub hist: [[Histogram; 8]; 8],
    pub provenance: KernelKind,
}

impl PhaseHistogramGrid {
    fn gabor(&self) -> Result<&GaborParams, FeatureError> {
        match &self.provenance {
            KernelKind::Gabor(p) => Ok(p),
            KernelKind::Dct { .. } => Err(FeatureError::MismatchedProvenance),
        }
    }
}

/// How a merged set's phase classes were canonicalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MergeKind {
    Dctr,
    Centro,
}

/// A set of phase-class histograms after one or more merging steps. Classes
/// stay addressable by their canonical (a, b) representative so later steps
/// can pair (a, b) with (b, a).
#[derive(Debug, Clone)]
pub struct MergedSet {
    /// Canonical class representatives, lexicographically ascending.
    pub reps: Vec<(u8, u8)>,
    /// One histogram per class, in `reps` order.
    pub hists: Vec<Histogram>,
    /// Orientations folded into this set, ascending.
    pub thetas: Vec<f64>,
    pub phi: f64,
    pub sigma: f64,
    kind: MergeKind,
}

const ANGLE_TOL: f64 = 1e-9;

#[inline]
fn mirror8(x: usize) -> usize {
    (8 - x) % 8
}

/// Canonical representative under (a, b) -> (8-a, b) and (a, b) -> (a, 8-b).
#[inline]
fn canon_dctr(a: usize, b: usize) -> (u8, u8) {
    (a.min(mirror8(a)) as u8, b.min(mirror8(b)) as u8)
}

/// Canonical representative under (a, b) -> (8-a, 8-b).
#[inline]
fn canon_centro(a: usize, b: usize) -> (u8, u8) {
    let p = (a as u8, b as u8);
    let q = (mirror8(a) as u8, mirror8(b) as u8);
    p.min(q)
}

/// The 25 four-way phase classes, lexicographically ascending representatives.
pub fn dctr_classes() -> Vec<(u8, u8)> {
    let mut reps: Vec<(u8, u8)> = (0..5).flat_map(|a| (0..5).map(move |b| (a, b))).collect();
    reps.sort_unstable();
    reps
}

/// The 34 centro phase classes, lexicographically ascending representatives.
pub fn centro_classes() -> Vec<(u8, u8)> {
    let mut reps = Vec::new();
    for a in 0..8 {
        for b in 0..8 {
            let c = canon_centro(a, b);
            if c == (a as u8, b as u8) {
                reps.push(c);
            }
        }
    }
    reps.sort_unstable();
    reps
}

/// Mean of the distinct member histograms of one orbit.
fn mean_histograms(members: &[&Histogram]) -> Histogram {
    let nbins = members[0].bins.len();
    let mut bins = vec![0.0f64; nbins];
    let mut normalization = 0.0;
    for h in members {
        for (acc, v) in bins.iter_mut().zip(h.bins.iter()) {
            *acc += v;
        }
        normalization += h.normalization;
    }
    let inv = 1.0 / members.len() as f64;
    for b in bins.iter_mut() {
        *b *= inv;
    }
    Histogram { bins, normalization }
}

/// Four-way merge for axis-aligned orientations: orbit classes of
/// {a <-> 8-a} x {b <-> 8-b}, 25 outputs.
pub fn merge_dctr_style(g: &PhaseHistogramGrid) -> MergedSet {
    let (phi, sigma, theta) = match &g.provenance {
        KernelKind::Gabor(p) => (p.phi, p.sigma, p.theta),
        KernelKind::Dct { .. } => (0.0, 0.0, 0.0),
    };
    let reps = dctr_classes();
    let hists = reps
        .iter()
        .map(|&(a, b)| {
            let (a, b) = (a as usize, b as usize);
            let mut members: Vec<(usize, usize)> = Vec::with_capacity(4);
            for aa in [a, mirror8(a)] {
                for bb in [b, mirror8(b)] {
                    if !members.contains(&(aa, bb)) {
                        members.push((aa, bb));
                    }
                }
            }
            let views: Vec<&Histogram> = members.iter().map(|&(aa, bb)| &g.hist[aa][bb]).collect();
            mean_histograms(&views)
        })
        .collect();
    MergedSet { reps, hists, thetas: vec![theta], phi, sigma, kind: MergeKind::Dctr }
}

/// Two-way centro merge for oblique orientations: orbits of
/// (a, b) -> (8-a, 8-b), 34 outputs.
pub fn merge_centro(g: &PhaseHistogramGrid) -> MergedSet {
    let (phi, sigma, theta) = match &g.provenance {
        KernelKind::Gabor(p) => (p.phi, p.sigma, p.theta),
        KernelKind::Dct { .. } => (0.0, 0.0, 0.0),
    };
    let reps = centro_classes();
    let hists = reps
        .iter()
        .map(|&(a, b)| {
            let (a, b) = (a as usize, b as usize);
            let (a2, b2) = (mirror8(a), mirror8(b));
            if (a2, b2) == (a, b) {
                mean_histograms(&[&g.hist[a][b]])
            } else {
                mean_histograms(&[&g.hist[a][b], &g.hist[a2][b2]])
            }
        })
        .collect();
    MergedSet { reps, hists, thetas: vec![theta], phi, sigma, kind: MergeKind::Centro }
}

/// Mirror merge across the (theta, pi - theta) orientation pair: each of the
/// 34 centro classes of the theta grid averages its two members with the two
/// phase-mirrored members of the pi - theta grid.
pub fn merge_mirror_pairs(
    g_theta: &PhaseHistogramGrid,
    g_mirror: &PhaseHistogramGrid,
) -> Result<MergedSet, FeatureError> {
    let p1 = g_theta.gabor()?;
    let p2 = g_mirror.gabor()?;
    let ok = p1.phi == p2.phi
        && p1.sigma == p2.sigma
        && p1.theta > 0.0
        && p1.theta < core::f64::consts::FRAC_PI_2
        && (p2.theta - (core::f64::consts::PI - p1.theta)).abs() < ANGLE_TOL;
    if !ok {
        return Err(FeatureError::MismatchedProvenance);
    }
    let reps = centro_classes();
    let hists = reps
        .iter()
        .map(|&(a, b)| {
            let (a, b) = (a as usize, b as usize);
            let (a2, b2) = (mirror8(a), mirror8(b));
            // orbit: theta at (a,b) and (8-a,8-b); pi-theta at (8-a,b) and (a,8-b)
            let mut views: Vec<&Histogram> = vec![&g_theta.hist[a][b]];
            if (a2, b2) != (a, b) {
                views.push(&g_theta.hist[a2][b2]);
            }
            views.push(&g_mirror.hist[a2][b]);
            if (a, b2) != (a2, b) {
                views.push(&g_mirror.hist[a][b2]);
            }
            mean_histograms(&views)
        })
        .collect();
    let mut thetas = vec![p1.theta, p2.theta];
    thetas.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(MergedSet { reps, hists, thetas, phi: p1.phi, sigma: p1.sigma, kind: MergeKind::Centro })
}

/// Transpose merge across the (theta, pi/2 - theta) pair: class (a, b) of the
/// first set averages with class (b, a) of the second. Passing the same set
/// twice realizes the self-paired theta = pi/4 case.
pub fn merge_transpose(
    set_theta: &MergedSet,
    set_conj: &MergedSet,
) -> Result<MergedSet, FeatureError> {
    let pi = core::f64::consts::PI;
    let conj_matches = set_theta.thetas.len() == set_conj.thetas.len()
        && set_theta.thetas.iter().all(|&t| {
            let r = libm::fmod(pi / 2.0 - t, pi);
            let want = if r < 0.0 { r + pi } else { r };
            set_conj
                .thetas
                .iter()
                .any(|&u| (u - want).abs() < ANGLE_TOL || (u - want - pi).abs() < ANGLE_TOL)
        });
    if set_theta.phi != set_conj.phi
        || set_theta.sigma != set_conj.sigma
        || set_theta.kind != set_conj.kind
        || set_theta.reps != set_conj.reps
        || !conj_matches
    {
        return Err(FeatureError::MismatchedProvenance);
    }
    let canon = match set_theta.kind {
        MergeKind::Dctr => canon_dctr,
        MergeKind::Centro => canon_centro,
    };
    let hists = set_theta
        .reps
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let tr = canon(b as usize, a as usize);
            let j = set_conj.reps.binary_search(&tr).expect("transposed class exists");
            mean_histograms(&[&set_theta.hists[i], &set_conj.hists[j]])
        })
        .collect();
    let mut thetas: Vec<f64> = set_theta.thetas.clone();
    for &t in &set_conj.thetas {
        if thetas.iter().all(|&u| (u - t).abs() > ANGLE_TOL) {
            thetas.push(t);
        }
    }
    thetas.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(MergedSet {
        reps: set_theta.reps.clone(),
        hists,
        thetas,
        phi: set_theta.phi,
        sigma: set_theta.sigma,
        kind: set_theta.kind,
    })
}

// ---------------------------------------------------------------------------
// Layout
// ---------------------------------------------------------------------------

/// Identity of one feature component within the frozen ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct FeatureDescriptor {
    pub phi_idx: u8,
    pub scale_idx: u8,
    /// Orientation equivalence class, ascending by smallest member angle.
    pub orient_class: u8,
    /// Canonical phase-class representative.
    pub phase_class: (u8, u8),
    pub bin: u8,
}

/// The full ordered descriptor list for a variant, with its identity hash.
#[derive(Debug, Clone)]
pub struct FeatureLayout {
    pub variant: FeatureVariant,
    pub scales: usize,
    pub t: usize,
    pub descriptors: Vec<FeatureDescriptor>,
    pub hash: u64,
}

/// Closed-form feature count.
pub fn feature_len(variant: FeatureVariant, scales: usize, t: usize) -> usize {
    match variant {
        FeatureVariant::Gfr => 2 * scales * 17 * 25 * (t + 1),
        FeatureVariant::GfrGsm | FeatureVariant::GfrGw => 594 * scales * (t + 1),
    }
}

/// Build the ordered descriptor list and layout hash for a variant.
pub fn feature_layout(variant: FeatureVariant, scales: usize, t: usize) -> FeatureLayout {
    let mut descriptors = Vec::with_capacity(feature_len(variant, scales, t));
    let dctr = dctr_classes();
    let centro = centro_classes();
    for phi_idx in 0..2u8 {
        for scale_idx in 0..scales as u8 {
            match variant {
                FeatureVariant::Gfr => {
                    // classes 0..=16 by smallest angle: theta_0, the 15
                    // mirror pairs, then theta_{16} = pi/2
                    for orient_class in 0..17u8 {
                        push_block(&mut descriptors, phi_idx, scale_idx, orient_class, &dctr, t);
                    }
                }
                FeatureVariant::GfrGsm | FeatureVariant::GfrGw => {
                    // class 0: axis orientations (25 phase classes); classes
                    // 1..=8: oblique four-orientation classes (34 each)
                    push_block(&mut descriptors, phi_idx, scale_idx, 0, &dctr, t);
                    for orient_class in 1..=8u8 {
                        push_block(&mut descriptors, phi_idx, scale_idx, orient_class, &centro, t);
                    }
                }
            }
        }
    }
    let mut bytes = Vec::with_capacity(descriptors.len() * 6 + 3);
    bytes.push(variant.id());
    bytes.push(scales as u8);
    bytes.push(t as u8);
    for d in &descriptors {
        bytes.extend_from_slice(&[
            d.phi_idx,
            d.scale_idx,
            d.orient_class,
            d.phase_class.0,
            d.phase_class.1,
            d.bin,
        ]);
    }
    let hash = fnv1a(&bytes);
    FeatureLayout { variant, scales, t, descriptors, hash }
}

fn push_block(
    out: &mut Vec<FeatureDescriptor>,
    phi_idx: u8,
    scale_idx: u8,
    orient_class: u8,
    reps: &[(u8, u8)],
    t: usize,
) {
    for &phase_class in reps {
        for bin in 0..=t as u8 {
            out.push(FeatureDescriptor { phi_idx, scale_idx, orient_class, phase_class, bin });
        }
    }
}

/// An assembled feature vector. The layout is identified by hash; the full
/// descriptor list is reproducible from [`feature_layout`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub variant: FeatureVariant,
    pub layout_hash: u64,
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

/// Everything assembly needs besides the image and the bank.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembleParams {
    /// Scale ladder; must match the bank.
    pub scales: Vec<f64>,
    /// Quantization step per scale.
    pub q: Vec<f64>,
    /// Histogram threshold T.
    pub t: usize,
    /// Target central mass for the weighted histogram's sigma.
    pub p_center: f64,
}

impl AssembleParams {
    pub fn validate(&self) -> Result<(), FeatureError> {
        if self.scales.is_empty() {
            return Err(FeatureError::BadParams("empty scale list"));
        }
        if self.q.len() != self.scales.len() {
            return Err(FeatureError::BadParams("one quantization step per scale required"));
        }
        if !self.q.iter().all(|&q| q > 0.0) {
            return Err(FeatureError::BadParams("quantization steps must be positive"));
        }
        if self.t < 1 {
            return Err(FeatureError::BadParams("threshold must be at least 1"));
        }
        if !(self.p_center > 0.0 && self.p_center < 1.0) {
            return Err(FeatureError::BadParams("p_center must lie in (0,1)"));
        }
        Ok(())
    }
}

/// Check that `bank` is the standard layout for `scales`: phase-major,
/// scale-middle, 32 ascending orientations innermost.
fn check_bank(bank: &[Kernel8], scales: &[f64]) -> Result<(), FeatureError> {
    if bank.len() != 2 * scales.len() * N_ORIENTATIONS {
        return Err(FeatureError::BankLayout);
    }
    let pi = core::f64::consts::PI;
    for (p, &phi) in PHASES.iter().enumerate() {
        for (s, &sigma) in scales.iter().enumerate() {
            for k in 0..N_ORIENTATIONS {
                let kernel = &bank[(p * scales.len() + s) * N_ORIENTATIONS + k];
                match &kernel.params {
                    KernelKind::Gabor(g)
                        if g.phi == phi
                            && g.sigma == sigma
                            && (g.theta - k as f64 * pi / 32.0).abs() < ANGLE_TOL => {}
                    _ => return Err(FeatureError::BankLayout),
                }
            }
        }
    }
    Ok(())
}

fn grid_from_subsets(
    ps: &PhaseSubsets,
    provenance: KernelKind,
    mut hist_of: impl FnMut(&[f64]) -> Result<Histogram, HistogramError>,
) -> Result<PhaseHistogramGrid, FeatureError> {
    let mut hists = Vec::with_capacity(64);
    for a in 0..8 {
        for b in 0..8 {
            hists.push(hist_of(ps.subset(a, b))?);
        }
    }
    let mut it = hists.into_iter();
    let hist: [[Histogram; 8]; 8] =
        core::array::from_fn(|_| core::array::from_fn(|_| it.next().expect("64 histograms")));
    Ok(PhaseHistogramGrid { hist, provenance })
}

/// Append one (phi, sigma) group's merged features, already ordered.
fn emit_group(values: &mut Vec<f64>, variant: FeatureVariant, grids: &[PhaseHistogramGrid]) {
    debug_assert_eq!(grids.len(), N_ORIENTATIONS);
    match variant {
        FeatureVariant::Gfr => {
            let merged: Vec<MergedSet> = grids.iter().map(merge_dctr_style).collect();
            // orientation classes ascending by smallest angle: theta_0 alone,
            // the (k, 32-k) pairs for k = 1..15, then theta_16 alone
            for h in &merged[0].hists {
                values.extend_from_slice(&h.bins);
            }
            for k in 1..16usize {
                for i in 0..merged[k].hists.len() {
                    let h = mean_histograms(&[&merged[k].hists[i], &merged[32 - k].hists[i]]);
                    values.extend_from_slice(&h.bins);
                }
            }
            for h in &merged[16].hists {
                values.extend_from_slice(&h.bins);
            }
        }
        FeatureVariant::GfrGsm | FeatureVariant::GfrGw => {
            let axis =
                merge_transpose(&merge_dctr_style(&grids[0]), &merge_dctr_style(&grids[16]))
                    .expect("axis orientations are a valid transpose pair");
            for h in &axis.hists {
                values.extend_from_slice(&h.bins);
            }
            let step1: Vec<MergedSet> = (1..16)
                .map(|k| {
                    merge_mirror_pairs(&grids[k], &grids[32 - k])
                        .expect("bank orientations are valid mirror pairs")
                })
                .collect();
            for kc in 1..=8usize {
                let set = merge_transpose(&step1[kc - 1], &step1[(16 - kc) - 1])
                    .expect("mirror classes are valid transpose pairs");
                for h in &set.hists {
                    values.extend_from_slice(&h.bins);
                }
            }
        }
    }
}

/// Assemble one variant's feature vector from an image and a standard bank.
pub fn assemble(
    variant: FeatureVariant,
    img: &SpatialImage,
    bank: &[Kernel8],
    params: &AssembleParams,
) -> Result<FeatureVector, FeatureError> {
    let mut out = match variant {
        FeatureVariant::GfrGw => assemble_multi(img, bank, params, &[], true)?,
        v => assemble_multi(img, bank, params, &[(v, params.scales.len())], false)?,
    };
    Ok(out.pop().expect("one variant requested"))
}

/// Assemble the conventional-histogram and weighted-histogram variants in one
/// pass, sharing every correlation. The first result uses `variant_conv`
/// (Gfr or GfrGsm), the second is GfrGw; `conv_scales` trims the conventional
/// variant to a prefix of the scale ladder.
pub fn assemble_joint(
    img: &SpatialImage,
    bank: &[Kernel8],
    params: &AssembleParams,
    variant_conv: FeatureVariant,
    conv_scales: usize,
) -> Result<(FeatureVector, FeatureVector), FeatureError> {
    if variant_conv == FeatureVariant::GfrGw {
        return Err(FeatureError::BadParams("joint assembly pairs a conventional variant with gw"));
    }
    if conv_scales == 0 || conv_scales > params.scales.len() {
        return Err(FeatureError::BadParams("conventional scale count out of range"));
    }
    let mut out = assemble_multi(img, bank, params, &[(variant_conv, conv_scales)], true)?;
    let gw = out.pop().expect("gw vector");
    let conv = out.pop().expect("conventional vector");
    Ok((conv, gw))
}

/// Shared extraction engine: one correlation per kernel feeding any requested
/// conventional-histogram variants plus (optionally) the weighted variant.
fn assemble_multi(
    img: &SpatialImage,
    bank: &[Kernel8],
    params: &AssembleParams,
    conv_variants: &[(FeatureVariant, usize)],
    want_gw: bool,
) -> Result<Vec<FeatureVector>, FeatureError> {
    params.validate()?;
    check_bank(bank, &params.scales)?;
    let l = params.scales.len();
    let t = params.t;
    let sigmas: Vec<f64> = if want_gw {
        params
            .q
            .iter()
            .map(|&q| sigma_from_pcenter(q, params.p_center))
            .collect::<Result<_, _>>()?
    } else {
        Vec::new()
    };

    let mut conv_values: Vec<Vec<f64>> = conv_variants
        .iter()
        .map(|&(v, ls)| Vec::with_capacity(feature_len(v, ls, t)))
        .collect();
    let mut gw_values: Vec<f64> =
        Vec::with_capacity(if want_gw { feature_len(FeatureVariant::GfrGw, l, t) } else { 0 });

    let mut subsets = PhaseSubsets {
        subsets: core::array::from_fn(|_| core::array::from_fn(|_| Vec::new())),
    };
    let mut conv_grids: Vec<PhaseHistogramGrid> = Vec::with_capacity(N_ORIENTATIONS);
    let mut gw_grids: Vec<PhaseHistogramGrid> = Vec::with_capacity(N_ORIENTATIONS);

    for p in 0..2usize {
        for s in 0..l {
            conv_grids.clear();
            gw_grids.clear();
            let q = params.q[s];
            let need_conv = conv_variants.iter().any(|&(_, ls)| s < ls);
            for k in 0..N_ORIENTATIONS {
                let kernel = &bank[(p * l + s) * N_ORIENTATIONS + k];
                let res: Residual = correlate_valid(img, kernel)?;
                phase_split_into(&res, &mut subsets);
                if need_conv {
                    conv_grids.push(grid_from_subsets(&subsets, kernel.params, |sub| {
                        hist_conventional(sub, q, t)
                    })?);
                }
                if want_gw {
                    gw_grids.push(grid_from_subsets(&subsets, kernel.params, |sub| {
                        hist_weighted(sub, q, t, sigmas[s])
                    })?);
                }
            }
            for (vi, &(v, ls)) in conv_variants.iter().enumerate() {
                if s < ls {
                    emit_group(&mut conv_values[vi], v, &conv_grids);
                }
            }
            if want_gw {
                emit_group(&mut gw_values, FeatureVariant::GfrGw, &gw_grids);
            }
        }
    }

    let mut out = Vec::new();
    for (vi, &(v, ls)) in conv_variants.iter().enumerate() {
        let values = core::mem::take(&mut conv_values[vi]);
        debug_assert_eq!(values.len(), feature_len(v, ls, t));
        out.push(FeatureVector { values, variant: v, layout_hash: feature_layout(v, ls, t).hash });
    }
    if want_gw {
        debug_assert_eq!(gw_values.len(), feature_len(FeatureVariant::GfrGw, l, t));
        out.push(FeatureVector {
            values: gw_values,
            variant: FeatureVariant::GfrGw,
            layout_hash: feature_layout(FeatureVariant::GfrGw, l, t).hash,
        });
    }
    Ok(out)
}
