//! Quantized residual histograms: the conventional hard-assignment form and
//! the Gaussian-integral weighted form, plus the sigma-selection rule that
//! ties the Gaussian width to a target central mass.
//!
//! Both histogram kinds use absolute values with T+1 bins 0..=T. The weighted
//! histogram spreads each sample over the signed centroids -T..=T by the mass
//! a Gaussian centered on the sample puts into each centroid's interval
//! (outer intervals half-infinite), then folds negative centroids onto
//! positive ones; the interval partition makes every sample contribute total
//! mass one, so normalized bins sum to one by construction.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{erf, erf_block, normal_cdf, ERF_BLOCK};

/// Default threshold T.
pub const DEFAULT_THRESHOLD: usize = 4;
/// Default target central mass for sigma selection.
pub const DEFAULT_P_CENTER: f64 = 0.75;
/// The standard scale ladder the default quantization schedules pair with.
pub const DEFAULT_SCALES: [f64; 6] = [0.5, 0.75, 1.0, 1.25, 1.5, 1.75];

const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, PartialEq)]
pub enum HistogramError {
    EmptySubset,
    NonpositiveSigma(f64),
    InvalidPCenter(f64),
}

impl core::fmt::Display for HistogramError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            HistogramError::EmptySubset => write!(f, "histogram of an empty subset"),
            HistogramError::NonpositiveSigma(s) => write!(f, "sigma_h must be positive, got {s}"),
            HistogramError::InvalidPCenter(p) => {
                write!(f, "p_center must lie strictly between 0 and 1, got {p}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for HistogramError {}

/// A normalized histogram over bins 0..=T.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// T+1 nonnegative reals summing to one.
    pub bins: Vec<f64>,
    /// Total mass the bins were divided by (the subset size).
    pub normalization: f64,
}

/// Everything the weighted histogram needs, bundled for feature assembly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightParams {
    pub q: f64,
    pub t: usize,
    pub sigma_h: f64,
    pub p_center: f64,
}

impl WeightParams {
    /// Derive sigma_h from the target central mass via [`sigma_from_pcenter`].
    pub fn from_pcenter(q: f64, t: usize, p_center: f64) -> Result<WeightParams, HistogramError> {
        Ok(WeightParams { q, t, sigma_h: sigma_from_pcenter(q, p_center)?, p_center })
    }
}

/// Default quantization-step schedule for a JPEG quality factor, aligned with
/// [`DEFAULT_SCALES`]. Only the two calibrated qualities are known; anything
/// else needs an explicit schedule.
pub fn default_q_schedule(quality: u8) -> Option<[f64; 6]> {
    match quality {
        75 => Some([2.0, 4.0, 6.0, 8.0, 10.0, 12.0]),
        95 => Some([0.5, 1.0, 1.5, 2.0, 2.5, 3.0]),
        _ => None,
    }
}

/// Hard quantizer: trunc_T(round(|u|/q)), rounding half away from zero.
#[inline]
pub fn quantize_trunc(u: f64, q: f64, t: usize) -> usize {
    debug_assert!(q > 0.0 && t >= 1);
    let r = libm::round(libm::fabs(u) / q);
    if r >= t as f64 {
        t
    } else {
        r as usize
    }
}

/// Conventional normalized histogram of hard-quantized magnitudes.
pub fn hist_conventional(subset: &[f64], q: f64, t: usize) -> Result<Histogram, HistogramError> {
    if subset.is_empty() {
        return Err(HistogramError::EmptySubset);
    }
    let mut bins = vec![0.0f64; t + 1];
    for &u in subset {
        bins[quantize_trunc(u, q, t)] += 1.0;
    }
    let n = subset.len() as f64;
    for b in bins.iter_mut() {
        *b /= n;
    }
    Ok(Histogram { bins, normalization: n })
}

/// Width of the centered Gaussian whose mass over (-q/2, q/2) is p_center,
/// using a two-decimal quantile grid with four-decimal probabilities: the
/// convention behind the published width tables. The grid scan picks the z
/// whose tabulated Phi(z) is closest to (1+p_center)/2, resolving ties toward
/// the larger z, and returns (q/2)/z.
pub fn sigma_from_pcenter(q: f64, p_center: f64) -> Result<f64, HistogramError> {
    if !(p_center > 0.0 && p_center < 1.0) {
        return Err(HistogramError::InvalidPCenter(p_center));
    }
    debug_assert!(q > 0.0);
    // work in units of 1e-4 so four-decimal ties compare exactly
    let target = (1.0 + p_center) / 2.0 * 1e4;
    let mut best_z = 0.01;
    let mut best_err = f64::INFINITY;
    for step in 1..=400 {
        let z = step as f64 * 0.01;
        let phi4 = libm::round(normal_cdf(z) * 1e4);
        let err = (phi4 - target).abs();
        if err <= best_err {
            best_err = err;
            best_z = z;
        }
    }
    Ok(q / 2.0 / best_z)
}

/// Per-sample Gaussian interval masses folded onto bins 0..=t, accumulated
/// unnormalized into `bins`. Generic in t; scalar erf.
fn accumulate_weighted_scalar(bins: &mut [f64], subset: &[f64], q: f64, t: usize, inv: f64) {
    for &u in subset {
        let v = libm::fabs(u);
        // ep[j] = erf at boundary +(j+0.5)q, em[j] at -(j+0.5)q
        let mut prev_p = erf((0.5 * q - v) * inv);
        let mut prev_m = erf((-0.5 * q - v) * inv);
        bins[0] += 0.5 * (prev_p - prev_m);
        for (i, b) in bins.iter_mut().enumerate().take(t).skip(1) {
            let bp = erf(((i as f64 + 0.5) * q - v) * inv);
            let bm = erf((-(i as f64 + 0.5) * q - v) * inv);
            *b += 0.5 * ((bp - prev_p) + (prev_m - bm));
            prev_p = bp;
            prev_m = bm;
        }
        bins[t] += 0.5 * ((1.0 - prev_p) + (prev_m + 1.0));
    }
}

/// T = 4 fast path: eight samples x eight interval boundaries fill one
/// erf_block so the polynomial evaluation runs on 64 independent lanes.
#[inline(always)]
fn accumulate_weighted_t4(bins: &mut [f64; 5], samples: &[f64], q: f64, inv: f64) {
    let bnd =
        [0.5 * q, -0.5 * q, 1.5 * q, -1.5 * q, 2.5 * q, -2.5 * q, 3.5 * q, -3.5 * q];
    let mut it = samples.chunks_exact(8);
    for chunk in &mut it {
        let mut t = [0.0f64; ERF_BLOCK];
        for (i, &u) in chunk.iter().enumerate() {
            let v = if u < 0.0 { -u } else { u };
            for (j, &b) in bnd.iter().enumerate() {
                t[i * 8 + j] = (b - v) * inv;
            }
        }
        erf_block(&mut t);
        for i in 0..8 {
            let e = &t[i * 8..i * 8 + 8];
            bins[0] += 0.5 * (e[0] - e[1]);
            bins[1] += 0.5 * ((e[2] - e[0]) + (e[1] - e[3]));
            bins[2] += 0.5 * ((e[4] - e[2]) + (e[3] - e[5]));
            bins[3] += 0.5 * ((e[6] - e[4]) + (e[5] - e[7]));
            bins[4] += 0.5 * ((1.0 - e[6]) + (e[7] + 1.0));
        }
    }
    accumulate_weighted_scalar(bins, it.remainder(), q, 4, inv);
}

#[cfg(all(feature = "std", target_arch = "x86_64"))]
#[target_feature(enable = "avx2,fma")]
unsafe fn accumulate_weighted_t4_avx2(bins: &mut [f64; 5], samples: &[f64], q: f64, inv: f64) {
    accumulate_weighted_t4(bins, samples, q, inv);
}

#[inline]
fn accumulate_weighted_t4_dispatch(bins: &mut [f64; 5], samples: &[f64], q: f64, inv: f64) {
    #[cfg(all(feature = "std", target_arch = "x86_64"))]
    {
        if std::arch::is_x86_feature_detected!("avx2") && std::arch::is_x86_feature_detected!("fma")
        {
            // Safety: the required CPU features were just verified.
            unsafe { accumulate_weighted_t4_avx2(bins, samples, q, inv) };
            return;
        }
    }
    accumulate_weighted_t4(bins, samples, q, inv);
}

/// Unnormalized weighted accumulation into `bins` (length t+1): each sample
/// adds its full Gaussian interval masses, so the bin total grows by one per
/// sample. Shared by the histogram and the differentiable layer.
pub(crate) fn accumulate_weighted(bins: &mut [f64], samples: &[f64], q: f64, sigma_h: f64) {
    let t = bins.len() - 1;
    let inv = FRAC_1_SQRT_2 / sigma_h;
    if t == 4 {
        let mut b5 = [0.0f64; 5];
        b5.copy_from_slice(bins);
        accumulate_weighted_t4_dispatch(&mut b5, samples, q, inv);
        bins.copy_from_slice(&b5);
    } else {
        accumulate_weighted_scalar(bins, samples, q, t, inv);
    }
}

/// Gaussian-integral weighted histogram, normalized by the subset size.
pub fn hist_weighted(
    subset: &[f64],
    q: f64,
    t: usize,
    sigma_h: f64,
) -> Result<Histogram, HistogramError> {
    if subset.is_empty() {
        return Err(HistogramError::EmptySubset);
    }
    if !(sigma_h > 0.0) {
        return Err(HistogramError::NonpositiveSigma(sigma_h));
    }
    debug_assert!(q > 0.0 && t >= 1);
    let mut bins = vec![0.0f64; t + 1];
    accumulate_weighted(&mut bins, subset, q, sigma_h);
    let n = subset.len() as f64;
    for b in bins.iter_mut() {
        *b /= n;
    }
    Ok(Histogram { bins, normalization: n })
}

#[cfg(test)]
pub(crate) fn hist_weighted_reference(
    subset: &[f64],
    q: f64,
    t: usize,
    sigma_h: f64,
) -> Histogram {
    // straight per-sample interval masses via the cdf; the oracle the fast
    // path is held to
    use crate::math::normal_mass;
    let mut bins = vec![0.0f64; t + 1];
    for &u in subset {
        for i in -(t as i64)..=(t as i64) {
            let lo = if i == -(t as i64) { f64::NEG_INFINITY } else { (i as f64 - 0.5) * q };
            let hi = if i == t as i64 { f64::INFINITY } else { (i as f64 + 0.5) * q };
            bins[i.unsigned_abs() as usize] += normal_mass(lo, hi, u, sigma_h);
        }
    }
    let n = subset.len() as f64;
    for b in bins.iter_mut() {
        *b /= n;
    }
    Histogram { bins, normalization: n }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quantizer_matches_the_worked_cases() {
        assert_eq!(quantize_trunc(0.0, 6.0, 4), 0);
        assert_eq!(quantize_trunc(-14.4, 6.0, 4), 2, "round(2.4) = 2");
        assert_eq!(quantize_trunc(100.0, 6.0, 4), 4, "saturates at T");
        // half-away rounding at the boundary
        assert_eq!(quantize_trunc(-15.0, 6.0, 4), 3, "2.5 rounds away from zero");
        assert_eq!(quantize_trunc(9.0, 6.0, 4), 2, "1.5 rounds away from zero");
    }

    #[test]
    fn conventional_histogram_counts_and_normalizes() {
        let h = hist_conventional(&[0.0; 10], 6.0, 4).unwrap();
        assert_eq!(h.bins, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let h = hist_conventional(&[6.0, -6.0], 6.0, 4).unwrap();
        assert_eq!(h.bins[1], 1.0, "sign folds into the magnitude bin");
        assert!(matches!(hist_conventional(&[], 6.0, 4), Err(HistogramError::EmptySubset)));

        // independent recount on random-ish data
        let data: Vec<f64> = (0..997).map(|i| ((i * 37 % 113) as f64 - 56.0) * 0.61).collect();
        let (q, t) = (4.0, 3);
        let h = hist_conventional(&data, q, t).unwrap();
        for r in 0..=t {
            let count = data
                .iter()
                .filter(|&&u| {
                    let m = u.abs() / q;
                    if r < t {
                        m >= r as f64 - 0.5 && m < r as f64 + 0.5
                    } else {
                        m >= r as f64 - 0.5
                    }
                })
                .count();
            let expect = count as f64 / data.len() as f64;
            assert!((h.bins[r] - expect).abs() < 1e-12, "bin {r}: {} vs {expect}", h.bins[r]);
        }
        let total: f64 = h.bins.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sigma_selection_reproduces_the_published_tables() {
        // q = 6 ladder
        for (p, expect) in
            [(0.9, 1.8182), (0.85, 2.0833), (0.8, 2.3438), (0.75, 2.6087), (0.7, 2.8846)]
        {
            let s = sigma_from_pcenter(6.0, p).unwrap();
            assert!(
                (libm::round(s * 1e4) / 1e4 - expect).abs() < 1e-9,
                "q=6 p={p}: got {s}, want {expect}"
            );
        }
        // q = 1.5 ladder
        for (p, expect) in
            [(0.9, 0.4545), (0.85, 0.5208), (0.8, 0.5859), (0.75, 0.6522), (0.7, 0.7212)]
        {
            let s = sigma_from_pcenter(1.5, p).unwrap();
            assert!(
                (libm::round(s * 1e4) / 1e4 - expect).abs() < 1e-9,
                "q=1.5 p={p}: got {s}, want {expect}"
            );
        }
        for bad in [0.0, 1.0, -0.3, 1.7] {
            assert!(matches!(
                sigma_from_pcenter(6.0, bad),
                Err(HistogramError::InvalidPCenter(_))
            ));
        }
        // the derived sigma realizes the central mass up to the z-grid
        // resolution (step 0.01 in z is worth a few 1e-3 of mass)
        for p in [0.7, 0.75, 0.8, 0.85, 0.9] {
            let s = sigma_from_pcenter(6.0, p).unwrap();
            let mass = 2.0 * normal_cdf(3.0 / s) - 1.0;
            assert!((mass - p).abs() < 5e-3, "p={p}: realized mass {mass}");
        }
    }

    #[test]
    fn weighted_histogram_matches_the_cdf_oracle() {
        let data: Vec<f64> = (0..103).map(|i| ((i * 71 % 211) as f64 - 100.0) * 0.37).collect();
        for (q, t, s) in [(6.0, 4usize, 2.6087), (1.5, 4, 0.6522), (4.0, 3, 1.9), (2.0, 6, 0.8)] {
            let fast = hist_weighted(&data, q, t, s).unwrap();
            let oracle = hist_weighted_reference(&data, q, t, s);
            let mut dev = 0.0f64;
            for (a, b) in fast.bins.iter().zip(oracle.bins.iter()) {
                dev = dev.max((a - b).abs());
            }
            assert!(dev < 1e-12, "q={q} t={t}: fast path off oracle by {dev:e}");
            let total: f64 = fast.bins.iter().sum();
            assert!((total - 1.0).abs() < 1e-9, "mass {total}");
        }
        assert!(matches!(hist_weighted(&[], 6.0, 4, 1.0), Err(HistogramError::EmptySubset)));
        assert!(matches!(
            hist_weighted(&[1.0], 6.0, 4, 0.0),
            Err(HistogramError::NonpositiveSigma(_))
        ));
    }

    #[test]
    fn tiny_sigma_degenerates_to_the_conventional_histogram() {
        let q = 6.0;
        // samples exactly at centroids, well away from interval boundaries
        let data: Vec<f64> =
            (-9..=9).flat_map(|i| core::iter::repeat(i as f64 * q).take(3)).collect();
        let w = hist_weighted(&data, q, 4, q * 1e-6).unwrap();
        let c = hist_conventional(&data, q, 4).unwrap();
        for (a, b) in w.bins.iter().zip(c.bins.iter()) {
            assert!((a - b).abs() < 1e-9, "degenerate sigma: {a} vs {b}");
        }
    }

    #[test]
    fn central_mass_hits_the_target_with_an_exact_sigma() {
        // bisect the definition itself: mass over (-q/2, q/2) = p_center
        let (q, p) = (6.0, 0.75);
        let (mut lo, mut hi) = (0.1, 50.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let mass = 2.0 * normal_cdf(q / 2.0 / mid) - 1.0;
            if mass > p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let sigma = 0.5 * (lo + hi);
        let h = hist_weighted(&[0.0], q, 4, sigma).unwrap();
        assert!((h.bins[0] - 0.75).abs() < 1e-6, "central bin {}", h.bins[0]);
    }

    #[test]
    fn weighting_separates_what_hard_binning_cannot() {
        let (q, t, s) = (6.0, 4usize, 2.6087);
        // equidistant from a centroid on opposite sides: the per-interval
        // masses mirror each other (interval j at c+d carries what interval
        // 2i-j carries at c-d), and at centroid 0 the sign-folding keeps the
        // histograms themselves identical
        use crate::math::normal_mass;
        let (c, d) = (6.0, 1.3);
        for j in -2i64..=2 {
            let lo = (j as f64 - 0.5) * q;
            let hi = (j as f64 + 0.5) * q;
            let jr = 2 - j; // reflection of centroid j about centroid 1
            let lor = (jr as f64 - 0.5) * q;
            let hir = (jr as f64 + 0.5) * q;
            let m1 = normal_mass(lo, hi, c + d, s);
            let m2 = normal_mass(lor, hir, c - d, s);
            assert!((m1 - m2).abs() < 1e-12, "interval {j} vs {jr}: {m1} vs {m2}");
        }
        let ha = hist_weighted(&[d], q, t, s).unwrap();
        let hb = hist_weighted(&[-d], q, t, s).unwrap();
        for (a, b) in ha.bins.iter().zip(hb.bins.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        // same interval, different positions: different histograms
        let hc = hist_weighted(&[6.0 + 1.3], q, t, s).unwrap();
        let hd = hist_weighted(&[6.0 + 0.4], q, t, s).unwrap();
        let l1: f64 = hc.bins.iter().zip(hd.bins.iter()).map(|(a, b)| (a - b).abs()).sum();
        assert!(l1 > 1e-3, "weighted histogram should move, L1 = {l1:e}");

        // the same perturbation is invisible to the conventional histogram
        let ca = hist_conventional(&[6.0 + 1.3], q, t).unwrap();
        let cb = hist_conventional(&[6.0 + 0.4], q, t).unwrap();
        assert_eq!(ca.bins, cb.bins);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn weighted_mass_is_conserved(
            data in prop::collection::vec(-60.0f64..60.0, 1..80),
            q in 0.5f64..8.0,
            sigma in 0.05f64..5.0,
        ) {
            let h = hist_weighted(&data, q, 4, sigma).unwrap();
            let total: f64 = h.bins.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9, "mass {total}");
            prop_assert!(h.bins.iter().all(|&b| b >= 0.0));
        }

        #[test]
        fn both_histograms_are_sign_symmetric(
            data in prop::collection::vec(-40.0f64..40.0, 1..60),
        ) {
            let neg: Vec<f64> = data.iter().map(|v| -v).collect();
            let (q, t, s) = (4.0, 4usize, 1.7391);
            let hw = hist_weighted(&data, q, t, s).unwrap();
            let hwn = hist_weighted(&neg, q, t, s).unwrap();
            for (a, b) in hw.bins.iter().zip(hwn.bins.iter()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let hc = hist_conventional(&data, q, t).unwrap();
            let hcn = hist_conventional(&neg, q, t).unwrap();
            prop_assert_eq!(hc.bins, hcn.bins);
        }

        #[test]
        fn small_in_interval_moves_only_the_weighted_histogram(
            base in -20.0f64..20.0,
            eps in 0.05f64..0.59,
        ) {
            let (q, t, s) = (6.0, 4usize, 2.6087);
            // place the sample at an interval centroid so +eps < q/10 keeps
            // it strictly inside
            let u = libm::round(base / q) * q;
            if u.abs() < 3.5 * q {
                let h0 = hist_weighted(&[u], q, t, s).unwrap();
                let h1 = hist_weighted(&[u + eps], q, t, s).unwrap();
                let l1: f64 = h0.bins.iter().zip(h1.bins.iter()).map(|(a, b)| (a - b).abs()).sum();
                prop_assert!(l1 > 0.0, "weighted histogram must respond");
                let c0 = hist_conventional(&[u], q, t).unwrap();
                let c1 = hist_conventional(&[u + eps], q, t).unwrap();
                prop_assert_eq!(c0.bins, c1.bins);
            }
        }
    }
}
