//! The Gaussian-integral histogram as a standalone differentiable kernel:
//! sign-folded forward binning over five intervals, the analytic gradient of
//! the bins with respect to the input map, and the identity-impulse kernel
//! stack used to splice a fixed filter bank into a trainable one.
//!
//! Intervals for bin i (with mirror images folded in): [0, 0.5q),
//! [(i-0.5)q, (i+0.5)q) for 1 <= i <= 3, and [3.5q, inf). The Gaussian is the
//! standard normal with width sigma_h, matching the histogram engine.

use alloc::vec::Vec;

use crate::histogram::accumulate_weighted;

/// Number of output bins.
pub const N_BINS: usize = 5;

/// Configuration of the layer: interval step and Gaussian width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerConfig {
    pub q: f64,
    pub sigma_h: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GaussintError {
    /// Upstream gradient does not have one entry per bin.
    ShapeMismatch { expected: usize, got: usize },
    /// Kernel slice index outside 0..64.
    IndexOutOfRange { k: usize },
}

impl core::fmt::Display for GaussintError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GaussintError::ShapeMismatch { expected, got } => {
                write!(f, "expected {expected} upstream gradients, got {got}")
            }
            GaussintError::IndexOutOfRange { k } => write!(f, "kernel slice {k} out of 0..64"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for GaussintError {}

/// Unnormalized sign-folded Gaussian-integral bins of a feature map:
/// B(i) = sum over elements of the Gaussian mass on I_i and its mirror.
/// The five bins of a map with n elements sum to n.
pub fn forward(feature_map: &[f64], cfg: &LayerConfig) -> [f64; N_BINS] {
    debug_assert!(cfg.q > 0.0 && cfg.sigma_h > 0.0);
    let mut bins = [0.0f64; N_BINS];
    accumulate_weighted(&mut bins, feature_map, cfg.q, cfg.sigma_h);
    bins
}

/// Analytic input gradient: for each element u,
/// dL/du = sum_i g_i * [f(b_i) - f(a_i) + f(-a_i) - f(-b_i)] / (-sqrt(2 pi) sigma_h)
/// with f(x) = exp(-(x-u)^2 / (2 sigma_h^2)) and f at infinite endpoints zero.
pub fn backward(
    feature_map: &[f64],
    upstream: &[f64],
    cfg: &LayerConfig,
) -> Result<Vec<f64>, GaussintError> {
    if upstream.len() != N_BINS {
        return Err(GaussintError::ShapeMismatch { expected: N_BINS, got: upstream.len() });
    }
    debug_assert!(cfg.q > 0.0 && cfg.sigma_h > 0.0);
    let q = cfg.q;
    let sigma = cfg.sigma_h;
    let scale = -1.0 / (libm::sqrt(2.0 * core::f64::consts::PI) * sigma);
    let inv2s2 = 1.0 / (2.0 * sigma * sigma);
    let mut grads = Vec::with_capacity(feature_map.len());
    for &u in feature_map {
        let f = |x: f64| libm::exp(-(x - u) * (x - u) * inv2s2);
        let mut g = 0.0f64;
        for (i, &gi) in upstream.iter().enumerate() {
            let a = if i == 0 { 0.0 } else { (i as f64 - 0.5) * q };
            // f(b) - f(a) + f(-a) - f(-b), infinite endpoints contribute 0
            let term = if i == N_BINS - 1 {
                -f(a) + f(-a)
            } else {
                let b = (i as f64 + 0.5) * q;
                (f(b) - f(a)) + (f(-a) - f(-b))
            };
            g += gi * term;
        }
        grads.push(g * scale);
    }
    Ok(grads)
}

/// 3x3x64 kernel stack whose slice `k` is the center impulse and every other
/// slice is zero: composing it with any filter bank reproduces the bank's
/// k-th filter, zero-padded by the impulse support.
pub fn init_identity_stack(k: usize) -> Result<[[[f64; 64]; 3]; 3], GaussintError> {
    if k >= 64 {
        return Err(GaussintError::IndexOutOfRange { k });
    }
    let mut stack = [[[0.0f64; 64]; 3]; 3];
    stack[1][1][k] = 1.0;
    Ok(stack)
}
