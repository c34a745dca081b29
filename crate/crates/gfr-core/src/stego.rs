//! Desk-scale embedding simulator: seeded random ±1 perturbation of nonzero
//! AC coefficients at a target bpnzac rate.
//!
//! This mimics the change profile of adaptive JPEG embedders closely enough
//! to give a detector a learnable signal. It is deliberately NOT a
//! security-faithful scheme: no cost model, no coding, and coefficients at
//! ±1 may flip to zero.

use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::jpeg::QuantizedJpeg;

/// Payload description for [`embed_simulated`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbedSpec {
    /// Bits per nonzero AC coefficient, in [0, 1].
    pub rate_bpnzac: f64,
    pub seed: u64,
}

/// Count the nonzero AC coefficients of every block.
pub fn count_nonzero_ac(j: &QuantizedJpeg) -> usize {
    j.coeffs.iter().map(|block| block[1..].iter().filter(|&&c| c != 0).count()).sum()
}

/// Perturb round(rate * n) uniformly selected nonzero AC coefficients by ±1
/// (equiprobable, seeded). DC coefficients are never touched; the cover is
/// left unmodified.
pub fn embed_simulated(j: &QuantizedJpeg, spec: &EmbedSpec) -> QuantizedJpeg {
    assert!(
        (0.0..=1.0).contains(&spec.rate_bpnzac),
        "embedding rate must lie in [0, 1], got {}",
        spec.rate_bpnzac
    );
    let mut out = j.clone();
    // flat positions of candidate coefficients: block * 64 + index, index > 0
    let candidates: Vec<u32> = j
        .coeffs
        .iter()
        .enumerate()
        .flat_map(|(bi, block)| {
            block
                .iter()
                .enumerate()
                .skip(1)
                .filter(|(_, &c)| c != 0)
                .map(move |(ci, _)| (bi * 64 + ci) as u32)
        })
        .collect();
    let n_changes = libm::round(spec.rate_bpnzac * candidates.len() as f64) as usize;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    for pick in sample(&mut rng, candidates.len(), n_changes) {
        let flat = candidates[pick] as usize;
        let delta: i16 = if rng.gen::<bool>() { 1 } else { -1 };
        out.coeffs[flat / 64][flat % 64] += delta;
    }
    out
}
