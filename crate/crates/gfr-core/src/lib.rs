//! Phase-aware Gabor-residual features for JPEG steganalysis.
//!
//! The pipeline: a baseline JPEG is parsed to quantized DCT coefficients
//! ([`jpeg`]), decompressed to an unrounded real-valued plane, filtered with
//! an 8×8 Gabor bank ([`gabor`]), and the residuals are split by JPEG phase
//! ([`residual`]) and condensed into quantized histograms ([`histogram`]).
//! Symmetry-based merging ([`features`]) assembles the final feature vector
//! in one of three variants (`Gfr`, `GfrGsm`, `GfrGw`). An FLD ensemble
//! ([`ensemble`]), a ±1 embedding simulator ([`stego`]), and a differentiable
//! Gaussian-integral binning kernel ([`gaussint`]) round out the toolkit.
//!
//! The crate is `no_std`-compatible (requires `alloc`); all I/O lives in the
//! companion `gfr-tools` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod ensemble;
pub mod features;
pub mod gabor;
pub mod gaussint;
pub mod histogram;
pub mod jpeg;
pub mod math;
pub mod residual;
pub mod stego;
