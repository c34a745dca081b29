//! The 8x8 2-D Gabor filter bank and the DCT basis kernels, with their exact
//! flip/transpose/rotation symmetries.
//!
//! Kernels are sampled on the centered half-integer grid {-3.5, ..., 3.5}^2 —
//! this grid is what makes the mirror and transpose relations exact on an
//! even-sized support — and every kernel is adjusted to zero mean so that
//! residuals ignore constant image offsets.

use alloc::vec::Vec;

/// Default spatial aspect ratio of the Gabor envelope.
pub const GAMMA_DEFAULT: f64 = 0.5;
/// Default ratio sigma / lambda tying wavelength to the envelope scale.
pub const SIGMA_OVER_LAMBDA: f64 = 0.56;
/// Number of orientations in the bank: theta = k*pi/32 for k = 0..31.
pub const N_ORIENTATIONS: usize = 32;
/// The two phase offsets of the bank.
pub const PHASES: [f64; 2] = [0.0, core::f64::consts::FRAC_PI_2];

/// Full parameter set of one Gabor kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaborParams {
    /// Phase offset of the cosine carrier (0 or pi/2 in the standard bank).
    pub phi: f64,
    /// Envelope scale.
    pub sigma: f64,
    /// Orientation in [0, pi).
    pub theta: f64,
    /// Envelope aspect ratio.
    pub gamma: f64,
    /// Carrier wavelength.
    pub lambda: f64,
}

impl GaborParams {
    /// Parameters with the standard aspect ratio and wavelength tied to the
    /// scale (lambda = sigma / 0.56).
    pub fn standard(phi: f64, sigma: f64, theta: f64) -> GaborParams {
        GaborParams { phi, sigma, theta, gamma: GAMMA_DEFAULT, lambda: sigma / SIGMA_OVER_LAMBDA }
    }
}

/// What a kernel is: a Gabor filter or a DCT basis function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    Gabor(GaborParams),
    Dct { i: u8, j: u8 },
}

/// An 8x8 convolution kernel with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel8 {
    /// Row-major weights; `weights[r*8 + c]` samples x = c - 3.5, y = r - 3.5.
    pub weights: [f64; 64],
    pub params: KernelKind,
}

impl Kernel8 {
    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.weights[r * 8 + c]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GaborError {
    /// Scale must be strictly positive.
    InvalidScale(f64),
    /// The bank needs at least one scale.
    EmptyScaleList,
    /// DCT mode indices must lie in 0..8.
    IndexOutOfRange { i: usize, j: usize },
}

impl core::fmt::Display for GaborError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GaborError::InvalidScale(s) => write!(f, "invalid Gabor scale {s}; must be > 0"),
            GaborError::EmptyScaleList => write!(f, "scale list must not be empty"),
            GaborError::IndexOutOfRange { i, j } => {
                write!(f, "DCT mode ({i},{j}) out of range 0..8")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for GaborError {}

/// Sample one Gabor kernel on the half-integer grid and subtract its mean.
///
/// G(x, y) = exp(-(x'^2 + gamma^2 y'^2) / (2 sigma^2)) * cos(2 pi x' / lambda + phi)
/// with x' = x cos(theta) + y sin(theta), y' = -x sin(theta) + y cos(theta).
pub fn make_gabor(p: GaborParams) -> Result<Kernel8, GaborError> {
    if !(p.sigma > 0.0) {
        return Err(GaborError::InvalidScale(p.sigma));
    }
    let (sin_t, cos_t) = (libm::sin(p.theta), libm::cos(p.theta));
    let inv_2s2 = 1.0 / (2.0 * p.sigma * p.sigma);
    let carrier = core::f64::consts::TAU / p.lambda;
    let mut weights = [0.0f64; 64];
    for r in 0..8 {
        let y = r as f64 - 3.5;
        for c in 0..8 {
            let x = c as f64 - 3.5;
            let xp = x * cos_t + y * sin_t;
            let yp = -x * sin_t + y * cos_t;
            let env = libm::exp(-(xp * xp + p.gamma * p.gamma * yp * yp) * inv_2s2);
            weights[r * 8 + c] = env * libm::cos(carrier * xp + p.phi);
        }
    }
    let mean = weights.iter().sum::<f64>() / 64.0;
    for w in weights.iter_mut() {
        *w -= mean;
    }
    Ok(Kernel8 { weights, params: KernelKind::Gabor(p) })
}

/// Build the full bank over the given scales: both phases, 32 orientations.
/// Ordering is phase-major, then scale, then orientation, so the kernel at
/// (phase p, scale s, orientation k) sits at index (p*|scales| + s)*32 + k.
pub fn make_bank(scales: &[f64]) -> Result<Vec<Kernel8>, GaborError> {
    if scales.is_empty() {
        return Err(GaborError::EmptyScaleList);
    }
    let mut bank = Vec::with_capacity(2 * scales.len() * N_ORIENTATIONS);
    for &phi in PHASES.iter() {
        for &sigma in scales {
            for k in 0..N_ORIENTATIONS {
                let theta = k as f64 * core::f64::consts::PI / N_ORIENTATIONS as f64;
                bank.push(make_gabor(GaborParams::standard(phi, sigma, theta))?);
            }
        }
    }
    Ok(bank)
}

/// Orthonormal JPEG DCT basis kernel B^{i,j}:
/// B[x][y] = (w_i w_j / 4) cos(pi i (2x+1)/16) cos(pi j (2y+1)/16), w_0 = 1/sqrt(2).
pub fn dct_basis(i: usize, j: usize) -> Result<Kernel8, GaborError> {
    if i >= 8 || j >= 8 {
        return Err(GaborError::IndexOutOfRange { i, j });
    }
    let w = |m: usize| if m == 0 { 1.0 / core::f64::consts::SQRT_2 } else { 1.0 };
    let mut weights = [0.0f64; 64];
    for x in 0..8 {
        for y in 0..8 {
            weights[x * 8 + y] = w(i) * w(j) / 4.0
                * libm::cos(core::f64::consts::PI * i as f64 * (2.0 * x as f64 + 1.0) / 16.0)
                * libm::cos(core::f64::consts::PI * j as f64 * (2.0 * y as f64 + 1.0) / 16.0);
        }
    }
    Ok(Kernel8 { weights, params: KernelKind::Dct { i: i as u8, j: j as u8 } })
}

// --- symmetry predicates (exposed so the verification command and the test
// --- suite share one implementation) ---

fn max_abs_diff(a: &[f64; 64], b: &[f64; 64]) -> f64 {
    let mut m = 0.0f64;
    for i in 0..64 {
        let d = (a[i] - b[i]).abs();
        if d > m {
            m = d;
        }
    }
    m
}

/// weights with columns reversed (x -> -x).
pub fn fliplr(w: &[f64; 64]) -> [f64; 64] {
    let mut out = [0.0f64; 64];
    for r in 0..8 {
        for c in 0..8 {
            out[r * 8 + c] = w[r * 8 + (7 - c)];
        }
    }
    out
}

/// weights with rows reversed (y -> -y).
pub fn flipud(w: &[f64; 64]) -> [f64; 64] {
    let mut out = [0.0f64; 64];
    for r in 0..8 {
        out[r * 8..r * 8 + 8].copy_from_slice(&w[(7 - r) * 8..(7 - r) * 8 + 8]);
    }
    out
}

/// weights rotated by 180 degrees.
pub fn rot180(w: &[f64; 64]) -> [f64; 64] {
    let mut out = [0.0f64; 64];
    for i in 0..64 {
        out[i] = w[63 - i];
    }
    out
}

/// weights transposed.
pub fn transpose(w: &[f64; 64]) -> [f64; 64] {
    let mut out = [0.0f64; 64];
    for r in 0..8 {
        for c in 0..8 {
            out[r * 8 + c] = w[c * 8 + r];
        }
    }
    out
}

/// Largest deviation from `a == sign * op(b)`.
pub fn symmetry_residual(a: &Kernel8, b: &Kernel8, op: fn(&[f64; 64]) -> [f64; 64], sign: f64) -> f64 {
    let mut t = op(&b.weights);
    for v in t.iter_mut() {
        *v *= sign;
    }
    max_abs_diff(&a.weights, &t)
}
