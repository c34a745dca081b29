//! FLD ensemble over random feature subspaces: each base learner is a
//! regularized Fisher linear discriminant trained on a bootstrap sample in a
//! random `d_sub`-dimensional subspace, the ensemble decides by majority vote,
//! and both `d_sub` and the learner count are picked by out-of-bag error
//! minimization. Evaluation reports the minimal total error probability under
//! equal priors, `P_E = min (P_FA + P_MD) / 2`, over a threshold sweep of the
//! vote counts, averaged over random half/half corpus splits.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Hard cap of the subspace-dimension ladder.
const D_SUB_CAP: usize = 1000;
/// First rung of the subspace-dimension ladder (doubling upward).
const D_SUB_START: usize = 100;
/// Minimum out-of-bag gain for climbing to a larger subspace dimension.
const LADDER_TOL: f64 = 1e-3;
/// Most base learners a single ensemble will train.
const MAX_LEARNERS: usize = 100;
/// Learners without out-of-bag improvement before training stops.
const PATIENCE: usize = 5;

/// The two decisions of the detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Cover,
    Stego,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnsembleError {
    /// A feature row does not match the expected width.
    DimensionMismatch { expected: usize, got: usize },
    /// A class has too few rows to train or split.
    DegenerateClass { label: Class, rows: usize },
    /// An error-rate evaluation needs samples from both classes.
    SingleClassInput,
}

impl core::fmt::Display for EnsembleError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EnsembleError::DimensionMismatch { expected, got } => {
                write!(f, "feature row has width {got}, expected {expected}")
            }
            EnsembleError::DegenerateClass { label, rows } => {
                write!(f, "class {label:?} has only {rows} rows")
            }
            EnsembleError::SingleClassInput => write!(f, "both classes must be present"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EnsembleError {}

/// One base learner: a Fisher discriminant on a fixed feature subset.
/// Votes stego when the projection exceeds its threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct FldBase {
    /// Sorted, duplicate-free indices into the full feature vector.
    pub indices: Vec<u32>,
    /// Discriminant weights, one per index.
    pub weights: Vec<f64>,
    /// Decision threshold: the midpoint of the projected class means.
    pub threshold: f64,
}

impl FldBase {
    /// Projection of a full-width feature row onto this learner's subspace.
    pub fn project(&self, row: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(self.weights.iter())
            .map(|(&i, &w)| row[i as usize] * w)
            .sum()
    }

    fn vote(&self, row: &[f64]) -> bool {
        self.project(row) > self.threshold
    }
}

/// A trained majority-vote ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    pub bases: Vec<FldBase>,
    /// Subspace dimension shared by every base learner.
    pub d_sub: usize,
    /// Number of base learners (always `bases.len()`).
    pub n_learners: usize,
    /// Seed the training run was started from.
    pub seed: u64,
    /// Hash of the feature layout the model expects; 0 when unspecified.
    pub layout_hash: u64,
    /// Full feature width the model was trained on.
    pub dim: usize,
    /// Out-of-bag error estimate of the selected configuration.
    pub oob_error: f64,
}

impl EnsembleModel {
    /// Tags the model with the layout hash of the feature format it expects.
    pub fn with_layout_hash(mut self, layout_hash: u64) -> EnsembleModel {
        self.layout_hash = layout_hash;
        self
    }
}

/// Per-split error rates of a half/half evaluation protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitEvaluation {
    /// One P_E per random split.
    pub per_split: Vec<f64>,
    /// Their arithmetic mean.
    pub mean: f64,
}

/// Four-way accumulated dot product; both slices must have equal length.
#[inline(always)]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    let (mut s0, mut s1, mut s2, mut s3) = (0.0f64, 0.0, 0.0, 0.0);
    let mut i = 0;
    while i + 4 <= n {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
        i += 4;
    }
    let mut s = (s0 + s2) + (s1 + s3);
    while i < n {
        s += a[i] * b[i];
        i += 1;
    }
    s
}

/// Adds the outer product x x^T to the upper triangle of `s` (row-major d x d).
#[inline(always)]
fn scatter_row_body(s: &mut [f64], x: &[f64]) {
    let d = x.len();
    for i in 0..d {
        let xi = x[i];
        let row = &mut s[i * d + i..(i + 1) * d];
        for (sv, &xv) in row.iter_mut().zip(&x[i..]) {
            *sv += xi * xv;
        }
    }
}

#[cfg(all(feature = "std", target_arch = "x86_64"))]
#[target_feature(enable = "avx2,fma")]
unsafe fn scatter_row_avx2(s: &mut [f64], x: &[f64]) {
    scatter_row_body(s, x);
}

#[inline]
fn scatter_row(s: &mut [f64], x: &[f64]) {
    #[cfg(all(feature = "std", target_arch = "x86_64"))]
    {
        if std::arch::is_x86_feature_detected!("avx2") && std::arch::is_x86_feature_detected!("fma")
        {
            // Safety: the required CPU features were just verified.
            unsafe { scatter_row_avx2(s, x) };
            return;
        }
    }
    scatter_row_body(s, x);
}

/// In-place Cholesky factorization of the upper-triangle-filled symmetric
/// matrix `a` followed by the two triangular solves of `a w = b` (result in
/// `b`). Returns false when the matrix is not positive definite.
fn cholesky_solve(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    // factor into the lower triangle, reading the original upper triangle
    for j in 0..n {
        for i in j..n {
            // original symmetric entry (i, j) lives at the upper slot (j, i)
            let mut v = a[j * n + i] - dot(&a[i * n..i * n + j], &a[j * n..j * n + j]);
            if i == j {
                if v <= 0.0 || !v.is_finite() {
                    return false;
                }
                v = libm::sqrt(v);
            } else {
                v /= a[j * n + j];
            }
            a[i * n + j] = v;
        }
    }
    // L z = b
    for i in 0..n {
        let s = dot(&a[i * n..i * n + i], &b[..i]);
        b[i] = (b[i] - s) / a[i * n + i];
    }
    // L^T w = z
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    true
}

fn check_matrix<R: AsRef<[f64]>>(
    rows: &[R],
    label: Class,
    expected: usize,
) -> Result<(), EnsembleError> {
    if rows.len() < 2 {
        return Err(EnsembleError::DegenerateClass { label, rows: rows.len() });
    }
    for r in rows {
        let got = r.as_ref().len();
        if got != expected {
            return Err(EnsembleError::DimensionMismatch { expected, got });
        }
    }
    Ok(())
}

/// The subspace-dimension ladder: powers-of-two steps from 100 up to
/// min(1000, d/2), the cap itself always included.
fn d_sub_ladder(d: usize) -> Vec<usize> {
    let cap = D_SUB_CAP.min((d / 2).max(1));
    let mut ladder = Vec::new();
    let mut v = D_SUB_START;
    while v < cap {
        ladder.push(v);
        v *= 2;
    }
    ladder.push(cap);
    ladder
}

struct Rung {
    bases: Vec<FldBase>,
    oob: f64,
}

/// Out-of-bag majority-vote error, averaged over the two classes. Samples a
/// class has never left out vote for nothing; a class with no out-of-bag
/// coverage at all contributes the chance rate.
fn oob_error(stego_votes: &[u32], seen: &[u32], is_stego: bool) -> f64 {
    let mut wrong = 0usize;
    let mut covered = 0usize;
    for (&sv, &n) in stego_votes.iter().zip(seen.iter()) {
        if n == 0 {
            continue;
        }
        covered += 1;
        let said_stego = 2 * sv > n;
        if said_stego != is_stego {
            wrong += 1;
        }
    }
    if covered == 0 {
        0.5
    } else {
        wrong as f64 / covered as f64
    }
}

fn train_rung<R: AsRef<[f64]>>(
    cover: &[R],
    stego: &[R],
    d: usize,
    d_sub: usize,
    rng: &mut ChaCha12Rng,
) -> Rung {
    let nc = cover.len();
    let ns = stego.len();
    let mut bases: Vec<FldBase> = Vec::new();
    let mut sv_c = vec![0u32; nc];
    let mut seen_c = vec![0u32; nc];
    let mut sv_s = vec![0u32; ns];
    let mut seen_s = vec![0u32; ns];
    let mut scatter = vec![0.0f64; d_sub * d_sub];
    let mut mu_c = vec![0.0f64; d_sub];
    let mut mu_s = vec![0.0f64; d_sub];
    let mut centered = vec![0.0f64; d_sub];
    let mut cnt_c = vec![0u32; nc];
    let mut cnt_s = vec![0u32; ns];

    let mut best_err = f64::INFINITY;
    let mut best_len = 0usize;
    let mut stale = 0usize;

    for _ in 0..MAX_LEARNERS {
        let mut idx = rand::seq::index::sample(rng, d, d_sub).into_vec();
        idx.sort_unstable();

        // Classes of equal size are bagged pairwise — one bootstrap shared by
        // both, so a pair's two rows are jointly in-bag or out-of-bag and the
        // out-of-bag estimate is never contaminated by a row's counterpart.
        cnt_c.iter_mut().for_each(|c| *c = 0);
        for _ in 0..nc {
            cnt_c[rng.gen_range(0..nc)] += 1;
        }
        if nc == ns {
            cnt_s.copy_from_slice(&cnt_c);
        } else {
            cnt_s.iter_mut().for_each(|c| *c = 0);
            for _ in 0..ns {
                cnt_s[rng.gen_range(0..ns)] += 1;
            }
        }

        // bootstrap class means over the subspace
        for (rows, cnt, mu, n) in
            [(cover, &cnt_c, &mut mu_c, nc), (stego, &cnt_s, &mut mu_s, ns)]
        {
            mu.iter_mut().for_each(|m| *m = 0.0);
            for (row, &c) in rows.iter().zip(cnt.iter()) {
                if c == 0 {
                    continue;
                }
                let row = row.as_ref();
                let cf = c as f64;
                for (m, &i) in mu.iter_mut().zip(idx.iter()) {
                    *m += cf * row[i];
                }
            }
            mu.iter_mut().for_each(|m| *m /= n as f64);
        }

        // pooled within-class scatter; a row drawn c times enters as
        // sqrt(c) * (x - mu), since c * v v^T = (sqrt(c) v)(sqrt(c) v)^T
        scatter.iter_mut().for_each(|v| *v = 0.0);
        for (rows, cnt, mu) in [(cover, &cnt_c, &mu_c), (stego, &cnt_s, &mu_s)] {
            for (row, &c) in rows.iter().zip(cnt.iter()) {
                if c == 0 {
                    continue;
                }
                let row = row.as_ref();
                let sc = libm::sqrt(c as f64);
                for ((v, &i), &m) in centered.iter_mut().zip(idx.iter()).zip(mu.iter()) {
                    *v = sc * (row[i] - m);
                }
                scatter_row(&mut scatter, &centered);
            }
        }

        // ridge-regularized Fisher solve: (S_W + eps I) w = mu_s - mu_c
        let trace: f64 = (0..d_sub).map(|i| scatter[i * d_sub + i]).sum();
        let eps = 1e-10 * trace / d_sub as f64;
        let mut w: Vec<f64> = mu_s.iter().zip(mu_c.iter()).map(|(s, c)| s - c).collect();
        let solved = if eps > 0.0 {
            for i in 0..d_sub {
                scatter[i * d_sub + i] += eps;
            }
            cholesky_solve(&mut scatter, &mut w, d_sub)
        } else {
            false
        };
        if !solved {
            // zero or indefinite scatter: fall back to the mean difference
            w = mu_s.iter().zip(mu_c.iter()).map(|(s, c)| s - c).collect();
        }
        let threshold = 0.5
            * (dot(&w, &mu_c) + dot(&w, &mu_s));

        let base = FldBase {
            indices: idx.iter().map(|&i| i as u32).collect(),
            weights: w,
            threshold,
        };

        // out-of-bag votes from this learner
        for (rows, cnt, sv, seen) in [
            (cover, &cnt_c, &mut sv_c, &mut seen_c),
            (stego, &cnt_s, &mut sv_s, &mut seen_s),
        ] {
            for (i, (row, &c)) in rows.iter().zip(cnt.iter()).enumerate() {
                if c > 0 {
                    continue;
                }
                seen[i] += 1;
                if base.vote(row.as_ref()) {
                    sv[i] += 1;
                }
            }
        }
        bases.push(base);

        let err = 0.5
            * (oob_error(&sv_c, &seen_c, false) + oob_error(&sv_s, &seen_s, true));
        if err < best_err {
            best_err = err;
            best_len = bases.len();
            stale = 0;
        } else {
            stale += 1;
            if stale >= PATIENCE {
                break;
            }
        }
    }

    bases.truncate(best_len);
    Rung { bases, oob: best_err }
}

/// Trains a majority-vote FLD ensemble on two labeled feature matrices.
///
/// Walks the subspace-dimension ladder, training one bagged ensemble per
/// rung (each base learner on its own bootstrap sample and random feature
/// subset), and keeps the rung with the lowest out-of-bag error, stopping
/// as soon as a larger dimension brings no meaningful gain. Within a rung,
/// the learner count is the out-of-bag argmin, with early stopping.
/// Equal-size classes are treated as aligned pairs and bagged jointly.
pub fn train<R: AsRef<[f64]>>(
    cover: &[R],
    stego: &[R],
    seed: u64,
) -> Result<EnsembleModel, EnsembleError> {
    let d = cover.first().map_or(0, |r| r.as_ref().len());
    if d == 0 {
        return Err(EnsembleError::DimensionMismatch { expected: 1, got: 0 });
    }
    check_matrix(cover, Class::Cover, d)?;
    check_matrix(stego, Class::Stego, d)?;

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut best: Option<(f64, usize, Vec<FldBase>)> = None;
    for &d_sub in d_sub_ladder(d).iter() {
        let rung = train_rung(cover, stego, d, d_sub, &mut rng);
        let improved = match &best {
            None => true,
            Some((err, _, _)) => rung.oob < err - LADDER_TOL,
        };
        if improved {
            best = Some((rung.oob, d_sub, rung.bases));
        } else {
            break;
        }
    }
    let (oob_error, d_sub, bases) = best.expect("ladder is never empty");
    Ok(EnsembleModel {
        n_learners: bases.len(),
        bases,
        d_sub,
        seed,
        layout_hash: 0,
        dim: d,
        oob_error,
    })
}

/// Number of base learners voting stego on one feature row.
pub fn votes(model: &EnsembleModel, row: &[f64]) -> Result<usize, EnsembleError> {
    if row.len() != model.dim {
        return Err(EnsembleError::DimensionMismatch { expected: model.dim, got: row.len() });
    }
    Ok(model.bases.iter().filter(|b| b.vote(row)).count())
}

/// Majority-vote decision; ties go to cover.
pub fn predict(model: &EnsembleModel, row: &[f64]) -> Result<Class, EnsembleError> {
    let v = votes(model, row)?;
    Ok(if 2 * v > model.bases.len() { Class::Stego } else { Class::Cover })
}

/// Minimal total error probability under equal priors over a threshold sweep:
/// P_E = min over thresholds of (P_FA + P_MD) / 2, deciding stego above the
/// threshold. The sweep includes the all-cover and all-stego decisions, so
/// the result never exceeds 1/2.
pub fn compute_pe(cover_scores: &[f64], stego_scores: &[f64]) -> Result<f64, EnsembleError> {
    if cover_scores.is_empty() || stego_scores.is_empty() {
        return Err(EnsembleError::SingleClassInput);
    }
    let nc = cover_scores.len() as f64;
    let ns = stego_scores.len() as f64;
    let mut best = f64::INFINITY;
    let mut consider = |t: f64| {
        let fa = cover_scores.iter().filter(|&&s| s > t).count() as f64 / nc;
        let md = stego_scores.iter().filter(|&&s| s <= t).count() as f64 / ns;
        let pe = 0.5 * (fa + md);
        if pe < best {
            best = pe;
        }
    };
    consider(f64::NEG_INFINITY);
    for &s in cover_scores.iter().chain(stego_scores.iter()) {
        consider(s);
    }
    Ok(best)
}

/// Ten-style evaluation protocol: for each of `n_splits` random half/half
/// splits of each class, trains on one half and reports the vote-count P_E
/// on the other. Needs at least four rows per class.
pub fn evaluate_splits<R: AsRef<[f64]>>(
    cover: &[R],
    stego: &[R],
    n_splits: usize,
    seed: u64,
) -> Result<SplitEvaluation, EnsembleError> {
    let d = cover.first().map_or(0, |r| r.as_ref().len());
    if d == 0 {
        return Err(EnsembleError::DimensionMismatch { expected: 1, got: 0 });
    }
    for (rows, label) in [(cover, Class::Cover), (stego, Class::Stego)] {
        if rows.len() < 4 {
            return Err(EnsembleError::DegenerateClass { label, rows: rows.len() });
        }
    }
    check_matrix(cover, Class::Cover, d)?;
    check_matrix(stego, Class::Stego, d)?;

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut per_split = Vec::with_capacity(n_splits);
    for _ in 0..n_splits {
        let mut split_class = |n: usize| -> (Vec<usize>, Vec<usize>) {
            let mut order: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                order.swap(i, rng.gen_range(0..=i));
            }
            let test = order.split_off(n / 2);
            (order, test)
        };
        let (train_c, test_c) = split_class(cover.len());
        let (train_s, test_s) = split_class(stego.len());
        let train_seed = rng.gen::<u64>();

        let pick = |rows: &[R], ids: &[usize]| -> Vec<Vec<f64>> {
            ids.iter().map(|&i| rows[i].as_ref().to_vec()).collect()
        };
        let model = train(&pick(cover, &train_c), &pick(stego, &train_s), train_seed)?;

        let score = |rows: &[R], ids: &[usize]| -> Result<Vec<f64>, EnsembleError> {
            ids.iter()
                .map(|&i| votes(&model, rows[i].as_ref()).map(|v| v as f64))
                .collect()
        };
        per_split.push(compute_pe(&score(cover, &test_c)?, &score(stego, &test_s)?)?);
    }
    let mean = per_split.iter().sum::<f64>() / n_splits.max(1) as f64;
    Ok(SplitEvaluation { per_split, mean })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Deterministic standard-normal sampler (Box-Muller over an LCG).
    struct Normal {
        state: u64,
    }

    impl Normal {
        fn new(seed: u64) -> Normal {
            Normal { state: seed | 1 }
        }

        fn unit(&mut self) -> f64 {
            self.state = self
                .state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((self.state >> 11) as f64 + 0.5) / (1u64 << 53) as f64
        }

        fn gauss(&mut self) -> f64 {
            let u = self.unit();
            let v = self.unit();
            libm::sqrt(-2.0 * libm::log(u)) * libm::cos(2.0 * core::f64::consts::PI * v)
        }

        fn cloud(&mut self, n: usize, dim: usize, shift: f64) -> Vec<Vec<f64>> {
            (0..n)
                .map(|_| (0..dim).map(|_| self.gauss() + shift).collect())
                .collect()
        }
    }

    fn mean_row(rows: &[Vec<f64>]) -> Vec<f64> {
        let dim = rows[0].len();
        let mut m = vec![0.0; dim];
        for r in rows {
            for (mi, v) in m.iter_mut().zip(r.iter()) {
                *mi += v;
            }
        }
        m.iter_mut().for_each(|v| *v /= rows.len() as f64);
        m
    }

    #[test]
    fn separated_clouds_train_to_low_oob_error() {
        let mut g = Normal::new(11);
        let dim = 100;
        // per-coordinate shift 0.6 puts the class means 6 sigma apart
        let cover = g.cloud(200, dim, 0.0);
        let stego = g.cloud(200, dim, 0.6);
        let model = train(&cover, &stego, 5).unwrap();
        assert!(model.oob_error < 0.05, "out-of-bag error {}", model.oob_error);
        assert_eq!(model.d_sub, 50, "ladder cap is d/2 for dim {dim}");
        assert_eq!(model.n_learners, model.bases.len());
        assert!(model.n_learners >= 1);
        for base in &model.bases {
            assert_eq!(base.indices.len(), model.d_sub);
            assert_eq!(base.weights.len(), model.d_sub);
            let mut prev = None;
            for &i in &base.indices {
                assert!((i as usize) < dim, "index {i} out of range");
                assert!(prev.map_or(true, |p| p < i), "indices not strictly sorted");
                prev = Some(i);
            }
        }
    }

    #[test]
    fn identical_classes_hover_at_chance() {
        let mut g = Normal::new(23);
        let rows = g.cloud(100, 60, 0.0);
        let model = train(&rows, &rows, 1).unwrap();
        assert!(
            (model.oob_error - 0.5).abs() <= 0.05,
            "indistinguishable classes gave out-of-bag error {}",
            model.oob_error
        );
    }

    #[test]
    fn fixed_seed_reproduces_the_model() {
        let mut g = Normal::new(31);
        let cover = g.cloud(60, 40, 0.0);
        let stego = g.cloud(60, 40, 0.5);
        let a = train(&cover, &stego, 7).unwrap();
        let b = train(&cover, &stego, 7).unwrap();
        assert_eq!(a, b, "same seed must reproduce the model exactly");
        let c = train(&cover, &stego, 8).unwrap();
        assert_ne!(a, c, "a different seed should change the sampled learners");
        assert_eq!(a.with_layout_hash(77).layout_hash, 77);
    }

    #[test]
    fn centroids_classify_correctly_and_votes_decompose() {
        let mut g = Normal::new(47);
        let cover = g.cloud(150, 80, 0.0);
        let stego = g.cloud(150, 80, 0.7);
        let model = train(&cover, &stego, 2).unwrap();
        let mc = mean_row(&cover);
        let ms = mean_row(&stego);
        assert_eq!(predict(&model, &mc).unwrap(), Class::Cover);
        assert_eq!(predict(&model, &ms).unwrap(), Class::Stego);

        // the vote tally is exactly the per-base recount
        for row in [&mc, &ms] {
            let manual = model
                .bases
                .iter()
                .filter(|b| b.project(row) > b.threshold)
                .count();
            assert_eq!(votes(&model, row).unwrap(), manual);
        }
        assert!(matches!(
            predict(&model, &mc[..79]),
            Err(EnsembleError::DimensionMismatch { expected: 80, got: 79 })
        ));
    }

    #[test]
    fn error_probability_sweep_handles_the_boundary_cases() {
        // hand-built four-sample case: any threshold in (0.2, 0.8) is perfect
        let pe = compute_pe(&[0.1, 0.2], &[0.8, 0.9]).unwrap();
        assert_eq!(pe, 0.0, "separated scores must give zero error");

        // anti-correlated scores: the trivial decisions cap the sweep at 1/2
        let pe = compute_pe(&[1.0, 2.0], &[0.1, 0.2]).unwrap();
        assert_eq!(pe, 0.5, "reversed scores fall back to a trivial decision");

        // same distribution on both sides hovers near chance
        let mut g = Normal::new(3);
        let a: Vec<f64> = (0..400).map(|_| g.gauss()).collect();
        let b: Vec<f64> = (0..400).map(|_| g.gauss()).collect();
        let pe = compute_pe(&a, &b).unwrap();
        assert!((0.4..=0.5).contains(&pe), "chance-level scores gave {pe}");

        assert!(matches!(compute_pe(&[], &[1.0]), Err(EnsembleError::SingleClassInput)));
        assert!(matches!(compute_pe(&[1.0], &[]), Err(EnsembleError::SingleClassInput)));

        // bounds hold for arbitrary score sets
        for trial in 0..50 {
            let mut g = Normal::new(100 + trial);
            let n = 1 + (trial as usize % 7);
            let a: Vec<f64> = (0..n).map(|_| g.gauss() * 3.0).collect();
            let b: Vec<f64> = (0..n + 2).map(|_| g.gauss() * 0.3).collect();
            let pe = compute_pe(&a, &b).unwrap();
            assert!((0.0..=0.5).contains(&pe), "trial {trial}: P_E {pe} out of bounds");
        }
    }

    #[test]
    fn positive_scaling_leaves_decisions_unchanged() {
        let mut g = Normal::new(59);
        let cover = g.cloud(80, 30, 0.0);
        let stego = g.cloud(80, 30, 0.4);
        let scale = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> {
            rows.iter()
                .map(|r| r.iter().map(|v| 4.0 * v).collect())
                .collect()
        };
        let m1 = train(&cover, &stego, 3).unwrap();
        let m2 = train(&scale(&cover), &scale(&stego), 3).unwrap();
        let probes = g.cloud(40, 30, 0.2);
        for p in &probes {
            let scaled: Vec<f64> = p.iter().map(|v| 4.0 * v).collect();
            assert_eq!(
                votes(&m1, p).unwrap(),
                votes(&m2, &scaled).unwrap(),
                "scaling both classes by 4 must not move any decision"
            );
        }
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let rows = vec![vec![0.0; 10]; 6];
        let one = vec![vec![0.0; 10]; 1];
        assert!(matches!(
            train(&one, &rows, 0),
            Err(EnsembleError::DegenerateClass { label: Class::Cover, rows: 1 })
        ));
        assert!(matches!(
            train(&rows, &one, 0),
            Err(EnsembleError::DegenerateClass { label: Class::Stego, rows: 1 })
        ));
        let ragged = vec![vec![0.0; 10], vec![0.0; 9]];
        assert!(matches!(
            train(&ragged, &rows, 0),
            Err(EnsembleError::DimensionMismatch { expected: 10, got: 9 })
        ));
        let empty: Vec<Vec<f64>> = vec![vec![]; 4];
        assert!(matches!(
            train(&empty, &empty, 0),
            Err(EnsembleError::DimensionMismatch { expected: 1, got: 0 })
        ));
        assert!(matches!(
            evaluate_splits(&rows[..3], &rows, 2, 0),
            Err(EnsembleError::DegenerateClass { label: Class::Cover, rows: 3 })
        ));
    }

    #[test]
    fn split_evaluation_separates_and_collapses_as_expected() {
        let mut g = Normal::new(71);
        let dim = 20;
        let cover = g.cloud(40, dim, 0.0);
        let stego = g.cloud(40, dim, 1.4);
        let sep = evaluate_splits(&cover, &stego, 10, 9).unwrap();
        assert_eq!(sep.per_split.len(), 10);
        assert!(sep.mean < 0.05, "separable corpus gave mean P_E {}", sep.mean);
        assert!((sep.per_split.iter().sum::<f64>() / 10.0 - sep.mean).abs() < 1e-12);

        // mixing the classes destroys all signal
        let mut mixed_a = Vec::new();
        let mut mixed_b = Vec::new();
        for i in 0..40 {
            if i % 2 == 0 {
                mixed_a.push(cover[i].clone());
                mixed_b.push(stego[i].clone());
            } else {
                mixed_a.push(stego[i].clone());
                mixed_b.push(cover[i].clone());
            }
        }
        let chance = evaluate_splits(&mixed_a, &mixed_b, 10, 9).unwrap();
        assert!(
            (0.35..=0.55).contains(&chance.mean),
            "label-mixed corpus gave mean P_E {}",
            chance.mean
        );
        for pe in &chance.per_split {
            assert!((0.0..=0.5).contains(pe), "split P_E {pe} out of bounds");
        }
    }
}
