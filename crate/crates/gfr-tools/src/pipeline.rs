//! Batch feature extraction: inputs are processed in sorted path order, each
//! worker thread owns a contiguous chunk and results are committed in input
//! order, so the output bytes do not depend on the thread count. Per-file
//! failures are collected instead of aborting the batch.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gfr_core::features::{assemble, feature_layout, AssembleParams};
use gfr_core::gabor::{make_bank, Kernel8};
use gfr_core::jpeg::{
    decompress_unrounded, parse_jpeg, standard_luma_qtable, QuantTable, QuantizedJpeg,
};

use crate::config::RunConfig;
use crate::formats::{read_coef_dump, FeatureMatrix, COEF_MAGIC};

#[derive(Debug)]
pub enum PipelineError {
    /// The validated configuration still failed to build a pipeline — a bug.
    Internal(String),
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineError::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl std::error::Error for PipelineError {}

/// Loads quantized coefficients from either a baseline JPEG or a coefficient
/// dump. Dumps carry no quantization table, so they are only readable when a
/// quality-factor preset supplies the standard table.
pub fn load_coefficients(path: &Path, dump_qf: Option<u8>) -> Result<QuantizedJpeg, String> {
    let bytes = fs::read(path).map_err(|e| format!("read failed: {e}"))?;
    if bytes.starts_with(&COEF_MAGIC) {
        let Some(qf) = dump_qf else {
            return Err(
                "coefficient dumps carry no quantization table; rerun with --qf".to_string()
            );
        };
        let qtable = QuantTable::from_natural(&standard_luma_qtable(qf), 8);
        read_coef_dump(&bytes, qtable, Some(qf)).map_err(|e| e.to_string())
    } else {
        parse_jpeg(&bytes).map_err(|e| e.to_string())
    }
}

/// One batch extraction: per-file results in sorted input order.
pub struct ExtractOutcome {
    pub matrix: FeatureMatrix,
    /// Inputs that produced a row, in matrix row order.
    pub ok_paths: Vec<PathBuf>,
    pub failures: Vec<(PathBuf, String)>,
}

type RowResult = (PathBuf, Result<Vec<f64>, String>, f64);

fn extract_one(
    path: &Path,
    cfg: &RunConfig,
    bank: &[Kernel8],
    params: &AssembleParams,
) -> RowResult {
    let started = Instant::now();
    let row = load_coefficients(path, cfg.qf).and_then(|coeffs| {
        let img = decompress_unrounded(&coeffs);
        assemble(cfg.variant, &img, bank, params)
            .map(|f| f.values)
            .map_err(|e| e.to_string())
    });
    (path.to_path_buf(), row, started.elapsed().as_secs_f64())
}

/// Extracts one feature row per input. Inputs are sorted first; failures are
/// collected per file and successful rows keep their sorted relative order.
pub fn extract_batch(
    cfg: &RunConfig,
    mut progress: impl FnMut(usize, usize, &RowResult),
) -> Result<ExtractOutcome, PipelineError> {
    let mut inputs = cfg.inputs.clone();
    inputs.sort();

    let bank =
        make_bank(&cfg.scales).map_err(|e| PipelineError::Internal(format!("bank: {e}")))?;
    let params = AssembleParams {
        scales: cfg.scales.clone(),
        q: cfg.q_schedule.clone(),
        t: cfg.t,
        p_center: cfg.p_center,
    };
    let layout = feature_layout(cfg.variant, cfg.scales.len(), cfg.t);

    let results: Vec<RowResult> = if cfg.threads <= 1 || inputs.len() <= 1 {
        inputs
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let r = extract_one(p, cfg, &bank, &params);
                progress(i, inputs.len(), &r);
                r
            })
            .collect()
    } else {
        let chunk = inputs.len().div_ceil(cfg.threads);
        let collected: Vec<Vec<RowResult>> = std::thread::scope(|scope| {
            let handles: Vec<_> = inputs
                .chunks(chunk)
                .map(|paths| {
                    let (bank, params) = (&bank, &params);
                    scope.spawn(move || {
                        paths.iter().map(|p| extract_one(p, cfg, bank, params)).collect()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("extraction worker panicked")).collect()
        });
        let flat: Vec<RowResult> = collected.into_iter().flatten().collect();
        for (i, r) in flat.iter().enumerate() {
            progress(i, inputs.len(), r);
        }
        flat
    };

    let mut matrix = FeatureMatrix::new(cfg.variant.id(), layout.hash, layout.descriptors.len());
    let mut ok_paths = Vec::new();
    let mut failures = Vec::new();
    for (path, row, _) in results {
        match row {
            Ok(values) => {
                matrix
                    .push_row(&values)
                    .map_err(|e| PipelineError::Internal(format!("{}: {e}", path.display())))?;
                ok_paths.push(path);
            }
            Err(msg) => failures.push((path, msg)),
        }
    }
    Ok(ExtractOutcome { matrix, ok_paths, failures })
}
