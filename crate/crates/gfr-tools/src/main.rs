//! `gfr`: batch front-end for the Gabor-residual feature pipeline.
//!
//! Machine-readable output goes to files only; progress and timing go to
//! standard error. Exit codes: 0 success, 1 usage error, 2 data error,
//! 3 internal invariant violation.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use gfr_core::ensemble::{evaluate_splits, train, EnsembleError};
use gfr_core::gabor::make_bank;
use gfr_core::jpeg::{standard_luma_qtable, QuantTable};
use gfr_core::math::fnv1a;
use gfr_core::residual::verify_symmetries;
use gfr_core::stego::{embed_simulated, EmbedSpec};

use gfr_tools::config::{parse_float_list, parse_variant, resolve, ConfigError, Settings};
use gfr_tools::formats;
use gfr_tools::pipeline::{extract_batch, load_coefficients, PipelineError};

enum ToolError {
    Usage(String),
    Data(String),
    Internal(String),
}

impl ToolError {
    fn code(&self) -> i32 {
        match self {
            ToolError::Usage(_) => 1,
            ToolError::Data(_) => 2,
            ToolError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for ToolError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ToolError::Usage(m) | ToolError::Data(m) | ToolError::Internal(m) => {
                write!(f, "{m}")
            }
        }
    }
}

impl From<ConfigError> for ToolError {
    fn from(e: ConfigError) -> ToolError {
        ToolError::Usage(e.to_string())
    }
}

impl From<formats::FormatError> for ToolError {
    fn from(e: formats::FormatError) -> ToolError {
        ToolError::Data(e.to_string())
    }
}

impl From<PipelineError> for ToolError {
    fn from(e: PipelineError) -> ToolError {
        ToolError::Internal(e.to_string())
    }
}

impl From<EnsembleError> for ToolError {
    fn from(e: EnsembleError) -> ToolError {
        ToolError::Data(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "gfr",
    version,
    about = "Phase-aware Gabor-residual features for JPEG steganalysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract a feature matrix from JPEGs or coefficient dumps
    Extract(ExtractArgs),
    /// Simulate ±1 embedding into nonzero AC coefficients
    EmbedSim(EmbedSimArgs),
    /// Train the FLD ensemble and report P_E over random splits
    TrainEval(TrainEvalArgs),
    /// Check every symmetry relation the feature merging relies on
    VerifySymmetries(VerifyArgs),
    /// Write the Gabor bank as CSV, eight lines per kernel
    DumpBank(DumpBankArgs),
}

/// Extraction settings shared by config files and flags; flags win.
#[derive(Args)]
struct SettingsArgs {
    /// Feature variant: gfr, gfr-gsm, or gfr-gw
    #[arg(long)]
    variant: Option<String>,
    /// Comma-separated Gabor scale ladder (default follows the variant)
    #[arg(long)]
    scales: Option<String>,
    /// Histogram truncation threshold
    #[arg(long)]
    t: Option<usize>,
    /// Quality preset (75 or 95): installs the standard quantization-step
    /// schedule, and the standard table when inputs are coefficient dumps
    #[arg(long)]
    qf: Option<u8>,
    /// Explicit comma-separated quantization-step schedule, one per scale
    #[arg(long)]
    q_schedule: Option<String>,
    /// Central-interval mass fixing the weighted-histogram width
    #[arg(long)]
    p_center: Option<f64>,
    /// Base seed for seeded operations
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; the output bytes are identical for any count
    #[arg(long)]
    threads: Option<usize>,
    /// key=value settings file; command-line flags win
    #[arg(long)]
    config: Option<PathBuf>,
}

impl SettingsArgs {
    fn to_settings(&self) -> Result<Settings, ToolError> {
        let flags = Settings {
            variant: self.variant.as_deref().map(parse_variant).transpose()?,
            scales: self.scales.as_deref().map(parse_float_list).transpose()?,
            t: self.t,
            qf: self.qf,
            q_schedule: self.q_schedule.as_deref().map(parse_float_list).transpose()?,
            p_center: self.p_center,
            seed: self.seed,
            threads: self.threads,
        };
        let file = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| ToolError::Usage(format!("config {}: {e}", p.display())))?;
                Settings::from_file_text(&text)?
            }
            None => Settings::default(),
        };
        Ok(Settings::overlay(file, flags))
    }
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    settings: SettingsArgs,
    /// Also write the matrix as CSV next to the output
    #[arg(long)]
    csv: bool,
    /// Output feature-matrix file
    #[arg(short, long)]
    output: PathBuf,
    /// Input .jpg files or coefficient dumps
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

fn cmd_extract(args: ExtractArgs) -> Result<(), ToolError> {
    let cfg =
        resolve(args.settings.to_settings()?, args.inputs, Some(args.output.clone()))?;
    let started = Instant::now();
    let out = extract_batch(&cfg, |i, n, (path, row, secs)| match row {
        Ok(_) => eprintln!("[{}/{n}] {} ok ({secs:.2}s)", i + 1, path.display()),
        Err(e) => eprintln!("[{}/{n}] {} FAILED: {e}", i + 1, path.display()),
    })?;
    formats::write_features(&args.output, &out.matrix)?;
    if args.csv {
        formats::write_features_csv(&args.output.with_extension("csv"), &out.matrix)?;
    }
    eprintln!(
        "wrote {}: {} rows x {} features, variant {}, layout {:016x} ({:.1}s)",
        args.output.display(),
        out.matrix.rows(),
        out.matrix.cols,
        cfg.variant.name(),
        out.matrix.layout_hash,
        started.elapsed().as_secs_f64()
    );
    if !out.failures.is_empty() {
        return Err(ToolError::Data(format!(
            "{} of {} inputs failed",
            out.failures.len(),
            out.failures.len() + out.ok_paths.len()
        )));
    }
    Ok(())
}

#[derive(Args)]
struct EmbedSimArgs {
    /// Payload in bits per nonzero AC coefficient, in [0, 1]
    #[arg(long)]
    rate: f64,
    /// Base seed; each file embeds with seed XOR hash(file stem)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Quality preset supplying the table for coefficient-dump inputs
    #[arg(long)]
    qf: Option<u8>,
    /// Directory receiving one perturbed coefficient dump per input
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    /// Input .jpg files or coefficient dumps
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

fn cmd_embed_sim(args: EmbedSimArgs) -> Result<(), ToolError> {
    if !(0.0..=1.0).contains(&args.rate) {
        return Err(ToolError::Usage(format!(
            "embedding rate must lie in [0, 1], got {}",
            args.rate
        )));
    }
    fs::create_dir_all(&args.out_dir)
        .map_err(|e| ToolError::Data(format!("{}: {e}", args.out_dir.display())))?;

    let mut inputs = args.inputs;
    inputs.sort();
    let mut stems: HashMap<String, PathBuf> = HashMap::new();
    let mut failures = 0usize;
    for (i, path) in inputs.iter().enumerate() {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        let outcome = (|| -> Result<PathBuf, String> {
            let stem = stem.clone().ok_or("input has no file stem")?;
            if let Some(prev) = stems.get(&stem) {
                return Err(format!("output name collides with {}", prev.display()));
            }
            let cover = load_coefficients(path, args.qf)?;
            let spec = EmbedSpec {
                rate_bpnzac: args.rate,
                seed: args.seed ^ fnv1a(stem.as_bytes()),
            };
            let stego = embed_simulated(&cover, &spec);
            let out = args.out_dir.join(format!("{stem}.gfrc"));
            formats::write_coef_dump(&out, &stego).map_err(|e| e.to_string())?;
            stems.insert(stem, path.clone());
            Ok(out)
        })();
        match outcome {
            Ok(out) => {
                eprintln!("[{}/{}] {} -> {}", i + 1, inputs.len(), path.display(), out.display())
            }
            Err(e) => {
                failures += 1;
                eprintln!("[{}/{}] {} FAILED: {e}", i + 1, inputs.len(), path.display());
            }
        }
    }
    if failures > 0 {
        return Err(ToolError::Data(format!("{failures} of {} inputs failed", inputs.len())));
    }
    Ok(())
}

#[derive(Args)]
struct TrainEvalArgs {
    /// Cover feature matrix
    #[arg(long)]
    cover: PathBuf,
    /// Stego feature matrix
    #[arg(long)]
    stego: PathBuf,
    /// Number of random half/half splits
    #[arg(long, default_value_t = 10)]
    splits: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the text report here
    #[arg(long)]
    text: Option<PathBuf>,
    /// Write the JSON report here
    #[arg(long)]
    json: Option<PathBuf>,
    /// Also train on the full corpus and serialize the model here
    #[arg(long)]
    model_out: Option<PathBuf>,
}

fn cmd_train_eval(args: TrainEvalArgs) -> Result<(), ToolError> {
    if args.splits == 0 {
        return Err(ToolError::Usage("at least one split is required".into()));
    }
    let cover = formats::read_features_file(&args.cover)?;
    let stego = formats::read_features_file(&args.stego)?;
    if cover.layout_hash != stego.layout_hash
        || cover.variant_id != stego.variant_id
        || cover.cols != stego.cols
    {
        return Err(ToolError::Data(format!(
            "feature layouts differ: cover {:016x}/{} vs stego {:016x}/{}",
            cover.layout_hash, cover.cols, stego.layout_hash, stego.cols
        )));
    }

    let started = Instant::now();
    let cover_rows = cover.rows_f64();
    let stego_rows = stego.rows_f64();
    let eval = evaluate_splits(&cover_rows, &stego_rows, args.splits, args.seed)?;
    let mean = eval.mean;
    let var = if eval.per_split.len() > 1 {
        eval.per_split.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>()
            / (eval.per_split.len() - 1) as f64
    } else {
        0.0
    };
    let std = var.sqrt();

    let headline = format!("{mean:.4} ± {std:.4}");
    if let Some(path) = &args.text {
        let mut text = format!("P_E = {headline}\nsplits = {}\nseed = {}\n", args.splits, args.seed);
        text.push_str("per_split =");
        for p in &eval.per_split {
            text.push_str(&format!(" {p:.4}"));
        }
        text.push('\n');
        fs::write(path, text).map_err(|e| ToolError::Data(format!("{}: {e}", path.display())))?;
    }
    if let Some(path) = &args.json {
        let doc = serde_json::json!({
            "p_e_mean": mean,
            "p_e_std": std,
            "per_split": eval.per_split,
            "splits": args.splits,
            "seed": args.seed,
            "layout_hash": format!("{:016x}", cover.layout_hash),
        });
        fs::write(path, format!("{doc:#}\n"))
            .map_err(|e| ToolError::Data(format!("{}: {e}", path.display())))?;
    }
    if let Some(path) = &args.model_out {
        let model =
            train(&cover_rows, &stego_rows, args.seed)?.with_layout_hash(cover.layout_hash);
        formats::write_model(path, &model)?;
        eprintln!(
            "model: d_sub {}, {} learners, out-of-bag error {:.4} -> {}",
            model.d_sub,
            model.n_learners,
            model.oob_error,
            path.display()
        );
    }
    eprintln!(
        "P_E = {headline} over {} splits of {}+{} rows ({:.1}s)",
        args.splits,
        cover_rows.len(),
        stego_rows.len(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma-separated scale ladder to verify
    #[arg(long)]
    scales: Option<String>,
    /// Verify against this standard table (these are asymmetric, so the
    /// transpose relation is skipped); default is a symmetric ramp table
    #[arg(long)]
    qf: Option<u8>,
    /// Equality tolerance
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Minimum fraction of separated inequality samples
    #[arg(long, default_value_t = 0.95)]
    min_fraction: f64,
    /// Write the text report here
    #[arg(long)]
    text: Option<PathBuf>,
    /// Write the JSON report here
    #[arg(long)]
    json: Option<PathBuf>,
}

fn cmd_verify(args: VerifyArgs) -> Result<(), ToolError> {
    let scales = match &args.scales {
        Some(s) => parse_float_list(s)?,
        None => vec![0.5, 0.75, 1.0, 1.25],
    };
    let qtable = match args.qf {
        Some(qf) => QuantTable::from_natural(&standard_luma_qtable(qf), 8),
        None => {
            let mut nat = [0u16; 64];
            for (m, q) in nat.iter_mut().enumerate() {
                *q = 1 + (m / 8 + m % 8) as u16;
            }
            QuantTable::from_natural(&nat, 8)
        }
    };
    let started = Instant::now();
    let report = verify_symmetries(&scales, &qtable, args.tol)
        .map_err(|e| ToolError::Usage(format!("bank: {e}")))?;
    let pass = report.pass(args.min_fraction);

    let mut text = format!("tolerance = {:e}\n", report.tolerance);
    for r in &report.equalities {
        text.push_str(&format!(
            "equality {}: {} cases, max deviation {:.3e}, {} violations\n",
            r.name, r.cases, r.max_deviation, r.violations
        ));
    }
    for s in &report.inequalities {
        text.push_str(&format!(
            "inequality {}: {}/{} separated (required margin {:e})\n",
            s.name, s.separated, s.cases, s.required_margin
        ));
    }
    text.push_str(if pass { "result = PASS\n" } else { "result = FAIL\n" });
    eprint!("{text}");
    eprintln!("({:.1}s)", started.elapsed().as_secs_f64());
    if let Some(path) = &args.text {
        fs::write(path, &text).map_err(|e| ToolError::Data(format!("{}: {e}", path.display())))?;
    }
    if let Some(path) = &args.json {
        let doc = serde_json::json!({
            "tolerance": report.tolerance,
            "pass": pass,
            "equalities": report.equalities.iter().map(|r| serde_json::json!({
                "name": r.name,
                "cases": r.cases,
                "max_deviation": r.max_deviation,
                "violations": r.violations,
            })).collect::<Vec<_>>(),
            "inequalities": report.inequalities.iter().map(|s| serde_json::json!({
                "name": s.name,
                "cases": s.cases,
                "separated": s.separated,
                "required_margin": s.required_margin,
            })).collect::<Vec<_>>(),
        });
        fs::write(path, format!("{doc:#}\n"))
            .map_err(|e| ToolError::Data(format!("{}: {e}", path.display())))?;
    }
    if pass {
        Ok(())
    } else {
        Err(ToolError::Internal("symmetry verification failed".into()))
    }
}

#[derive(Args)]
struct DumpBankArgs {
    /// Comma-separated scale ladder
    #[arg(long)]
    scales: Option<String>,
    /// Output CSV file
    #[arg(short, long)]
    output: PathBuf,
}

fn cmd_dump_bank(args: DumpBankArgs) -> Result<(), ToolError> {
    let scales = match &args.scales {
        Some(s) => parse_float_list(s)?,
        None => gfr_core::histogram::DEFAULT_SCALES.to_vec(),
    };
    let bank = make_bank(&scales).map_err(|e| ToolError::Usage(format!("bank: {e}")))?;
    formats::write_bank_csv(&args.output, &bank)?;
    eprintln!("wrote {} kernels to {}", bank.len(), args.output.display());
    Ok(())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::Extract(args) => cmd_extract(args),
        Command::EmbedSim(args) => cmd_embed_sim(args),
        Command::TrainEval(args) => cmd_train_eval(args),
        Command::VerifySymmetries(args) => cmd_verify(args),
        Command::DumpBank(args) => cmd_dump_bank(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.code());
    }
}
