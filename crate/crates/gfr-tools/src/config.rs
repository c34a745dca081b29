//! Run configuration: variant selection, scale ladder, quantization-step
//! schedule (explicit or quality-factor preset), and batch settings.
//! Settings come from an optional key=value config file overlaid by
//! command-line flags; flags win field by field.

use std::fmt;
use std::path::PathBuf;

use gfr_core::features::FeatureVariant;
use gfr_core::histogram::{default_q_schedule, DEFAULT_P_CENTER, DEFAULT_SCALES, DEFAULT_THRESHOLD};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// A partial configuration: unset fields fall through to the layer below
/// (file settings, then defaults).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub variant: Option<FeatureVariant>,
    pub scales: Option<Vec<f64>>,
    pub t: Option<usize>,
    pub qf: Option<u8>,
    pub q_schedule: Option<Vec<f64>>,
    pub p_center: Option<f64>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

impl Settings {
    /// Field-by-field overlay: any field set in `top` wins.
    pub fn overlay(base: Settings, top: Settings) -> Settings {
        Settings {
            variant: top.variant.or(base.variant),
            scales: top.scales.or(base.scales),
            t: top.t.or(base.t),
            qf: top.qf.or(base.qf),
            q_schedule: top.q_schedule.or(base.q_schedule),
            p_center: top.p_center.or(base.p_center),
            seed: top.seed.or(base.seed),
            threads: top.threads.or(base.threads),
        }
    }

    /// Parses a key=value config file: one pair per line, `#` comments and
    /// blank lines ignored, later duplicates win.
    pub fn from_file_text(text: &str) -> Result<Settings, ConfigError> {
        let mut s = Settings::default();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(format!("config line {}: expected key=value, got {raw:?}", ln + 1));
            };
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| {
                ConfigError(format!("config line {}: bad {what} value {value:?}", ln + 1))
            };
            match key {
                "variant" => s.variant = Some(parse_variant(value)?),
                "scales" => s.scales = Some(parse_float_list(value).map_err(|_| bad("scales"))?),
                "t" => s.t = Some(value.parse().map_err(|_| bad("t"))?),
                "qf" => s.qf = Some(value.parse().map_err(|_| bad("qf"))?),
                "q_schedule" | "q-schedule" => {
                    s.q_schedule = Some(parse_float_list(value).map_err(|_| bad("q_schedule"))?)
                }
                "p_center" | "p-center" => {
                    s.p_center = Some(value.parse().map_err(|_| bad("p_center"))?)
                }
                "seed" => s.seed = Some(value.parse().map_err(|_| bad("seed"))?),
                "threads" => s.threads = Some(value.parse().map_err(|_| bad("threads"))?),
                other => return err(format!("config line {}: unknown key {other:?}", ln + 1)),
            }
        }
        Ok(s)
    }
}

pub fn parse_variant(name: &str) -> Result<FeatureVariant, ConfigError> {
    match name {
        "gfr" => Ok(FeatureVariant::Gfr),
        "gfr-gsm" => Ok(FeatureVariant::GfrGsm),
        "gfr-gw" => Ok(FeatureVariant::GfrGw),
        other => err(format!("unknown variant {other:?} (expected gfr, gfr-gsm, or gfr-gw)")),
    }
}

pub fn parse_float_list(text: &str) -> Result<Vec<f64>, ConfigError> {
    text.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| ConfigError(format!("{e}: {v:?}"))))
        .collect()
}

/// A fully resolved extraction run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub variant: FeatureVariant,
    pub scales: Vec<f64>,
    pub t: usize,
    /// One quantization step per scale.
    pub q_schedule: Vec<f64>,
    /// The preset the schedule came from, if any; also the table quality
    /// assumed when reading coefficient dumps.
    pub qf: Option<u8>,
    pub p_center: f64,
    pub seed: u64,
    pub threads: usize,
    pub inputs: Vec<PathBuf>,
    pub output: Option<PathBuf>,
}

/// Resolves layered settings into a checked configuration. Exactly one of
/// the `qf` preset and an explicit `q_schedule` must be present; a preset
/// installs its standard schedule truncated to the scale count.
pub fn resolve(
    s: Settings,
    inputs: Vec<PathBuf>,
    output: Option<PathBuf>,
) -> Result<RunConfig, ConfigError> {
    let variant = s.variant.unwrap_or(FeatureVariant::Gfr);
    let scales = match s.scales {
        Some(sc) => sc,
        None => match variant {
            FeatureVariant::GfrGw => DEFAULT_SCALES.to_vec(),
            _ => DEFAULT_SCALES[..4].to_vec(),
        },
    };
    if scales.is_empty() {
        return err("scale list is empty");
    }
    if let Some(&bad) = scales.iter().find(|&&v| !(v > 0.0)) {
        return err(format!("scales must be positive, got {bad}"));
    }

    let q_schedule = match (s.qf, s.q_schedule) {
        (Some(_), Some(_)) => {
            return err("give either a qf preset or an explicit q_schedule, not both")
        }
        (None, None) => return err("a qf preset (75 or 95) or an explicit q_schedule is required"),
        (Some(qf), None) => {
            let Some(table) = default_q_schedule(qf) else {
                return err(format!("no preset for qf {qf} (presets exist for 75 and 95)"));
            };
            if scales.len() > table.len() {
                return err(format!(
                    "the qf {qf} preset covers {} scales, the run uses {}",
                    table.len(),
                    scales.len()
                ));
            }
            table[..scales.len()].to_vec()
        }
        (None, Some(qs)) => qs,
    };
    if q_schedule.len() != scales.len() {
        return err(format!(
            "q_schedule has {} steps for {} scales",
            q_schedule.len(),
            scales.len()
        ));
    }
    if let Some(&bad) = q_schedule.iter().find(|&&v| !(v > 0.0)) {
        return err(format!("quantization steps must be positive, got {bad}"));
    }

    let t = s.t.unwrap_or(DEFAULT_THRESHOLD);
    if t == 0 {
        return err("histogram threshold t must be at least 1");
    }
    let p_center = s.p_center.unwrap_or(DEFAULT_P_CENTER);
    if !(p_center > 0.0 && p_center < 1.0) {
        return err(format!("p_center must lie strictly between 0 and 1, got {p_center}"));
    }
    let threads = s.threads.unwrap_or(1);
    if threads == 0 {
        return err("thread count must be at least 1");
    }

    Ok(RunConfig {
        variant,
        scales,
        t,
        q_schedule,
        qf: s.qf,
        p_center,
        seed: s.seed.unwrap_or(0),
        threads,
        inputs,
        output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qf75() -> Settings {
        Settings { qf: Some(75), ..Settings::default() }
    }

    #[test]
    fn defaults_follow_the_variant() {
        let c = resolve(qf75(), vec![], None).unwrap();
        assert_eq!(c.variant, FeatureVariant::Gfr);
        assert_eq!(c.scales, &DEFAULT_SCALES[..4]);
        assert_eq!(c.q_schedule, vec![2.0, 4.0, 6.0, 8.0]);
        assert_eq!((c.t, c.p_center, c.seed, c.threads), (4, 0.75, 0, 1));

        let gw = Settings { variant: Some(FeatureVariant::GfrGw), ..qf75() };
        let c = resolve(gw, vec![], None).unwrap();
        assert_eq!(c.scales.len(), 6, "the weighted variant defaults to the full ladder");
        assert_eq!(c.q_schedule.len(), 6);
    }

    #[test]
    fn preset_and_explicit_schedule_are_mutually_exclusive() {
        let both = Settings { q_schedule: Some(vec![1.0; 4]), ..qf75() };
        assert!(resolve(both, vec![], None).is_err());
        assert!(resolve(Settings::default(), vec![], None).is_err(), "one source is required");
        let qf50 = Settings { qf: Some(50), ..Settings::default() };
        assert!(resolve(qf50, vec![], None).is_err(), "only 75 and 95 have presets");
    }

    #[test]
    fn schedule_length_must_match_scales() {
        let s = Settings {
            scales: Some(vec![0.5, 1.0]),
            q_schedule: Some(vec![2.0, 4.0, 6.0]),
            ..Settings::default()
        };
        assert!(resolve(s, vec![], None).is_err());
        let ok = Settings {
            scales: Some(vec![0.5, 1.0]),
            q_schedule: Some(vec![2.0, 4.0]),
            ..Settings::default()
        };
        assert_eq!(resolve(ok, vec![], None).unwrap().q_schedule, vec![2.0, 4.0]);
    }

    #[test]
    fn config_files_parse_and_flags_win() {
        let text = "\n# a comment\nvariant = gfr-gsm\nscales = 0.5, 0.75\nqf=95\nseed = 7\n";
        let file = Settings::from_file_text(text).unwrap();
        assert_eq!(file.variant, Some(FeatureVariant::GfrGsm));
        assert_eq!(file.scales, Some(vec![0.5, 0.75]));
        assert_eq!((file.qf, file.seed), (Some(95), Some(7)));

        let flags = Settings { seed: Some(99), ..Settings::default() };
        let merged = Settings::overlay(file, flags);
        assert_eq!(merged.seed, Some(99), "flag overrides file");
        assert_eq!(merged.qf, Some(95), "unset flag falls through to file");

        assert!(Settings::from_file_text("no_equals_here").is_err());
        assert!(Settings::from_file_text("mystery = 3").is_err());
        assert!(Settings::from_file_text("t = many").is_err());
    }

    #[test]
    fn out_of_range_values_are_rejected() {
        for s in [
            Settings { scales: Some(vec![]), ..qf75() },
            Settings { scales: Some(vec![0.5, -1.0]), ..qf75() },
            Settings { t: Some(0), ..qf75() },
            Settings { p_center: Some(1.0), ..qf75() },
            Settings { threads: Some(0), ..qf75() },
            Settings { q_schedule: Some(vec![2.0, 0.0, 6.0, 8.0]), ..Settings::default() },
        ] {
            assert!(resolve(s.clone(), vec![], None).is_err(), "{s:?} should be rejected");
        }
    }
}
