//! Run configuration assembled from a key-value file, the environment and flags.
//!
//! Later sources win: file values are overridden by `CYCLIC_CACHING_SEED`,
//! which is overridden by command-line flags.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cyclic_caching::{BeamformerKind, Fading, PhantomSlotPolicy, Scheme, SchemeParams, SimConfig};

use crate::error::CliError;

pub const SEED_ENV: &str = "CYCLIC_CACHING_SEED";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub users: Option<usize>,
    pub caching_gain: Option<usize>,
    pub antennas: Option<usize>,
    pub alpha: Option<usize>,
    pub phantoms: Option<usize>,
    pub scheme: Option<Scheme>,
    pub beamformer: Option<BeamformerKind>,
    pub snr_db: Option<Vec<f64>>,
    pub draws: Option<usize>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub phantom_policy: Option<PhantomSlotPolicy>,
    pub fading: Option<Fading>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| format!("invalid value '{value}' for {key}: {e}"))
}

/// Parses `0,10,20` or a range `start:stop:step` (inclusive of `stop`).
pub fn parse_snr_list(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let [start, stop, step]: [f64; 3] = [
            parse_value("snr_db", parts[0].trim())?,
            parse_value("snr_db", parts[1].trim())?,
            parse_value("snr_db", parts[2].trim())?,
        ];
        if step.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || stop < start {
            return Err(format!("invalid SNR range '{text}'"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| start + i as f64 * step).collect());
    }
    text.split(',')
        .map(|x| parse_value("snr_db", x.trim()))
        .collect()
}

impl RunConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn from_key_values(text: &str) -> Result<Self, CliError> {
        let mut config = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::parse(i + 1, format!("expected key = value, got '{line}'"))
            })?;
            config
                .set(key.trim(), value.trim())
                .map_err(|m| CliError::parse(i + 1, m))?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_key_values(&text).map_err(|e| match e {
            CliError::Parse { line, message } => {
                CliError::Validation(format!("{}:{line}: {message}", path.display()))
            }
            other => other,
        })
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key.to_ascii_lowercase().replace('-', "_").as_str() {
            "k" | "users" => self.users = Some(parse_value(key, value)?),
            "t" | "caching_gain" => self.caching_gain = Some(parse_value(key, value)?),
            "l" | "antennas" => self.antennas = Some(parse_value(key, value)?),
            "alpha" => self.alpha = Some(parse_value(key, value)?),
            "k_f" | "phantoms" => self.phantoms = Some(parse_value(key, value)?),
            "scheme" => self.scheme = Some(parse_value(key, value)?),
            "beamformer" => self.beamformer = Some(parse_value(key, value)?),
            "snr_db" | "snr" => self.snr_db = Some(parse_snr_list(value)?),
            "draws" => self.draws = Some(parse_value(key, value)?),
            "seed" => self.seed = Some(parse_value(key, value)?),
            "output" => self.output = Some(PathBuf::from(value)),
            "phantom_slot_policy" => self.phantom_policy = Some(parse_value(key, value)?),
            "fading" => self.fading = Some(parse_value(key, value)?),
            _ => return Err(format!("unknown configuration key '{key}'")),
        }
        Ok(())
    }

    /// Seed override from the environment, if set.
    pub fn from_env() -> Result<Self, CliError> {
        match std::env::var(SEED_ENV) {
            Ok(value) => Ok(RunConfig {
                seed: Some(value.trim().parse().map_err(|e| {
                    CliError::Validation(format!("invalid {SEED_ENV} '{value}': {e}"))
                })?),
                ..RunConfig::default()
            }),
            Err(_) => Ok(RunConfig::default()),
        }
    }

    /// Fields set in `other` replace those of `self`.
    pub fn overlay(self, other: RunConfig) -> RunConfig {
        RunConfig {
            users: other.users.or(self.users),
            caching_gain: other.caching_gain.or(self.caching_gain),
            antennas: other.antennas.or(self.antennas),
            alpha: other.alpha.or(self.alpha),
            phantoms: other.phantoms.or(self.phantoms),
            scheme: other.scheme.or(self.scheme),
            beamformer: other.beamformer.or(self.beamformer),
            snr_db: other.snr_db.or(self.snr_db),
            draws: other.draws.or(self.draws),
            seed: other.seed.or(self.seed),
            output: other.output.or(self.output),
            phantom_policy: other.phantom_policy.or(self.phantom_policy),
            fading: other.fading.or(self.fading),
        }
    }

    fn require(value: Option<usize>, name: &str) -> Result<usize, CliError> {
        value.ok_or_else(|| CliError::Validation(format!("missing required parameter {name}")))
    }

    pub fn scheme_or(&self, default: Scheme) -> Scheme {
        self.scheme.unwrap_or(default)
    }

    /// Validated network parameters.
    pub fn params(&self) -> Result<SchemeParams, CliError> {
        let params = SchemeParams::new(
            Self::require(self.users, "K")?,
            Self::require(self.caching_gain, "t")?,
            Self::require(self.antennas, "L")?,
            Self::require(self.alpha, "alpha")?,
        )
        .with_phantoms(self.phantoms.unwrap_or(0));
        Ok(params.validate()?)
    }

    /// Validated simulation settings; defaults are LIN, max-min beamformers,
    /// 100 draws, seed 0, slow fading and skipped phantom slots.
    pub fn sim_config(&self) -> Result<SimConfig, CliError> {
        let defaults = SimConfig::new(self.params()?, self.scheme_or(Scheme::Lin));
        let config = SimConfig {
            beamformer: self.beamformer.unwrap_or(defaults.beamformer),
            snr_points_db: self.snr_db.clone().unwrap_or_default(),
            draws: self.draws.unwrap_or(defaults.draws),
            seed: self.seed.unwrap_or(defaults.seed),
            fading: self.fading.unwrap_or(defaults.fading),
            phantom_policy: self.phantom_policy.unwrap_or(defaults.phantom_policy),
            ..defaults
        };
        Ok(config.validate()?)
    }
}
