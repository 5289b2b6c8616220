//! JSON run configuration.
//!
//! A run is described by one document with a `schema_version` field. Every
//! section is optional and defaults to the experimental operating point;
//! unknown keys anywhere are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{ChannelError, ChannelParams};
use crate::codec::{FrequencyGrid, ToneComposition};
use crate::protocol::{
    BlockConfig, Eavesdropper, NoiseLegs, ProtocolError, DEFAULT_ERROR_THRESHOLD,
    DEFAULT_MAX_RETRIES,
};
use crate::security::{default_distance_grid, CodingParams, BOUNDARY_MU};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config key `{key}`: {message}")]
    Parse { key: String, message: String },
    #[error("config key `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

impl ConfigError {
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Io { .. } => None,
            ConfigError::Parse { key, .. } | ConfigError::Invalid { key, .. } => Some(key),
        }
    }

    fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    pub n2: usize,
    pub error_threshold: f64,
    pub grid: FrequencyGrid,
    pub tones: usize,
    pub composition: ToneComposition,
    pub t_span_s: f64,
    pub oversample: usize,
    pub snr_threshold: f64,
    pub eavesdropper: Eavesdropper,
    pub noise: NoiseLegs,
    pub force_detection: bool,
    /// Retransmissions allowed per undecodable block.
    pub max_retries: u32,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        let b = BlockConfig::operating_point(0);
        Self {
            n2: b.n2,
            error_threshold: DEFAULT_ERROR_THRESHOLD,
            grid: b.grid,
            tones: b.tones,
            composition: b.composition,
            t_span_s: b.t_span_s,
            oversample: b.oversample,
            snr_threshold: b.snr_threshold,
            eavesdropper: b.eavesdropper,
            noise: b.noise,
            force_detection: b.force_detection,
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SecuritySection {
    pub mu_list: Vec<f64>,
    pub l1_grid_km: Vec<f64>,
    /// Photons per block used for the spectrum, `N`.
    pub block_photons: usize,
    /// Bits per block; defaults to the codebook's `b`.
    pub bits: Option<u32>,
}

impl Default for SecuritySection {
    fn default() -> Self {
        Self {
            mu_list: BOUNDARY_MU.to_vec(),
            l1_grid_km: default_distance_grid(),
            block_photons: CodingParams::OPERATING_POINT.block_photons,
            bits: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Include every block transcript in `transcript.json`.
    pub keep_transcripts: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            keep_transcripts: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_channel")]
    pub channel: ChannelParams,
    #[serde(default)]
    pub protocol: ProtocolSection,
    /// Text sent by `simulate`, as UTF-8 bytes.
    #[serde(default = "default_message")]
    pub message: String,
    #[serde(default)]
    pub security: SecuritySection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_message() -> String {
    "QSDC".into()
}

fn default_channel() -> ChannelParams {
    BlockConfig::operating_point(0).channel
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            channel: default_channel(),
            protocol: ProtocolSection::default(),
            message: default_message(),
            security: SecuritySection::default(),
            output: OutputSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            ConfigError::Parse {
                key: if key == "." { "<root>".into() } else { key },
                message: e.into_inner().to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::invalid(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        self.block_config().validate().map_err(|e| match e {
            ProtocolError::Channel(ChannelError::Invalid { key, reason }) => {
                ConfigError::invalid(format!("channel.{key}"), reason)
            }
            ProtocolError::InvalidConfig { key, reason } => {
                ConfigError::invalid(format!("protocol.{key}"), reason)
            }
            ProtocolError::Codec(e) => ConfigError::invalid("protocol.grid", e.to_string()),
            other => ConfigError::invalid("protocol", other.to_string()),
        })?;
        let sec = &self.security;
        if sec.mu_list.is_empty() || sec.mu_list.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(ConfigError::invalid("security.mu_list", "needs positive values"));
        }
        if sec.l1_grid_km.iter().any(|&l| !(l >= 0.0 && l.is_finite())) {
            return Err(ConfigError::invalid("security.l1_grid_km", "needs values >= 0"));
        }
        if sec.block_photons == 0 {
            return Err(ConfigError::invalid("security.block_photons", "must be at least 1"));
        }
        if sec.bits == Some(0) {
            return Err(ConfigError::invalid("security.bits", "must be at least 1"));
        }
        Ok(())
    }

    pub fn block_config(&self) -> BlockConfig {
        let p = &self.protocol;
        BlockConfig {
            n2: p.n2,
            error_threshold: p.error_threshold,
            grid: p.grid,
            tones: p.tones,
            composition: p.composition,
            t_span_s: p.t_span_s,
            oversample: p.oversample,
            snr_threshold: p.snr_threshold,
            channel: self.channel,
            seed: self.seed,
            eavesdropper: p.eavesdropper,
            noise: p.noise,
            force_detection: p.force_detection,
        }
    }

    pub fn coding(&self) -> CodingParams {
        let bits = self.security.bits.unwrap_or_else(|| {
            self.block_config()
                .codebook()
                .map(|b| b.bits())
                .unwrap_or(CodingParams::OPERATING_POINT.bits)
        });
        CodingParams {
            bits,
            block_photons: self.security.block_photons,
            t_span_s: self.protocol.t_span_s,
        }
    }
}
