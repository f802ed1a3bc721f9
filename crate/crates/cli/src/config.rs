//! Experiment configuration shared by the command line and config files.
//!
//! Every flag has a field of the same name (with `_` for `-`). Values given
//! on the command line override the file. Unset fields fall back to the
//! defaults below when a command runs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sublab::orbit::{default_eps, StartRegion, StopOn};
use sublab::scalar::{format_rational, parse_rational};
use sublab::{MapParams, Q};

use crate::error::{CliError, CliResult};

pub const ENV_OUT_DIR: &str = "SUBLAB_OUT_DIR";

pub const DEFAULT_ORBIT_CAP: u64 = 1_000_000;
pub const DEFAULT_SAMPLES: u64 = 10_000;
pub const DEFAULT_ABSORB_CAP: u64 = 100_000;
pub const DEFAULT_ALPHA_SAMPLES: u64 = 100_000;
pub const DEFAULT_BITS: u32 = 64;
pub const DEFAULT_DEPTH: u32 = 2;
pub const DEFAULT_SVG_MAX_DEPTH: u32 = 6;
pub const DEFAULT_TREE_MAX_DEPTH: u32 = 8;
pub const DEFAULT_STEPS: u64 = 50;
pub const DEFAULT_MAX_DEN: i64 = 1000;
pub const DEFAULT_DIGITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    Orbit,
    Absorb,
    Cones,
    Conjugacy,
    Variant,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant_index: Option<usize>,
    /// Comma-separated exact coordinates, e.g. `"1/3,2,0.5"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<String>,
    /// Exact rational, e.g. `"1/1099511627776"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_on: Option<StopOn>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bits: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<StartRegion>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_samples: Option<u64>,
    /// Rerun the first `recheck_samples` samples with this larger cap.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recheck_cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recheck_samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg_max_depth: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree_max_depth: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_den: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub digits: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sections: Option<Vec<Section>>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),*) => {
        ExperimentConfig { $($f: $top.$f.clone().or_else(|| $base.$f.clone()),)* }
    };
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read config file {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config file {}: {e}", path.display())))
    }

    pub fn to_json(&self) -> CliResult<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Fields set in `top` win over `self`.
    pub fn overlay(&self, top: &ExperimentConfig) -> ExperimentConfig {
        let base = self;
        overlay!(
            base, top, a, b, variant_index, point, eps, cap, stop_on, trace, samples, seed, bits,
            region, alpha_samples, recheck_cap, recheck_samples, depth, svg_max_depth,
            tree_max_depth, steps, max_den, digits, out_dir, sections
        )
    }

    pub fn params(&self) -> CliResult<MapParams> {
        let a = self.a.ok_or_else(|| CliError::Usage("--a is required".into()))?;
        let b = self.b.ok_or_else(|| CliError::Usage("--b is required".into()))?;
        let p = match self.variant_index {
            Some(i) => MapParams::variant(a, b, i),
            None => MapParams::new(a, b),
        };
        p.map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn seed(&self) -> CliResult<u64> {
        self.seed.ok_or_else(|| CliError::Usage("--seed is required for stochastic commands".into()))
    }

    pub fn eps(&self) -> CliResult<Q> {
        match &self.eps {
            None => Ok(default_eps()),
            Some(s) => parse_rational(s).map_err(|_| CliError::Usage(format!("bad --eps value {s:?}"))),
        }
    }

    pub fn eps_string(&self) -> CliResult<String> {
        Ok(format_rational(&self.eps()?))
    }

    pub fn digits(&self) -> usize {
        self.digits.unwrap_or(DEFAULT_DIGITS)
    }

    pub fn bits(&self) -> u32 {
        self.bits.unwrap_or(DEFAULT_BITS)
    }

    pub fn samples(&self) -> u64 {
        self.samples.unwrap_or(DEFAULT_SAMPLES)
    }

    /// `--out-dir`, then the config file, then `SUBLAB_OUT_DIR`, then `.`.
    pub fn resolve_out_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os(ENV_OUT_DIR).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }
}
