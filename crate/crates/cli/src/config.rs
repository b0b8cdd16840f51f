//! Versioned JSON experiment files.

use anyhow::{bail, Context};
use gfl_core::memsolver::SimConfig;
use gfl_core::odereduce::OdeConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

fn default_output_dir() -> PathBuf {
    PathBuf::from(".")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateFile {
    pub schema_version: u32,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub config: SimConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeFile {
    pub schema_version: u32,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub config: OdeConfig,
}

/// Which exponent of the base configuration the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTarget {
    P1,
    P2,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub target: SweepTarget,
    pub p_range: [f64; 2],
    pub p_steps: usize,
    pub gamma_range: [f64; 2],
    pub gamma_steps: usize,
}

impl SweepGrid {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.p_steps == 0 || self.gamma_steps == 0 {
            bail!("sweep grid is empty: p_steps = {}, gamma_steps = {}", self.p_steps, self.gamma_steps);
        }
        if !(self.p_range[0] > 1.0 && self.p_range[1] >= self.p_range[0]) {
            bail!("p_range must satisfy 1 < lo <= hi, got {:?}", self.p_range);
        }
        if !(self.gamma_range[0] >= 0.0 && self.gamma_range[1] >= self.gamma_range[0] && self.gamma_range[1] < 1.0) {
            bail!("gamma_range must satisfy 0 <= lo <= hi < 1, got {:?}", self.gamma_range);
        }
        Ok(())
    }

    pub fn p_values(&self) -> Vec<f64> {
        linspace(self.p_range, self.p_steps)
    }

    pub fn gamma_values(&self) -> Vec<f64> {
        linspace(self.gamma_range, self.gamma_steps)
    }
}

fn linspace([lo, hi]: [f64; 2], n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub schema_version: u32,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Worker count; `GFL_WORKERS` takes precedence.
    #[serde(default)]
    pub workers: Option<usize>,
    pub base: SimConfig,
    pub sweep: SweepGrid,
}

#[derive(Deserialize)]
struct Version {
    schema_version: Option<serde_json::Value>,
}

/// Parses `text` (read from `origin`) into `T`. Errors carry `origin:line:column`.
pub fn parse<T: DeserializeOwned>(text: &str, origin: &str) -> anyhow::Result<T> {
    let located = |e: serde_json::Error| anyhow::anyhow!("{origin}:{}:{}: {e}", e.line(), e.column());
    let version: Version = serde_json::from_str(text).map_err(located)?;
    match version.schema_version {
        Some(serde_json::Value::Number(n)) if n.as_u64() == Some(SCHEMA_VERSION.into()) => {}
        Some(other) => bail!("{origin}: unsupported schema_version {other}, this build reads {SCHEMA_VERSION}"),
        None => bail!("{origin}: missing schema_version (expected {SCHEMA_VERSION})"),
    }
    serde_json::from_str(text).map_err(located)
}

pub fn load<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text, &path.display().to_string())
}

/// Worker count from `GFL_WORKERS`, else `configured`, else the machine's parallelism.
pub fn worker_count(configured: Option<usize>) -> anyhow::Result<usize> {
    let n = match std::env::var("GFL_WORKERS") {
        Ok(v) => v.trim().parse::<usize>().with_context(|| format!("GFL_WORKERS={v:?} is not a count"))?,
        Err(_) => configured.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
    };
    if n == 0 {
        bail!("worker count must be at least 1");
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace([1.0, 2.0], 1), vec![1.0]);
        assert_eq!(linspace([1.0, 2.0], 3), vec![1.0, 1.5, 2.0]);
    }

    #[test]
    fn version_is_checked_before_fields() {
        let err = parse::<OdeFile>(r#"{"schema_version": 2, "whatever": 1}"#, "x.json").unwrap_err();
        assert!(err.to_string().contains("unsupported schema_version 2"), "{err}");
        let err = parse::<OdeFile>(r#"{"config": {}}"#, "x.json").unwrap_err();
        assert!(err.to_string().contains("missing schema_version"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse::<OdeFile>("{\n  \"schema_version\": 1,\n  oops\n}", "bad.json").unwrap_err();
        assert!(err.to_string().starts_with("bad.json:3:"), "{err}");
    }
}
