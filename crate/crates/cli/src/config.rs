//! Experiment configuration files.
//!
//! Lengths are in σ, times in ω⁻¹ and rates in ω. Each scenario reads its
//! own keys from `parameters`; unknown keys are rejected.

use std::f64::consts::{FRAC_PI_4, PI};
use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    PhaseSweepL0,
    PhaseSweepL1,
    DefectRobustness,
    RabiLoading,
    ElsSwitching,
    ContinuumValidate,
    ExtractCouplings,
    DarkSubspace,
    SyntheticExport,
}

impl Scenario {
    pub fn supports_check(self) -> bool {
        !matches!(self, Scenario::SyntheticExport)
    }

    pub fn uses_grid(self) -> bool {
        // every scenario that falls back on extracted rates touches the grid
        !matches!(self, Scenario::DarkSubspace)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default = "empty_object")]
    pub parameters: Value,
    /// Accepted for compatibility; every computation is deterministic.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if !cfg.parameters.is_object() {
            bail!("`parameters` must be an object");
        }
        Ok(cfg)
    }

    pub fn params<T: for<'de> Deserialize<'de>>(&self) -> anyhow::Result<T> {
        serde_json::from_value(self.parameters.clone())
            .with_context(|| format!("parameters for {}", serde_json::to_string(&self.scenario).unwrap_or_default()))
    }
}

fn default_t() -> f64 {
    1000.0
}
fn default_samples() -> usize {
    2001
}
fn default_d0() -> f64 {
    5.0
}
fn default_d1() -> f64 {
    6.0
}
fn default_n2() -> usize {
    2
}
fn default_phi_points() -> usize {
    41
}
fn default_phi0() -> f64 {
    -FRAC_PI_4
}

/// Phases `2π k / (points − 1)`, so that π is included for odd `points`.
pub fn phase_grid(points: usize) -> anyhow::Result<Vec<f64>> {
    if points < 2 {
        bail!("phi_points must be at least 2");
    }
    Ok((0..points).map(|k| 2.0 * PI * k as f64 / (points - 1) as f64).collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSweepL0 {
    pub n: usize,
    #[serde(default = "default_d0")]
    pub d: f64,
    /// Overrides the extracted J.
    #[serde(default)]
    pub j: Option<f64>,
    #[serde(default = "default_phi_points")]
    pub phi_points: usize,
    #[serde(default = "default_t")]
    pub t_final: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSweepL1 {
    pub n: usize,
    #[serde(default = "default_d1")]
    pub d: f64,
    #[serde(default = "default_phi0")]
    pub phi0: f64,
    /// Override all three extracted rates together.
    #[serde(default)]
    pub j1: Option<f64>,
    #[serde(default)]
    pub j2: Option<f64>,
    #[serde(default)]
    pub j3: Option<f64>,
    #[serde(default = "default_phi_points")]
    pub phi_points: usize,
    #[serde(default = "default_t")]
    pub t_final: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectRobustness {
    pub n: usize,
    #[serde(default = "default_d0")]
    pub d: f64,
    #[serde(default)]
    pub j: Option<f64>,
    #[serde(default = "one")]
    pub defect_site: usize,
    #[serde(default = "default_t")]
    pub t_final: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RabiLoading {
    #[serde(default = "default_d0")]
    pub d: f64,
    #[serde(default)]
    pub j: Option<f64>,
    /// Horizon in units of π/(4J).
    #[serde(default = "two")]
    pub horizon: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    pub sites: Vec<usize>,
    pub time: f64,
    #[serde(default = "pi")]
    pub phase: f64,
}

fn pi() -> f64 {
    PI
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElsSwitching {
    #[serde(default = "default_n2")]
    pub n: usize,
    #[serde(default = "default_d0")]
    pub d: f64,
    #[serde(default)]
    pub j: Option<f64>,
    /// Index k of the initial `D_k`; `2ⁿ` selects the alternating member.
    #[serde(default)]
    pub initial: u64,
    pub pulses: Vec<PulseSpec>,
    #[serde(default = "default_t")]
    pub t_final: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuumValidate {
    #[serde(default = "default_n2")]
    pub n: usize,
    #[serde(default = "default_d0")]
    pub d: f64,
    /// Overrides the J extracted on the same preset.
    #[serde(default)]
    pub j: Option<f64>,
    #[serde(default = "nine")]
    pub phi_points: usize,
    /// Margin between the outermost sites and the grid edge.
    #[serde(default = "six")]
    pub margin: f64,
    /// Agreement threshold for `--check`; defaults by preset.
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default = "default_t")]
    pub t_final: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn nine() -> usize {
    9
}
fn six() -> f64 {
    6.0
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractCouplings {
    pub l: u8,
    pub d: f64,
    #[serde(default = "default_phi0")]
    pub phi0: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "geometry", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DarkSubspace {
    /// One subspace per entry of `n`.
    Ribbon {
        #[serde(default = "ribbon_sizes")]
        n: Vec<usize>,
    },
    TiltedSquare {
        #[serde(default = "three")]
        rows: usize,
        #[serde(default = "three")]
        cols: usize,
    },
}

fn ribbon_sizes() -> Vec<usize> {
    (1..=10).collect()
}
fn three() -> usize {
    3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticExport {
    #[serde(default = "default_n2")]
    pub n: usize,
    #[serde(default = "default_d1")]
    pub d: f64,
    #[serde(default = "default_phi0")]
    pub phi0: f64,
    #[serde(default)]
    pub j1: Option<f64>,
    #[serde(default)]
    pub j2: Option<f64>,
    #[serde(default)]
    pub j3: Option<f64>,
}
