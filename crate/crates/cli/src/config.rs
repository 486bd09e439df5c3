//! On-disk run configuration. Every file carries a `schema` version and a
//! single command record; unknown fields are rejected at every level.

use std::path::PathBuf;

use cosmowave_core::kato::KatoParams;
use cosmowave_core::{
    Coefficient, FitOptions, FitTransform, IntegratorOptions, RegionGridSpec, SimOptions,
    SourceConfig,
};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub command: Command,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            schema: SCHEMA_VERSION,
            command,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Command {
    Exponents(ExponentsConfig),
    Regions(RegionsConfig),
    Ode(OdeConfig),
    Simulate(SimulateConfig),
    Sweep(SweepConfig),
    Fit(FitConfig),
    Certify(CertifyConfig),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Exponents(_) => "exponents",
            Command::Regions(_) => "regions",
            Command::Ode(_) => "ode",
            Command::Simulate(_) => "simulate",
            Command::Sweep(_) => "sweep",
            Command::Fit(_) => "fit",
            Command::Certify(_) => "certify",
        }
    }
}

/// Either the cosmological pair `(n, w)` or the raw coefficients
/// `(n, alpha, mu)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsConfig {
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Accept w > 1, outside the stiff-matter limit.
    #[serde(default)]
    pub allow_w_above_one: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionsConfig {
    /// One grid per dimension.
    pub dimensions: Vec<u32>,
    #[serde(default)]
    pub grid: RegionGridSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeConfig {
    pub mu: f64,
    pub p: f64,
    pub coefficient: Coefficient,
    #[serde(rename = "F0")]
    pub f0: f64,
    #[serde(rename = "F1")]
    pub f1: f64,
    pub t0: f64,
    #[serde(default)]
    pub integrator: IntegratorOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub n: u32,
    pub alpha: f64,
    pub mu: f64,
    pub p: f64,
    pub epsilon: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    /// Chosen from the cone at the horizon when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    pub cells: usize,
    #[serde(default)]
    pub sim: SimOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub source: SourceConfig,
    pub eps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    /// Sweep output (`.json`) or a records table (`.csv`).
    pub input: PathBuf,
    pub transform: FitTransform,
    /// Taken from the sweep output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Needed by the log-corrected transform unless the sweep output names it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default)]
    pub options: FitOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lemma {
    #[serde(rename = "23")]
    L23,
    #[serde(rename = "33")]
    L33,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    pub lemma: Lemma,
    pub params: KatoParams,
    #[serde(rename = "C")]
    pub c: f64,
    /// Number of ladder iterates to report.
    pub iterations: u32,
}
