//! ε-sweeps over the ODE model or the PDE simulator, and the scaling fits
//! that compare measured lifespans against the predicted rates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exponents::ModelParams;
use crate::kato::{integrate_kato, Coefficient, IntegratorOptions, OdeTermination};
use crate::wave::{check_boundary_clearance, run_to_blowup, RadialGrid, SimOptions, SimTermination};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Ode,
    Pde,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeSweepConfig {
    pub mu: f64,
    pub p: f64,
    pub coefficient: Coefficient,
    /// Data shape: `F(t0) = ε f0`, `F'(t0) = ε f1`.
    #[serde(default = "one")]
    pub f0: f64,
    #[serde(default = "one")]
    pub f1: f64,
    #[serde(default = "one")]
    pub t0: f64,
    #[serde(default)]
    pub integrator: IntegratorOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeSweepConfig {
    pub n: u32,
    pub alpha: f64,
    pub mu: f64,
    pub p: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub r_max: f64,
    pub cells: usize,
    #[serde(default)]
    pub sim: SimOptions,
}

impl PdeSweepConfig {
    pub fn model(&self, epsilon: f64) -> Result<ModelParams> {
        ModelParams::new(self.n, self.alpha, self.mu, self.p, epsilon, self.radius)
    }

    pub fn grid(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.r_max, self.cells, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum SourceConfig {
    Ode(OdeSweepConfig),
    Pde(PdeSweepConfig),
}

impl SourceConfig {
    pub fn kind(&self) -> SourceKind {
        match self {
            SourceConfig::Ode(_) => SourceKind::Ode,
            SourceConfig::Pde(_) => SourceKind::Pde,
        }
    }

    pub fn p(&self) -> f64 {
        match self {
            SourceConfig::Ode(c) => c.p,
            SourceConfig::Pde(c) => c.p,
        }
    }

    /// Short content hash of the serialised configuration.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        digest_str(&json)
    }

    fn validate(&self) -> Result<()> {
        match self {
            SourceConfig::Ode(c) => {
                c.coefficient.validate().map_err(|e| Error::Config(e.to_string()))?;
                if !(c.p > 1.0 && c.mu >= 0.0 && c.t0 >= 1.0) {
                    return Err(Error::Config(
                        "ODE sweep needs p > 1, mu >= 0 and t0 >= 1".into(),
                    ));
                }
                if !(c.f0 >= 0.0 && c.f1 > 0.0) {
                    return Err(Error::Config("ODE sweep needs f0 >= 0 and f1 > 0".into()));
                }
                Ok(())
            }
            SourceConfig::Pde(c) => {
                let model = c.model(1.0).map_err(|e| Error::Config(e.to_string()))?;
                let grid = c.grid().map_err(|e| Error::Config(e.to_string()))?;
                check_boundary_clearance(&model, &grid, &c.sim)
            }
        }
    }

    /// Lifespan for one ε, or the reason there is none.
    fn run(&self, eps: f64) -> std::result::Result<f64, String> {
        let lifespan = match self {
            SourceConfig::Ode(c) => {
                let traj = integrate_kato(
                    c.mu,
                    c.p,
                    &c.coefficient,
                    eps * c.f0,
                    eps * c.f1,
                    c.t0,
                    &c.integrator,
                )
                .map_err(|e| e.to_string())?;
                match traj.terminated_reason {
                    OdeTermination::Threshold => traj.blowup_time,
                    OdeTermination::Horizon => return Err("reached horizon".into()),
                    OdeTermination::StepFloor => return Err("step floor".into()),
                }
            }
            SourceConfig::Pde(c) => {
                let model = c.model(eps).map_err(|e| e.to_string())?;
                let grid = c.grid().map_err(|e| e.to_string())?;
                let res = run_to_blowup(&model, &grid, &c.sim).map_err(|e| e.to_string())?;
                match res.terminated_reason {
                    SimTermination::Horizon => return Err("reached horizon".into()),
                    _ => res.lifespan_estimate,
                }
            }
        };
        match lifespan {
            Some(t) if t > 1.0 && t.is_finite() => Ok(t),
            Some(t) => Err(format!("implausible lifespan {t}")),
            None => Err("no lifespan".into()),
        }
    }
}

pub(crate) fn digest_str(s: &str) -> String {
    let hash = Sha256::digest(s.as_bytes());
    hex::encode(&hash[..8])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub epsilon: f64,
    pub lifespan: Option<f64>,
    pub source: SourceKind,
    pub config_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// One record per ε, in input order. Individual failures are recorded on the
/// record; only an invalid configuration fails the whole sweep.
pub fn sweep(config: &SourceConfig, eps_list: &[f64]) -> Result<Vec<SweepRecord>> {
    if eps_list.is_empty() {
        return Err(Error::Config("empty epsilon list".into()));
    }
    if let Some(bad) = eps_list.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::Config(format!("epsilon must be > 0, got {bad}")));
    }
    config.validate()?;
    let digest = config.digest();
    let source = config.kind();
    Ok(eps_list
        .par_iter()
        .map(|&eps| {
            let (lifespan, failure) = match config.run(eps) {
                Ok(t) => (Some(t), None),
                Err(why) => (None, Some(why)),
            };
            SweepRecord {
                epsilon: eps,
                lifespan,
                source,
                config_digest: digest.clone(),
                failure,
            }
        })
        .collect())
}

/// Geometric grid `2^{-k}` for `k = k_lo..=k_hi`, largest ε first.
pub fn dyadic_grid(k_lo: i32, k_hi: i32) -> Vec<f64> {
    (k_lo..=k_hi).map(|k| 2f64.powi(-k)).collect()
}

/// Whether lifespans are nonincreasing in ε, allowing a relative `slack`.
pub fn lifespans_monotone(records: &[SweepRecord], slack: f64) -> bool {
    let mut pts: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.lifespan.map(|t| (r.epsilon, t)))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + slack))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitTransform {
    /// `ln T` against `ln ε`.
    Loglog,
    /// `ln(T^2 (ln T)^{-n(p-1)})` against `ln ε`.
    LogCorrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    /// Allowed `|slope - theory| / |theory|`.
    pub tolerance: f64,
    pub r2_floor: f64,
    /// Drop the smallest-ε usable record.
    pub trim_smallest: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tolerance: 0.10,
            r2_floor: 0.98,
            trim_smallest: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub theory_slope: f64,
    pub relative_deviation: f64,
    /// Only ODE sweeps can pass: the proven rates are upper bounds, and only
    /// the ODE model is expected to saturate them.
    pub pass: bool,
    pub transform: FitTransform,
    pub n_points: usize,
    /// Records without a usable lifespan (or with T ≤ e under the corrected
    /// transform).
    pub excluded: usize,
    pub source: Option<SourceKind>,
    pub input_digest: String,
}

/// Ordinary least squares `y = slope x + intercept`, with `r²`.
pub fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let r2 = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    (slope, intercept, r2)
}

fn records_digest(records: &[SweepRecord]) -> String {
    digest_str(&serde_json::to_string(records).expect("records serialise"))
}

fn common_source(records: &[SweepRecord]) -> Option<SourceKind> {
    let first = records.first()?.source;
    records.iter().all(|r| r.source == first).then_some(first)
}

fn usable(records: &[SweepRecord], opts: &FitOptions) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.lifespan.map(|t| (r.epsilon, t)))
        .filter(|(e, t)| *e > 0.0 && t.is_finite() && *t > 0.0)
        .collect();
    if opts.trim_smallest && !pts.is_empty() {
        let (i, _) = pts
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
            .expect("nonempty");
        pts.remove(i);
    }
    pts
}

const MIN_POINTS: usize = 4;

fn finish(
    records: &[SweepRecord],
    xs: &[f64],
    ys: &[f64],
    theory: f64,
    transform: FitTransform,
    opts: &FitOptions,
) -> Result<FitResult> {
    if xs.len() < MIN_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_POINTS,
            got: xs.len(),
        });
    }
    let (slope, intercept, r2) = ols(xs, ys);
    let dev = (slope - theory).abs() / theory.abs();
    let source = common_source(records);
    Ok(FitResult {
        slope,
        intercept,
        r_squared: r2,
        theory_slope: theory,
        relative_deviation: dev,
        pass: source == Some(SourceKind::Ode) && dev <= opts.tolerance && r2 >= opts.r2_floor,
        transform,
        n_points: xs.len(),
        excluded: records.len() - xs.len(),
        source,
        input_digest: records_digest(records),
    })
}

/// Fits `ln T = slope ln ε + intercept`; theory slope `-(p-1)/2`.
pub fn fit_powerlaw(records: &[SweepRecord], p: f64, opts: &FitOptions) -> Result<FitResult> {
    let pts = usable(records, opts);
    let xs: Vec<f64> = pts.iter().map(|(e, _)| e.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, t)| t.ln()).collect();
    finish(records, &xs, &ys, -(p - 1.0) / 2.0, FitTransform::Loglog, opts)
}

/// Fits `ln(T^2 (ln T)^{-n(p-1)}) = slope ln ε + intercept`; theory slope
/// `-(p-1)`. Lifespans `T ≤ e` are excluded with a warning.
pub fn fit_log_corrected(
    records: &[SweepRecord],
    n: u32,
    p: f64,
    opts: &FitOptions,
) -> Result<FitResult> {
    let k = n as f64 * (p - 1.0);
    let mut pts = usable(records, opts);
    let before = pts.len();
    pts.retain(|(_, t)| *t > std::f64::consts::E);
    if pts.len() < before {
        log::warn!(
            "excluded {} records with lifespan <= e from the log-corrected fit",
            before - pts.len()
        );
    }
    let xs: Vec<f64> = pts.iter().map(|(e, _)| e.ln()).collect();
    let ys: Vec<f64> = pts
        .iter()
        .map(|(_, t)| 2.0 * t.ln() - k * t.ln().ln())
        .collect();
    finish(records, &xs, &ys, -(p - 1.0), FitTransform::LogCorrected, opts)
}
