mod commands;
mod config;
mod error;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cosmowave_core::kato::KatoParams;
use cosmowave_core::{
    Coefficient, FitOptions, FitTransform, IntegratorOptions, OdeSweepConfig, PdeSweepConfig,
    RegionGridSpec, SimOptions, SourceConfig,
};

use crate::config::{
    CertifyConfig, Command, ExponentsConfig, FitConfig, Lemma, OdeConfig, RegionsConfig,
    RunConfig, SimulateConfig, SweepConfig, SCHEMA_VERSION,
};
use crate::error::{CliError, CliResult};

/// Blow-up exponents, comparison ODEs and radial wave simulations for
/// semilinear waves on expanding FLRW backgrounds.
#[derive(Debug, Parser)]
#[command(name = "cosmowave", version)]
struct Cli {
    /// Read the full run configuration from a JSON file instead of flags.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Print a machine-readable JSON summary on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Directory for output files.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Accepted for interface stability; every command is deterministic.
    #[arg(long, global = true)]
    seedless: bool,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Critical exponents and the FLRW dictionary.
    Exponents(ExponentsArgs),
    /// Regime grids over the (w, p) plane with their boundary curves.
    Regions(RegionsArgs),
    /// Integrate the comparison ODE F'' + (mu/t) F' = K(t) |F|^p.
    Ode(OdeArgs),
    /// Simulate the radial PDE until blow-up or the horizon.
    Simulate(SimulateArgs),
    /// Lifespans over a list of data amplitudes.
    Sweep(SweepArgs),
    /// Scaling-law fit of a sweep.
    Fit(FitArgs),
    /// Iterate the lower-bound ladder and evaluate the lifespan bound.
    Certify(CertifyArgs),
}

#[derive(Debug, Args)]
struct ExponentsArgs {
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    w: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    /// Evaluate the polynomials and the regime at this power.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    allow_w_above_one: bool,
}

#[derive(Debug, Args)]
struct RegionsArgs {
    /// Dimension; repeat for several grids. Defaults to 2, 3 and 5.
    #[arg(long = "n")]
    n: Vec<u32>,
    #[arg(long, default_value_t = 200)]
    resolution: usize,
    #[arg(long, allow_hyphen_values = true)]
    w_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    w_max: Option<f64>,
    #[arg(long)]
    p_min: Option<f64>,
    #[arg(long)]
    p_max: Option<f64>,
}

#[derive(Debug, Args)]
struct CoefficientArgs {
    /// Constant coefficient K = A1 (the default, with A1 = 1).
    #[arg(long = "A1", alias = "a1")]
    a1: Option<f64>,
    /// Cone coefficient K = (R + A(t))^{-n(p-1)}: the radius R.
    #[arg(long)]
    cone_r: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    cone_alpha: f64,
    #[arg(long)]
    cone_n: Option<u32>,
}

impl CoefficientArgs {
    fn build(&self, p: f64) -> CliResult<Coefficient> {
        match (self.cone_r, self.a1) {
            (Some(_), Some(_)) => Err(CliError::Invalid(
                "give either --A1 or the --cone-* options, not both".into(),
            )),
            (Some(radius), None) => Ok(Coefficient::Cone {
                radius,
                alpha: self.cone_alpha,
                n: self
                    .cone_n
                    .ok_or_else(|| CliError::Invalid("--cone-n is required with --cone-r".into()))?,
                p,
            }),
            (None, a1) => Ok(Coefficient::Constant {
                a1: a1.unwrap_or(1.0),
            }),
        }
    }
}

#[derive(Debug, Args)]
struct IntegratorArgs {
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    /// F value at which blow-up is declared.
    #[arg(long)]
    ode_threshold: Option<f64>,
    #[arg(long)]
    ode_horizon: Option<f64>,
}

impl IntegratorArgs {
    fn build(&self) -> IntegratorOptions {
        let d = IntegratorOptions::default();
        IntegratorOptions {
            rtol: self.rtol.unwrap_or(d.rtol),
            atol: self.atol.unwrap_or(d.atol),
            threshold: self.ode_threshold.unwrap_or(d.threshold),
            horizon: self.ode_horizon.unwrap_or(d.horizon),
            ..d
        }
    }
}

#[derive(Debug, Args)]
struct OdeArgs {
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[command(flatten)]
    coefficient: CoefficientArgs,
    #[arg(long = "F0", alias = "f0", default_value_t = 1.0)]
    f0: f64,
    #[arg(long = "F1", alias = "f1", default_value_t = 1.0)]
    f1: f64,
    #[arg(long, default_value_t = 1.0)]
    t0: f64,
    #[command(flatten)]
    integrator: IntegratorArgs,
}

#[derive(Debug, Args)]
struct SimArgs {
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    cfl: Option<f64>,
}

impl SimArgs {
    fn build(&self) -> SimOptions {
        let d = SimOptions::default();
        SimOptions {
            threshold: self.threshold.unwrap_or(d.threshold),
            horizon: self.horizon.unwrap_or(d.horizon),
            stride: self.stride.unwrap_or(d.stride),
            cfl: self.cfl.or(d.cfl),
            ..d
        }
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    n: Option<u32>,
    /// Derive alpha and mu from the equation of state instead.
    #[arg(long, allow_hyphen_values = true)]
    w: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, alias = "eps")]
    epsilon: Option<f64>,
    #[arg(long = "R", alias = "radius", default_value_t = 1.0)]
    radius: f64,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    cells: usize,
    #[command(flatten)]
    sim: SimArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SourceArg {
    Ode,
    Pde,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value = "ode")]
    source: SourceArg,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    /// Dyadic grid such as `2^-6..2^-16`.
    #[arg(long, conflicts_with = "eps")]
    eps_grid: Option<String>,
    /// Comma-separated amplitudes.
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    #[command(flatten)]
    coefficient: CoefficientArgs,
    #[arg(long = "F0", alias = "f0", default_value_t = 1.0)]
    f0: f64,
    #[arg(long = "F1", alias = "f1", default_value_t = 1.0)]
    f1: f64,
    #[arg(long, default_value_t = 1.0)]
    t0: f64,
    #[command(flatten)]
    integrator: IntegratorArgs,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "R", alias = "radius", default_value_t = 1.0)]
    radius: f64,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    cells: usize,
    #[command(flatten)]
    sim: SimArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TransformArg {
    Loglog,
    LogCorrected,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Sweep output; defaults to `sweep.json` in the output directory.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "loglog")]
    transform: TransformArg,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    r2_floor: Option<f64>,
    #[arg(long)]
    trim_smallest: bool,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    /// 23 (logarithmic weights) or 33 (pure powers).
    #[arg(long)]
    lemma: Option<String>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    c: f64,
    #[arg(long, default_value_t = 0.0)]
    q: f64,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long = "A0")]
    a0: Option<f64>,
    #[arg(long = "A1")]
    a1: Option<f64>,
    #[arg(long = "T0", default_value_t = 2.0)]
    t0: f64,
    #[arg(long = "T1", default_value_t = 3.0)]
    t1: f64,
    /// Normalisation constant of the bound.
    #[arg(long = "C", default_value_t = 1.0)]
    c_norm: f64,
    #[arg(long, default_value_t = 10)]
    iterations: u32,
}

fn need<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Invalid(format!("missing required option --{flag}")))
}

/// `2^-a..2^-b` into the dyadic amplitudes.
fn parse_eps_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Invalid(format!("cannot parse eps grid {spec:?}; expected 2^-K..2^-L"));
    let (lo, hi) = spec.split_once("..").ok_or_else(bad)?;
    let exponent = |s: &str| -> CliResult<i32> {
        s.trim()
            .strip_prefix("2^")
            .and_then(|e| e.parse::<i32>().ok())
            .ok_or_else(bad)
    };
    let (a, b) = (-exponent(lo)?, -exponent(hi)?);
    if a > b {
        return Err(bad());
    }
    Ok(cosmowave_core::sweep::dyadic_grid(a, b))
}

fn command_from_flags(sub: &Sub, out: Option<&PathBuf>) -> CliResult<Command> {
    Ok(match sub {
        Sub::Exponents(a) => Command::Exponents(ExponentsConfig {
            n: need(a.n, "n")?,
            w: a.w,
            alpha: a.alpha,
            mu: a.mu,
            p: a.p,
            allow_w_above_one: a.allow_w_above_one,
        }),
        Sub::Regions(a) => {
            let d = RegionGridSpec::default();
            Command::Regions(RegionsConfig {
                dimensions: if a.n.is_empty() { vec![2, 3, 5] } else { a.n.clone() },
                grid: RegionGridSpec {
                    resolution_w: a.resolution,
                    resolution_p: a.resolution,
                    w_min: a.w_min.unwrap_or(d.w_min),
                    w_max: a.w_max.unwrap_or(d.w_max),
                    p_min: a.p_min.unwrap_or(d.p_min),
                    p_max: a.p_max.unwrap_or(d.p_max),
                },
            })
        }
        Sub::Ode(a) => {
            let p = need(a.p, "p")?;
            Command::Ode(OdeConfig {
                mu: need(a.mu, "mu")?,
                p,
                coefficient: a.coefficient.build(p)?,
                f0: a.f0,
                f1: a.f1,
                t0: a.t0,
                integrator: a.integrator.build(),
            })
        }
        Sub::Simulate(a) => {
            let n = need(a.n, "n")?;
            let (alpha, mu) = match (a.w, a.alpha, a.mu) {
                (Some(w), None, None) => {
                    let f = cosmowave_core::FlrwParams::new(n, w)?;
                    (f.alpha(), f.mu())
                }
                (None, Some(alpha), Some(mu)) => (alpha, mu),
                _ => {
                    return Err(CliError::Invalid(
                        "give either --w or both --alpha and --mu".into(),
                    ))
                }
            };
            Command::Simulate(SimulateConfig {
                n,
                alpha,
                mu,
                p: need(a.p, "p")?,
                epsilon: need(a.epsilon, "epsilon")?,
                radius: a.radius,
                r_max: a.r_max,
                cells: a.cells,
                sim: a.sim.build(),
            })
        }
        Sub::Sweep(a) => {
            let p = need(a.p, "p")?;
            let mu = need(a.mu, "mu")?;
            let eps = match &a.eps_grid {
                Some(spec) => parse_eps_grid(spec)?,
                None if !a.eps.is_empty() => a.eps.clone(),
                None => cosmowave_core::sweep::dyadic_grid(6, 16),
            };
            let source = match a.source {
                SourceArg::Ode => SourceConfig::Ode(OdeSweepConfig {
                    mu,
                    p,
                    coefficient: a.coefficient.build(p)?,
                    f0: a.f0,
                    f1: a.f1,
                    t0: a.t0,
                    integrator: a.integrator.build(),
                }),
                SourceArg::Pde => {
                    let n = need(a.n, "n")?;
                    let alpha = need(a.alpha, "alpha")?;
                    let sim = a.sim.build();
                    let r_max = match a.r_max {
                        Some(r) => r,
                        None => commands::auto_r_max(alpha, a.radius, a.cells, &sim)?,
                    };
                    SourceConfig::Pde(PdeSweepConfig {
                        n,
                        alpha,
                        mu,
                        p,
                        radius: a.radius,
                        r_max,
                        cells: a.cells,
                        sim,
                    })
                }
            };
            Command::Sweep(SweepConfig { source, eps })
        }
        Sub::Fit(a) => {
            let d = FitOptions::default();
            let input = match &a.input {
                Some(p) => p.clone(),
                None => out.cloned().unwrap_or_else(|| PathBuf::from(".")).join("sweep.json"),
            };
            Command::Fit(FitConfig {
                input,
                transform: match a.transform {
                    TransformArg::Loglog => FitTransform::Loglog,
                    TransformArg::LogCorrected => FitTransform::LogCorrected,
                },
                p: a.p,
                n: a.n,
                options: FitOptions {
                    tolerance: a.tolerance.unwrap_or(d.tolerance),
                    r2_floor: a.r2_floor.unwrap_or(d.r2_floor),
                    trim_smallest: a.trim_smallest,
                },
            })
        }
        Sub::Certify(a) => {
            let lemma = match need(a.lemma.as_deref(), "lemma")? {
                "23" | "2.3" => Lemma::L23,
                "33" | "3.3" => Lemma::L33,
                other => return Err(CliError::Invalid(format!("unknown lemma {other:?}; use 23 or 33"))),
            };
            Command::Certify(CertifyConfig {
                lemma,
                params: KatoParams {
                    a: need(a.a, "a")?,
                    b: need(a.b, "b")?,
                    c: a.c,
                    q: a.q,
                    mu: need(a.mu, "mu")?,
                    p: need(a.p, "p")?,
                    a0: need(a.a0, "A0")?,
                    a1: need(a.a1, "A1")?,
                    t0: a.t0,
                    t1: a.t1,
                },
                c: a.c_norm,
                iterations: a.iterations,
            })
        }
    })
}

fn sub_name(sub: &Sub) -> &'static str {
    match sub {
        Sub::Exponents(_) => "exponents",
        Sub::Regions(_) => "regions",
        Sub::Ode(_) => "ode",
        Sub::Simulate(_) => "simulate",
        Sub::Sweep(_) => "sweep",
        Sub::Fit(_) => "fit",
        Sub::Certify(_) => "certify",
    }
}

fn load_config(path: &PathBuf, expected: &str) -> CliResult<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    if cfg.schema != SCHEMA_VERSION {
        return Err(CliError::Invalid(format!(
            "unsupported config schema {} (this build reads {SCHEMA_VERSION})",
            cfg.schema
        )));
    }
    if cfg.command.name() != expected {
        return Err(CliError::Invalid(format!(
            "config describes `{}` but `{expected}` was invoked",
            cfg.command.name()
        )));
    }
    Ok(cfg)
}

fn configure_threads() -> CliResult<()> {
    if let Ok(raw) = std::env::var("COSMOWAVE_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Invalid(format!("COSMOWAVE_THREADS must be a positive integer, got {raw:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Invalid(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    configure_threads()?;
    let cfg = match &cli.config {
        Some(path) => load_config(path, sub_name(&cli.command))?,
        None => RunConfig::new(command_from_flags(&cli.command, cli.out.as_ref())?),
    };
    let ctx = commands::Context {
        json: cli.json,
        out: cli.out.clone(),
    };
    commands::execute(&cfg, &ctx)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
