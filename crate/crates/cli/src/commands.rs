use std::fs;
use std::path::{Path, PathBuf};

use cosmowave_core::kato::divergence_onset;
use cosmowave_core::{
    classify_regime, fit_log_corrected, fit_powerlaw, gamma, gamma_s, integrate_kato, kato_bound,
    kato_sequences, p_crit, p_fujita, p_strauss, run_to_blowup, sweep, verify_cone, w_star,
    Coefficient, Error as CoreError, FitResult, FitTransform, FlrwParams, LemmaVariant, LightCone,
    ModelParams, OdeTermination, RadialGrid, Regime, RegimeReport, RegionGrid, SimOptions,
    SimTermination, SourceConfig, SourceKind, SweepRecord,
};
use serde::{Deserialize, Serialize};

use crate::config::{
    CertifyConfig, Command, ExponentsConfig, FitConfig, Lemma, OdeConfig, RegionsConfig,
    RunConfig, SimulateConfig, SweepConfig,
};
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, write_csv, write_json};

pub struct Context {
    pub json: bool,
    pub out: Option<PathBuf>,
}

impl Context {
    /// Output directory for commands that always write files.
    fn out_dir(&self) -> CliResult<PathBuf> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from("."));
        ensure_dir(&dir)?;
        Ok(dir)
    }
}

/// Printed with `--json` and written next to the data files.
#[derive(Debug, Serialize)]
struct Summary<'a, T: Serialize> {
    schema: u32,
    command: &'static str,
    config: &'a RunConfig,
    result: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostics: Option<serde_json::Value>,
    files: Vec<String>,
}

fn summary<'a, T: Serialize>(cfg: &'a RunConfig, result: T) -> Summary<'a, T> {
    Summary {
        schema: cfg.schema,
        command: cfg.command.name(),
        config: cfg,
        result,
        diagnostics: None,
        files: Vec::new(),
    }
}

fn path_string(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn emit<T: Serialize>(ctx: &Context, s: &Summary<T>, human: &str) {
    if ctx.json {
        println!("{}", serde_json::to_string_pretty(s).expect("summary serialises"));
    } else {
        print!("{human}");
    }
}

/// Compact human formatting of a float.
fn num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let a = x.abs();
    if (1e-4..1e10).contains(&a) {
        let s = format!("{x:.10}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{x:.6e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "none".to_string(), num)
}

/// Smallest `r_max` that keeps the cone at the horizon, plus the margin and
/// two spare cells, inside the grid.
pub fn auto_r_max(alpha: f64, radius: f64, cells: usize, sim: &SimOptions) -> CliResult<f64> {
    if !(alpha >= 1.0) {
        return Err(CliError::Invalid(format!(
            "the simulator covers alpha >= 1 only, got {alpha}"
        )));
    }
    let spare = sim.margin_cells + 2;
    if cells <= 2 * spare {
        return Err(CliError::Invalid(format!("need more than {} cells", 2 * spare)));
    }
    let reach = radius + LightCone::extent(alpha, sim.horizon);
    Ok(reach / (1.0 - spare as f64 / cells as f64))
}

pub fn execute(cfg: &RunConfig, ctx: &Context) -> CliResult<()> {
    match &cfg.command {
        Command::Exponents(c) => exponents(cfg, c, ctx),
        Command::Regions(c) => regions(cfg, c, ctx),
        Command::Ode(c) => ode(cfg, c, ctx),
        Command::Simulate(c) => simulate(cfg, c, ctx),
        Command::Sweep(c) => run_sweep(cfg, c, ctx),
        Command::Fit(c) => fit(cfg, c, ctx),
        Command::Certify(c) => certify(cfg, c, ctx),
    }
}

#[derive(Debug, Serialize)]
struct ExponentsReport {
    n: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    w: Option<f64>,
    alpha: f64,
    mu: f64,
    accelerated: bool,
    uniformly_accelerated: bool,
    /// p_F(n(1-α)), when n(1-α) > 0.
    p_fujita: Option<f64>,
    p_strauss: f64,
    /// Positive root of γ₀ (cosmological input) or of γ (α < 1).
    p_crit: Option<f64>,
    w_star: Option<f64>,
    p: Option<f64>,
    gamma_s: Option<f64>,
    gamma: Option<f64>,
    gamma0: Option<f64>,
    regime: Option<Regime>,
    classification: Option<RegimeReport>,
}

fn exponents(cfg: &RunConfig, c: &ExponentsConfig, ctx: &Context) -> CliResult<()> {
    let n = c.n;
    if n < 2 {
        return Err(CliError::Invalid(format!("n must be >= 2, got {n}")));
    }
    let report = match (c.w, c.alpha, c.mu) {
        (Some(w), None, None) => {
            let f = if c.allow_w_above_one {
                FlrwParams::new_extended(n, w)?
            } else {
                FlrwParams::new(n, w)?
            };
            let d = f.fujita_dimension();
            let classification = match c.p {
                Some(p) if w <= 1.0 => Some(classify_regime(n, w, p)?),
                _ => None,
            };
            let regime = if f.accelerated() {
                Some(Regime::AAccelerated)
            } else {
                classification.as_ref().map(|r| r.regime)
            };
            let alpha = f.alpha();
            ExponentsReport {
                n,
                w: Some(w),
                alpha,
                mu: f.mu(),
                accelerated: f.accelerated(),
                uniformly_accelerated: f.uniformly_accelerated(),
                p_fujita: if d > 0.0 { Some(p_fujita(d)?) } else { None },
                p_strauss: p_strauss(n)?,
                p_crit: Some(f.p_crit()),
                w_star: w_star(n)?,
                p: c.p,
                gamma_s: c.p.map(|p| gamma_s(n, p)),
                gamma: match c.p {
                    Some(p) if alpha < 1.0 => Some(gamma(n, p, alpha, f.mu())?),
                    _ => None,
                },
                gamma0: c.p.map(|p| f.gamma0(p)),
                regime,
                classification,
            }
        }
        (None, Some(alpha), Some(mu)) => {
            ModelParams::new(n, alpha, mu, c.p.unwrap_or(2.0), 1.0, 1.0)?;
            let d = n as f64 * (1.0 - alpha);
            let pc = if alpha < 1.0 {
                match p_crit(n, alpha, mu) {
                    Ok(v) => Some(v),
                    Err(CoreError::Domain(msg)) => {
                        log::warn!("no critical exponent: {msg}");
                        None
                    }
                    Err(e) => return Err(e.into()),
                }
            } else {
                None
            };
            ExponentsReport {
                n,
                w: None,
                alpha,
                mu,
                accelerated: alpha >= 1.0,
                uniformly_accelerated: alpha == 1.0,
                p_fujita: if d > 0.0 { Some(p_fujita(d)?) } else { None },
                p_strauss: p_strauss(n)?,
                p_crit: pc,
                w_star: w_star(n)?,
                p: c.p,
                gamma_s: c.p.map(|p| gamma_s(n, p)),
                gamma: match c.p {
                    Some(p) if alpha < 1.0 => Some(gamma(n, p, alpha, mu)?),
                    _ => None,
                },
                gamma0: None,
                regime: (alpha >= 1.0).then_some(Regime::AAccelerated),
                classification: None,
            }
        }
        _ => {
            return Err(CliError::Invalid(
                "give either --w or both --alpha and --mu".into(),
            ))
        }
    };

    let mut human = String::new();
    if let Some(w) = report.w {
        human += &format!("n = {n}, w = {}\n", num(w));
    } else {
        human += &format!("n = {n}\n");
    }
    human += &format!("alpha = {}\nmu = {}\n", num(report.alpha), num(report.mu));
    human += &format!(
        "expansion = {}\n",
        match (report.accelerated, report.uniformly_accelerated) {
            (true, true) => "uniformly accelerated",
            (true, false) => "accelerated",
            _ => "decelerated",
        }
    );
    human += &format!("p_F = {}\np_S = {}\np_c = {}\n", opt(report.p_fujita), num(report.p_strauss), opt(report.p_crit));
    human += &format!("w* = {}\n", opt(report.w_star));
    if let Some(p) = report.p {
        human += &format!(
            "at p = {}: gamma_S = {}, gamma = {}, gamma0 = {}\n",
            num(p),
            opt(report.gamma_s),
            opt(report.gamma),
            opt(report.gamma0)
        );
    }
    if let Some(r) = report.regime {
        human += &format!("regime = {}\n", r.label());
    }
    if let Some(cl) = &report.classification {
        human += &format!("bound = {}\n", cl.applicable_bound);
    }

    let mut s = summary(cfg, &report);
    if let Some(dir) = &ctx.out {
        ensure_dir(dir)?;
        let path = dir.join("exponents.json");
        s.files.push(path_string(&path));
        write_json(&path, &s)?;
    }
    emit(ctx, &s, &human);
    Ok(())
}

fn regions(cfg: &RunConfig, c: &RegionsConfig, ctx: &Context) -> CliResult<()> {
    if c.dimensions.is_empty() {
        return Err(CliError::Invalid("no dimensions requested".into()));
    }
    let grids = c
        .dimensions
        .iter()
        .map(|&n| RegionGrid::build(n, &c.grid))
        .collect::<Result<Vec<_>, _>>()?;
    let dir = ctx.out_dir()?;
    let mut files = Vec::new();
    let mut human = String::new();
    for g in &grids {
        let stem = format!("regions_n{}", g.n);
        let table = dir.join(format!("{stem}.csv"));
        write_csv(&table, &["w", "p", "label"], g.rows())?;
        files.push(path_string(&table));
        for curve in &g.boundary_curves {
            let path = dir.join(format!("{stem}_{}.csv", curve.name));
            write_csv(&path, &["w", "p"], curve.points.iter().map(|[w, p]| (w, p)))?;
            files.push(path_string(&path));
        }
        let json = dir.join(format!("{stem}.json"));
        write_json(&json, g)?;
        files.push(path_string(&json));

        let count = |r: Regime| g.rows().filter(|row| row.2 == r).count();
        human += &format!(
            "n = {}: {}x{} grid, A {} / B {} / C {} / none {}; curves {}\n",
            g.n,
            g.w_axis.len(),
            g.p_axis.len(),
            count(Regime::AAccelerated),
            count(Regime::BWavelike),
            count(Regime::CHeatlike),
            count(Regime::NoBlowupProved),
            g.boundary_curves
                .iter()
                .map(|c| c.name.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        );
    }

    #[derive(Serialize)]
    struct GridSummary {
        n: u32,
        w_points: usize,
        p_points: usize,
        curves: Vec<String>,
    }
    let result: Vec<GridSummary> = grids
        .iter()
        .map(|g| GridSummary {
            n: g.n,
            w_points: g.w_axis.len(),
            p_points: g.p_axis.len(),
            curves: g.boundary_curves.iter().map(|c| c.name.clone()).collect(),
        })
        .collect();
    let mut s = summary(cfg, result);
    s.files = files;
    emit(ctx, &s, &human);
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct OdeResult {
    blowup_time: Option<f64>,
    terminated_reason: OdeTermination,
    points: usize,
    t_last: f64,
    #[serde(rename = "F_last")]
    f_last: f64,
    #[serde(rename = "Fprime_last")]
    fprime_last: f64,
}

fn ode(cfg: &RunConfig, c: &OdeConfig, ctx: &Context) -> CliResult<()> {
    let traj = integrate_kato(c.mu, c.p, &c.coefficient, c.f0, c.f1, c.t0, &c.integrator)?;
    let dir = ctx.out_dir()?;
    let csv_path = dir.join("ode_trajectory.csv");
    write_csv(
        &csv_path,
        &["t", "F", "Fprime"],
        traj.times
            .iter()
            .zip(traj.f.iter().zip(&traj.fp))
            .map(|(t, (f, fp))| (t, f, fp)),
    )?;
    let (t_last, f_last, fprime_last) = traj.last();
    let result = OdeResult {
        blowup_time: traj.blowup_time,
        terminated_reason: traj.terminated_reason,
        points: traj.times.len(),
        t_last,
        f_last,
        fprime_last,
    };
    let json_path = dir.join("ode.json");
    let mut s = summary(cfg, &result);
    s.files = vec![path_string(&csv_path), path_string(&json_path)];
    write_json(&json_path, &s)?;
    let human = format!(
        "blow-up time = {}\ntermination = {:?}\nsteps recorded = {}\n",
        opt(result.blowup_time),
        result.terminated_reason,
        result.points
    );
    emit(ctx, &s, &human);
    if traj.terminated_reason == OdeTermination::StepFloor {
        return Err(CliError::Abnormal(format!(
            "step size fell below the floor at t = {}",
            num(t_last)
        )));
    }
    Ok(())
}

fn simulate(cfg: &RunConfig, c: &SimulateConfig, ctx: &Context) -> CliResult<()> {
    let params = ModelParams::new(c.n, c.alpha, c.mu, c.p, c.epsilon, c.radius)?;
    let r_max = match c.r_max {
        Some(r) => r,
        None => auto_r_max(c.alpha, c.radius, c.cells, &c.sim)?,
    };
    let grid = RadialGrid::new(r_max, c.cells, c.n)?;
    let result = run_to_blowup(&params, &grid, &c.sim)?;
    let cone = verify_cone(&result, &LightCone::new(c.alpha, c.radius)?);

    let dir = ctx.out_dir()?;
    let csv_path = dir.join("simulate_history.csv");
    write_csv(
        &csv_path,
        &["t", "max_u", "support_r", "F", "Fprime"],
        result
            .samples
            .iter()
            .map(|s| (s.t, s.max_u, s.support_r, s.f, s.fprime)),
    )?;
    let json_path = dir.join("simulate.json");
    let mut s = summary(cfg, &result);
    s.diagnostics = Some(serde_json::json!({ "cone": cone }));
    s.files = vec![path_string(&csv_path), path_string(&json_path)];
    write_json(&json_path, &s)?;
    let human = format!(
        "lifespan = {}\ntermination = {:?}\nsteps = {}, h = {}, dt = {}\ncone excess = {} h\n",
        opt(result.lifespan_estimate),
        result.terminated_reason,
        result.steps,
        num(result.h),
        num(result.dt),
        num(cone.max_violation_h)
    );
    emit(ctx, &s, &human);
    if result.terminated_reason == SimTermination::NonFinite {
        return Err(CliError::Abnormal("the solution stopped being finite".into()));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct RecordRow {
    epsilon: f64,
    lifespan: Option<f64>,
    source: SourceKind,
}

fn run_sweep(cfg: &RunConfig, c: &SweepConfig, ctx: &Context) -> CliResult<()> {
    let records = sweep(&c.source, &c.eps)?;
    let dir = ctx.out_dir()?;
    let csv_path = dir.join("sweep_records.csv");
    write_csv(
        &csv_path,
        &["epsilon", "lifespan", "source"],
        records.iter().map(|r| RecordRow {
            epsilon: r.epsilon,
            lifespan: r.lifespan,
            source: r.source,
        }),
    )?;
    let json_path = dir.join("sweep.json");
    let mut s = summary(cfg, &records);
    s.files = vec![path_string(&csv_path), path_string(&json_path)];
    write_json(&json_path, &s)?;
    let mut human = format!("config digest {}\n", c.source.digest());
    for r in &records {
        human += &format!(
            "eps = {:<14} T = {}{}\n",
            num(r.epsilon),
            opt(r.lifespan),
            r.failure.as_ref().map(|f| format!(" ({f})")).unwrap_or_default()
        );
    }
    emit(ctx, &s, &human);
    Ok(())
}

/// Records plus whatever the producing sweep says about `p` and `n`.
fn load_records(path: &Path) -> CliResult<(Vec<SweepRecord>, Option<SourceConfig>)> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let invalid = |e: String| CliError::Invalid(format!("{}: {e}", path.display()));
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let mut records = Vec::new();
        for row in rdr.deserialize::<RecordRow>() {
            let row = row.map_err(|e| invalid(e.to_string()))?;
            records.push(SweepRecord {
                epsilon: row.epsilon,
                lifespan: row.lifespan,
                source: row.source,
                config_digest: "csv".into(),
                failure: None,
            });
        }
        return Ok((records, None));
    }
    #[derive(Deserialize)]
    struct SweepFile {
        config: RunConfig,
        result: Vec<SweepRecord>,
    }
    let file: SweepFile = serde_json::from_str(&text).map_err(|e| invalid(e.to_string()))?;
    match file.config.command {
        Command::Sweep(sc) => Ok((file.result, Some(sc.source))),
        other => Err(invalid(format!("expected a sweep output, found `{}`", other.name()))),
    }
}

fn fit(cfg: &RunConfig, c: &FitConfig, ctx: &Context) -> CliResult<()> {
    let (records, source) = load_records(&c.input)?;
    let p = c
        .p
        .or(source.map(|s| s.p()))
        .ok_or_else(|| CliError::Invalid("p is unknown; pass --p".into()))?;
    let result: FitResult = match c.transform {
        FitTransform::Loglog => fit_powerlaw(&records, p, &c.options)?,
        FitTransform::LogCorrected => {
            let n = c
                .n
                .or(match source {
                    Some(SourceConfig::Pde(pc)) => Some(pc.n),
                    Some(SourceConfig::Ode(oc)) => match oc.coefficient {
                        Coefficient::Cone { n, .. } => Some(n),
                        Coefficient::Constant { .. } => None,
                    },
                    None => None,
                })
                .ok_or_else(|| CliError::Invalid("n is unknown; pass --n".into()))?;
            fit_log_corrected(&records, n, p, &c.options)?
        }
    };
    let dir = ctx.out_dir()?;
    let json_path = dir.join("fit.json");
    let mut s = summary(cfg, &result);
    s.files = vec![path_string(&json_path)];
    write_json(&json_path, &s)?;
    let human = format!(
        "slope = {} (theory {}, deviation {}%)\nr^2 = {}\npoints = {} (excluded {})\npass = {}\n",
        num(result.slope),
        num(result.theory_slope),
        num(100.0 * result.relative_deviation),
        num(result.r_squared),
        result.n_points,
        result.excluded,
        result.pass
    );
    emit(ctx, &s, &human);
    Ok(())
}

#[derive(Debug, Serialize)]
struct CertifyReport {
    lemma: Lemma,
    #[serde(rename = "M")]
    m: f64,
    #[serde(rename = "E")]
    e: f64,
    #[serde(rename = "B")]
    b: f64,
    /// Lifespan bound, absent when the target lies below the attainable range.
    bound: Option<f64>,
    bound_note: Option<String>,
    /// First time past T1 at which the ladder provably diverges.
    divergence_onset: Option<f64>,
    iterates: Vec<cosmowave_core::kato::KatoIterate>,
    overflowed: bool,
}

fn certify(cfg: &RunConfig, c: &CertifyConfig, ctx: &Context) -> CliResult<()> {
    let variant = match c.lemma {
        Lemma::L23 => LemmaVariant::Lemma23,
        Lemma::L33 => LemmaVariant::Lemma33,
    };
    let seq = kato_sequences(&c.params, variant, c.iterations)?;
    let (bound, bound_note) = match kato_bound(&c.params, variant, c.c) {
        Ok(b) => (Some(b), None),
        Err(CoreError::NoSolution(msg)) => (None, Some(msg)),
        Err(e) => return Err(e.into()),
    };
    let onset = match divergence_onset(&c.params, variant) {
        Ok(t) => Some(t),
        Err(CoreError::NoSolution(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let report = CertifyReport {
        lemma: c.lemma,
        m: c.params.m(variant),
        e: seq.e,
        b: seq.b,
        bound,
        bound_note,
        divergence_onset: onset,
        iterates: seq.iterates,
        overflowed: seq.overflowed,
    };
    let mut human = format!(
        "M = {}\nE = {}\nB = {}\nbound = {}\n",
        num(report.m),
        num(report.e),
        num(report.b),
        opt(report.bound)
    );
    if let Some(note) = &report.bound_note {
        human += &format!("note: {note}\n");
    }
    human += &format!("divergence onset t = {}\n", opt(report.divergence_onset));
    let mut s = summary(cfg, &report);
    if let Some(dir) = &ctx.out {
        ensure_dir(dir)?;
        let path = dir.join("certify.json");
        s.files.push(path_string(&path));
        write_json(&path, &s)?;
    }
    emit(ctx, &s, &human);
    Ok(())
}
