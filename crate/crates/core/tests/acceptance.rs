//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `RECORDED_RED` are known not to hold for this
//! implementation; the analysis lives in the project's decisions log. They are
//! still evaluated and printed as FAIL, and the run only exits non-zero when a
//! criterion outside that list fails or one on it starts passing unnoticed.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use rayon::prelude::*;

use cosmowave_core::sweep::dyadic_grid;
use cosmowave_core::{
    fit_log_corrected, fit_powerlaw, gamma, gamma0, integrate_kato, kato_bound, kato_sequences,
    p_crit, p_crit_flrw, p_fujita, p_strauss, run_to_blowup, sweep, verify_cone, w_star,
    Coefficient, FitOptions, FlrwParams, IntegratorOptions, KatoParams, LemmaVariant, LightCone,
    ModelParams, OdeSweepConfig, OdeTermination, PdeSweepConfig, RadialGrid, SimOptions,
    SimResult, SimTermination, SourceConfig,
};

const RECORDED_RED: &[u32] = &[7, 9];

type Row = (u32, &'static str, Duration, Verdict, Duration);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn c1_exponent_identities() -> Verdict {
    let mut worst_strauss = 0.0f64;
    for n in 2..=10 {
        let d = (p_crit(n, 0.0, 0.0).unwrap() - p_strauss(n).unwrap()).abs();
        worst_strauss = worst_strauss.max(d);
    }
    let mut worst_factor = 0.0f64;
    let mut checked = 0;
    for n in 2..=51u32 {
        for k in 1..=50 {
            let w = -1.0 + 2.0 * k as f64 / 50.0;
            let alpha = 2.0 / (n as f64 * (1.0 + w));
            if alpha >= 1.0 {
                continue;
            }
            let mu = 2.0 / (1.0 + w);
            for p in [1.5, 2.0, 3.0, 5.0] {
                let lhs = gamma0(n, p, w).unwrap();
                let rhs = (1.0 - alpha) * gamma(n, p, alpha, mu).unwrap();
                worst_factor = worst_factor.max((lhs - rhs).abs());
                checked += 1;
            }
        }
    }
    verdict(
        worst_strauss <= 1e-12 && worst_factor <= 1e-10,
        format!(
            "max |p_c(n,0,0)-p_S(n)| = {worst_strauss:.1e}, max factorization gap = {worst_factor:.1e} over {checked} points"
        ),
    )
}

fn c2_w_star() -> Verdict {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for n in [2u32, 3, 5] {
        let ws = w_star(n).unwrap().unwrap();
        let pf = p_fujita(FlrwParams::new(n, ws).unwrap().fujita_dimension()).unwrap();
        let gap = (pf - p_crit_flrw(n, ws).unwrap()).abs();
        worst = worst.max(gap);
        parts.push(format!("w*({n}) = {ws:.10}"));
    }
    verdict(worst <= 1e-8, format!("{}, max gap {worst:.1e}", parts.join(", ")))
}

fn c3_closed_form_blowup() -> Verdict {
    let s = 2f64.sqrt();
    let traj = integrate_kato(
        0.0,
        3.0,
        &Coefficient::Constant { a1: 1.0 },
        s,
        s,
        0.0,
        &IntegratorOptions::default(),
    )
    .unwrap();
    let t = traj.blowup_time.unwrap_or(f64::NAN);
    verdict(
        traj.terminated_reason == OdeTermination::Threshold && (t - 1.0).abs() <= 1e-3,
        format!("blow-up time {t:.9} (exact 1)"),
    )
}

fn c4_kato_machinery() -> Verdict {
    let strategy = (
        0.0f64..4.0,
        0.1f64..6.0,
        0.1f64..6.0,
        0.1f64..4.0,
        0.0f64..5.0,
        1.1f64..4.0,
        -12.0f64..2.0,
        0.05f64..5.0,
        0.5f64..50.0,
    );
    let mut runner = TestRunner::deterministic();
    let mut worst_seq = 0.0f64;
    let mut worst_res = 0.0f64;
    let mut draws = 0;
    let mut no_root = 0;
    while draws < 20 {
        let (a, b, c, q, mu, p, ln_a0, a1, cn) = strategy.new_tree(&mut runner).unwrap().current();
        let k = KatoParams { a, b, c, q, mu, p, a0: ln_a0.exp(), a1, t0: 2.0, t1: 3.0 };
        for variant in [LemmaVariant::Lemma23, LemmaVariant::Lemma33] {
            if k.validate(variant).is_err() {
                continue;
            }
            let seq = kato_sequences(&k, variant, 30).unwrap();
            for it in &seq.iterates {
                let (ca, cb, cc) = k.closed_form(variant, it.j);
                for (x, y) in [(it.a, ca), (it.b, cb), (it.c, cc)] {
                    let scale = x.abs().max(y.abs());
                    if scale > 0.0 {
                        worst_seq = worst_seq.max((x - y).abs() / scale);
                    }
                }
            }
            let lead = k.m(variant) / (p - 1.0);
            match kato_bound(&k, variant, cn) {
                Ok(t) => {
                    let s = t.ln();
                    let (lhs, target) = match variant {
                        LemmaVariant::Lemma33 => (lead * s, lead * cn.ln() - k.a0.ln()),
                        LemmaVariant::Lemma23 => (
                            lead * s - (b + q / (p - 1.0)) * s.ln(),
                            cn.ln() - k.a0.ln(),
                        ),
                    };
                    worst_res = worst_res.max((lhs - target).abs() / target.abs().max(1.0));
                }
                Err(_) => no_root += 1,
            }
        }
        draws += 1;
    }
    verdict(
        worst_seq <= 1e-12 && worst_res <= 1e-10,
        format!(
            "{draws} draws: max closed-form rel. error {worst_seq:.1e}, max back-substitution residual {worst_res:.1e} ({no_root} log-variant targets below the curve minimum)"
        ),
    )
}

fn ode_config(mu: f64, coefficient: Coefficient, horizon: f64) -> SourceConfig {
    SourceConfig::Ode(OdeSweepConfig {
        mu,
        p: 2.0,
        coefficient,
        f0: 1.0,
        f1: 1.0,
        t0: 1.0,
        integrator: IntegratorOptions {
            horizon,
            ..Default::default()
        },
    })
}

fn c5_ode_powerlaw() -> Verdict {
    let cfg = ode_config(3.0, Coefficient::Constant { a1: 1.0 }, 1e8);
    let recs = sweep(&cfg, &dyadic_grid(6, 16)).unwrap();
    let fit = fit_powerlaw(&recs, 2.0, &FitOptions::default()).unwrap();
    verdict(
        fit.pass,
        format!(
            "slope {:.4} vs {:.2} (dev {:.2}%), r^2 {:.6}, {} points",
            fit.slope,
            fit.theory_slope,
            100.0 * fit.relative_deviation,
            fit.r_squared,
            fit.n_points
        ),
    )
}

fn c6_ode_log_corrected() -> Verdict {
    let cone = Coefficient::Cone { radius: 1.0, alpha: 1.0, n: 2, p: 2.0 };
    let cfg = ode_config(2.0, cone, 1e30);
    let recs = sweep(&cfg, &dyadic_grid(6, 16)).unwrap();
    let fit = fit_log_corrected(&recs, 2, 2.0, &FitOptions::default()).unwrap();
    verdict(
        fit.pass,
        format!(
            "log-corrected slope {:.4} vs {:.2} (dev {:.2}%), r^2 {:.6}, {} points",
            fit.slope,
            fit.theory_slope,
            100.0 * fit.relative_deviation,
            fit.r_squared,
            fit.n_points
        ),
    )
}

/// The two cone runs are shared by criteria 7 and 10.
fn cone_runs() -> Vec<(f64, SimResult)> {
    // (α, μ) from the dictionary at w = -1/3 and w = -2/3 for n = 3
    let setups = [(1.0, 3.0, 5.0, 50.0), (2.0, 6.0, 2.5, 100.0)];
    setups
        .par_iter()
        .map(|&(alpha, mu, r_max, horizon)| {
            let params = ModelParams::new(3, alpha, mu, 2.0, 0.01, 1.0).unwrap();
            let grid = RadialGrid::new(r_max, 2000, 3).unwrap();
            let opts = SimOptions {
                horizon,
                stride: 20,
                ..Default::default()
            };
            (alpha, run_to_blowup(&params, &grid, &opts).unwrap())
        })
        .collect()
}

fn c7_cone(runs: &[(f64, SimResult)]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (alpha, res) in runs {
        let rep = verify_cone(res, &LightCone::new(*alpha, 1.0).unwrap());
        pass &= rep.contained && res.terminated_reason == SimTermination::Horizon;
        parts.push(format!(
            "alpha={alpha}: worst excess {:.2}h at t={:.2} ({} samples)",
            rep.max_violation_h, rep.worst_time, rep.samples_checked
        ));
    }
    verdict(pass, format!("{} [slack 3h, support tol 1e-12 max|u(1)|]", parts.join("; ")))
}

fn c10_functional(runs: &[(f64, SimResult)]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (alpha, res) in runs {
        let mu = res.params.mu;
        let f1 = res.samples[0].f;
        let min_f = res.samples.iter().map(|s| s.f).fold(f64::INFINITY, f64::min);
        let weighted: Vec<f64> = res.samples.iter().map(|s| s.t.powf(mu) * s.fprime).collect();
        let scale = weighted.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let worst_drop = weighted.windows(2).map(|w| w[0] - w[1]).fold(0.0f64, f64::max);
        pass &= f1 > 0.0 && min_f >= f1 && worst_drop <= 1e-6 * scale;
        parts.push(format!(
            "alpha={alpha}: F(1)={f1:.3e}, min F={min_f:.3e}, worst t^mu F' drop {:.1e} of scale",
            worst_drop / scale
        ));
    }
    verdict(pass, parts.join("; "))
}

fn c8_manufactured() -> Verdict {
    let cells = [150usize, 300, 600, 1200];
    let errs: Vec<f64> = cells.par_iter().map(|&c| common::manufactured_error(c)).collect();
    let ords = common::orders(&errs);
    verdict(
        ords.iter().all(|&o| o >= 1.9),
        format!(
            "L-inf errors {:?}, orders {:?}",
            errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>(),
            ords.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>()
        ),
    )
}

fn pde_lifespan(eps: f64, cells: usize, threshold: f64) -> f64 {
    let params = ModelParams::new(3, 2.0, 3.0, 2.0, eps, 1.0).unwrap();
    let grid = RadialGrid::new(2.5, cells, 3).unwrap();
    let opts = SimOptions {
        threshold,
        horizon: 1e3,
        stride: 100,
        ..Default::default()
    };
    run_to_blowup(&params, &grid, &opts)
        .unwrap()
        .lifespan_estimate
        .unwrap_or(f64::NAN)
}

fn c9_blowup_robustness() -> Verdict {
    let cases = [(1000usize, 1e6), (2000, 1e6), (1000, 1e8)];
    let t: Vec<f64> = cases.par_iter().map(|&(c, thr)| pde_lifespan(0.5, c, thr)).collect();
    let refine = (t[1] - t[0]).abs() / t[0];
    let thresh = (t[2] - t[0]).abs() / t[0];

    let eps = [0.5, 0.25, 0.125, 0.0625];
    let cfg = SourceConfig::Pde(PdeSweepConfig {
        n: 3,
        alpha: 2.0,
        mu: 3.0,
        p: 2.0,
        radius: 1.0,
        r_max: 2.5,
        cells: 1000,
        sim: SimOptions {
            horizon: 1e3,
            stride: 100,
            ..Default::default()
        },
    });
    let recs = sweep(&cfg, &eps).unwrap();
    let t_big = recs[0].lifespan.unwrap_or(f64::NAN);
    let shape_c = t_big * eps[0].sqrt();
    let mut worst_ratio = 0.0f64;
    for r in &recs {
        let observed = r.lifespan.unwrap_or(f64::INFINITY);
        worst_ratio = worst_ratio.max(observed / (shape_c * r.epsilon.powf(-0.5)));
    }
    let fit = fit_powerlaw(&recs, 2.0, &FitOptions::default()).unwrap();
    verdict(
        refine <= 0.02 && thresh <= 0.01 && worst_ratio <= 1.0,
        format!(
            "T={:.4}; h/2 change {:.3}%, threshold 1e8 change {:.3}%; max T/(shape through eps=0.5) = {worst_ratio:.4}; descriptive slope {:.4}",
            t[0],
            100.0 * refine,
            100.0 * thresh,
            fit.slope
        ),
    )
}

fn main() -> ExitCode {
    let mut rows: Vec<Row> = Vec::new();
    let timed = |id, name, budget, f: fn() -> Verdict| {
        let start = Instant::now();
        let v = f();
        (id, name, budget, v, start.elapsed())
    };
    let sec = Duration::from_secs;
    rows.push(timed(1, "exponent identities", sec(1), c1_exponent_identities));
    rows.push(timed(2, "w* consistency", sec(1), c2_w_star));
    rows.push(timed(3, "closed-form ODE blow-up", sec(1), c3_closed_form_blowup));
    rows.push(timed(4, "Kato machinery", sec(1), c4_kato_machinery));
    rows.push(timed(5, "ODE scaling, constant coefficient", sec(10), c5_ode_powerlaw));
    rows.push(timed(6, "ODE scaling, log-corrected cone", sec(30), c6_ode_log_corrected));

    let start = Instant::now();
    let runs = cone_runs();
    let run_time = start.elapsed();
    let v7 = c7_cone(&runs);
    let v10 = c10_functional(&runs);
    rows.push((7, "PDE finite speed of propagation", sec(60), v7, run_time));

    rows.push(timed(8, "PDE manufactured-solution convergence", sec(60), c8_manufactured));
    rows.push(timed(9, "PDE blow-up robustness", sec(300), c9_blowup_robustness));
    rows.push((10, "functional monotonicity", sec(60), v10, run_time));
    rows.sort_by_key(|r| r.0);

    let mut unexpected = Vec::new();
    for (id, name, budget, v, took) in &rows {
        let in_time = took <= budget;
        let pass = v.pass && in_time;
        let tag = match (pass, RECORDED_RED.contains(id)) {
            (true, false) => "PASS",
            (false, true) => "FAIL (recorded)",
            (false, false) => "FAIL",
            (true, true) => "PASS (was recorded as failing)",
        };
        if !pass && !RECORDED_RED.contains(id) || pass && RECORDED_RED.contains(id) {
            unexpected.push(*id);
        }
        let time_note = if in_time { "" } else { " OVER BUDGET" };
        println!(
            "criterion {id:>2} {tag}: {name}: {} [{:.2}s / {}s{time_note}]",
            v.detail,
            took.as_secs_f64(),
            budget.as_secs()
        );
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
