//! Kato-type blow-up machinery for the spatial functional `F(t) = ∫ u dx`.
//!
//! Two pieces live here. The first is the bookkeeping of the iterated lower
//! bounds `F(t) ≥ D_j t^{-a_j} (ln t)^{-b_j} (t - T1)^{c_j}`: the recurrences,
//! their closed forms, the constant `E` controlling `D_j ≥ exp(E p^j)`, the
//! divergence test and the resulting lifespan bounds. The second is an
//! adaptive Dormand–Prince integrator for the sharp comparison ODE
//!
//! ```text
//! F'' + (μ/t) F' = K(t) |F|^p
//! ```
//!
//! which stops at a blow-up threshold and extrapolates the singular time from
//! the local power law `F ~ k (T - t)^{-2/(p-1)}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::roots::solve_log_power;
use crate::wave::LightCone;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaVariant {
    /// Logarithmic weights: `F ≥ A0 t^{-a} (ln t)^{-b} (t-T1)^c` and
    /// `F'' + μF'/t ≥ A1 (ln t)^{-q} |F|^p`.
    Lemma23,
    /// Pure powers: `F ≥ A0 t^{-a} (t-T1)^b` and `F'' + μF'/t ≥ A1 |F|^p`.
    Lemma33,
}

/// Constants of the two comparison lemmas. `c` and `q` are only read by
/// [`LemmaVariant::Lemma23`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KatoParams {
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub q: f64,
    pub mu: f64,
    pub p: f64,
    #[serde(rename = "A0")]
    pub a0: f64,
    #[serde(rename = "A1")]
    pub a1: f64,
    #[serde(rename = "T0")]
    pub t0: f64,
    #[serde(rename = "T1")]
    pub t1: f64,
}

impl KatoParams {
    /// `M = (p-1)(c-a) + 2` with logarithmic weights, `(p-1)(b-a) + 2` with pure powers.
    pub fn m(&self, variant: LemmaVariant) -> f64 {
        (self.p - 1.0) * (self.time_power(variant) - self.a) + 2.0
    }

    /// Exponent of `(t - T1)` in the seed lower bound.
    fn time_power(&self, variant: LemmaVariant) -> f64 {
        match variant {
            LemmaVariant::Lemma23 => self.c,
            LemmaVariant::Lemma33 => self.b,
        }
    }

    pub fn validate(&self, variant: LemmaVariant) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                domain(format!("{name} must be > 0, got {x}"))
            }
        };
        if !(self.p > 1.0) {
            return domain(format!("p must be > 1, got {}", self.p));
        }
        if !(self.a >= 0.0) {
            return domain(format!("a must be >= 0, got {}", self.a));
        }
        if !(self.mu >= 0.0) {
            return domain(format!("mu must be >= 0, got {}", self.mu));
        }
        positive("b", self.b)?;
        positive("A0", self.a0)?;
        positive("A1", self.a1)?;
        if variant == LemmaVariant::Lemma23 {
            positive("c", self.c)?;
            positive("q", self.q)?;
        }
        if !(self.t0 > 1.0 && self.t1 > self.t0) {
            return domain(format!(
                "need T1 > T0 > 1, got T0 = {}, T1 = {}",
                self.t0, self.t1
            ));
        }
        let m = self.m(variant);
        if !(m > 0.0) {
            return domain(format!("M must be > 0, got {m}"));
        }
        Ok(())
    }

    /// The recurrence seeds `(a_0, b_0, c_0, q)` for the variant. The power variant
    /// has no logarithmic weight, so its `b_j` ladder is identically zero and
    /// its time power starts from `b`.
    fn seeds(&self, variant: LemmaVariant) -> (f64, f64, f64, f64) {
        match variant {
            LemmaVariant::Lemma23 => (self.a, self.b, self.c, self.q),
            LemmaVariant::Lemma33 => (self.a, 0.0, self.b, 0.0),
        }
    }

    /// Closed forms `(a_j, b_j, c_j)` of the recurrences.
    pub fn closed_form(&self, variant: LemmaVariant, j: u32) -> (f64, f64, f64) {
        let (a, b, c, q) = self.seeds(variant);
        let p = self.p;
        let pj = p.powi(j as i32);
        let sa = self.mu / (p - 1.0);
        let sb = q / (p - 1.0);
        let sc = (self.mu + 2.0) / (p - 1.0);
        (pj * (a + sa) - sa, pj * (b + sb) - sb, pj * (c + sc) - sc)
    }
}

/// One rung `D_j t^{-a_j} (ln t)^{-b_j} (t-T1)^{c_j}` of the lower-bound
/// ladder, with `D_j` kept as its logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KatoIterate {
    pub j: u32,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub ln_d: f64,
}

impl KatoIterate {
    pub fn d(&self) -> f64 {
        self.ln_d.exp()
    }

    /// Logarithm of the lower bound at time `t > T1`.
    pub fn ln_lower_bound(&self, t: f64, t1: f64) -> f64 {
        let log_term = if self.b != 0.0 { self.b * t.ln().ln() } else { 0.0 };
        self.ln_d - self.a * t.ln() - log_term + self.c * (t - t1).ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KatoSequences {
    pub variant: LemmaVariant,
    pub iterates: Vec<KatoIterate>,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "B")]
    pub b: f64,
    /// Set when iteration stopped before `J` because a term left the
    /// floating-point range.
    pub overflowed: bool,
}

/// Iterates `a_{j+1} = p a_j + μ`, `b_{j+1} = p b_j + q`,
/// `c_{j+1} = p c_j + μ + 2`, `D_{j+1} = A1 D_j^p / (p c_j + μ + 2)^2` for
/// `j = 0..=J`.
pub fn kato_sequences(
    params: &KatoParams,
    variant: LemmaVariant,
    j_max: u32,
) -> Result<KatoSequences> {
    params.validate(variant)?;
    if j_max < 1 {
        return domain("J must be >= 1");
    }
    let (a0, b0, c0, q) = params.seeds(variant);
    let p = params.p;
    let mu = params.mu;
    let ln_a1 = params.a1.ln();
    let mut cur = KatoIterate {
        j: 0,
        a: a0,
        b: b0,
        c: c0,
        ln_d: params.a0.ln(),
    };
    let mut iterates = vec![cur];
    let mut overflowed = false;
    for j in 1..=j_max {
        let c_next = p * cur.c + mu + 2.0;
        let next = KatoIterate {
            j,
            a: p * cur.a + mu,
            b: p * cur.b + q,
            c: c_next,
            ln_d: ln_a1 + p * cur.ln_d - 2.0 * c_next.ln(),
        };
        if !(next.a.is_finite() && next.b.is_finite() && next.c.is_finite() && next.ln_d.is_finite())
        {
            overflowed = true;
            break;
        }
        iterates.push(next);
        cur = next;
    }
    Ok(KatoSequences {
        variant,
        iterates,
        e: kato_e(params, variant)?,
        b: kato_b(params, variant),
        overflowed,
    })
}

fn kato_b(params: &KatoParams, variant: LemmaVariant) -> f64 {
    let base = params.time_power(variant) + (params.mu + 2.0) / (params.p - 1.0);
    params.a1 / (base * base)
}

/// `Σ_{k≥0} k / p^k = p / (p-1)^2`.
pub fn weighted_geometric_sum(p: f64) -> f64 {
    p / ((p - 1.0) * (p - 1.0))
}

/// `E = min(0, ln B)/(p-1) - 2 ln p Σ k/p^k + ln A0`, so that
/// `D_j ≥ exp(E p^j)` for large `j`.
pub fn kato_e(params: &KatoParams, variant: LemmaVariant) -> Result<f64> {
    params.validate(variant)?;
    let p = params.p;
    let ln_b = kato_b(params, variant).ln();
    Ok(ln_b.min(0.0) / (p - 1.0) - 2.0 * p.ln() * weighted_geometric_sum(p) + params.a0.ln())
}

/// Lifespan bound of the lemma with normalisation constant `c`.
///
/// The power variant gives `T < C A0^{-(p-1)/M}` directly. The logarithmic one gives
/// `T^{M/(p-1)} (ln T)^{-b-q/(p-1)} < C/A0`, solved for the root on the
/// increasing branch `ln T > (p-1)(b + q/(p-1))/M`.
pub fn kato_bound(params: &KatoParams, variant: LemmaVariant, c: f64) -> Result<f64> {
    params.validate(variant)?;
    if !(c > 0.0) {
        return domain(format!("normalization C must be > 0, got {c}"));
    }
    let p = params.p;
    let m = params.m(variant);
    match variant {
        LemmaVariant::Lemma33 => Ok(c * params.a0.powf(-(p - 1.0) / m)),
        LemmaVariant::Lemma23 => {
            let lead = m / (p - 1.0);
            let log_exp = params.b + params.q / (p - 1.0);
            let ln_target = c.ln() - params.a0.ln();
            solve_log_power(lead, log_exp, ln_target)
                .map(f64::exp)
                .ok_or_else(|| {
                    Error::NoSolution(format!(
                        "C/A0 = {} lies below the minimum of T^{lead} (ln T)^-{log_exp}",
                        ln_target.exp()
                    ))
                })
        }
    }
}

/// Exponent multiplying `p^j` in the lower bound at time `t`; a positive
/// value certifies that the ladder diverges there.
pub fn divergence_condition(
    t: f64,
    params: &KatoParams,
    e: f64,
    variant: LemmaVariant,
) -> Result<f64> {
    if !(t > params.t1) {
        return domain(format!("need t > T1 = {}, got {t}", params.t1));
    }
    let p = params.p;
    let mu = params.mu;
    let slope_time = params.time_power(variant) + (mu + 2.0) / (p - 1.0);
    let slope_t = params.a + mu / (p - 1.0);
    let mut value = e + slope_time * (t - params.t1).ln() - slope_t * t.ln();
    if variant == LemmaVariant::Lemma23 {
        value -= (params.b + params.q / (p - 1.0)) * t.ln().ln();
    }
    Ok(value)
}

/// A time past `T1` at which [`divergence_condition`] is positive, found by
/// doubling `t - T1` and then bisecting the last sign change down to
/// relative width 1e-12.
pub fn divergence_onset(params: &KatoParams, variant: LemmaVariant) -> Result<f64> {
    let e = kato_e(params, variant)?;
    let phi = |t: f64| divergence_condition(t, params, e, variant);
    let mut lo = params.t1 + 1e-9 * params.t1;
    let mut gap = 1.0;
    let mut hi = params.t1 + gap;
    while phi(hi)? <= 0.0 {
        lo = hi;
        gap *= 2.0;
        hi = params.t1 + gap;
        if !hi.is_finite() || gap > 1e300 {
            return Err(Error::NoSolution(
                "divergence condition never becomes positive".into(),
            ));
        }
    }
    while (hi - lo) > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if phi(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Coefficient `K(t)` of the comparison ODE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Coefficient {
    Constant {
        #[serde(rename = "A1")]
        a1: f64,
    },
    /// `(R + A(t))^{-n(p-1)}` with `A` the light-cone extent for `alpha`.
    Cone {
        #[serde(rename = "R")]
        radius: f64,
        alpha: f64,
        n: u32,
        p: f64,
    },
}

impl Coefficient {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Coefficient::Constant { a1 } => a1,
            Coefficient::Cone { radius, alpha, n, p } => {
                (radius + LightCone::extent(alpha, t)).powf(-(n as f64) * (p - 1.0))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Coefficient::Constant { a1 } if a1 >= 0.0 && a1.is_finite() => Ok(()),
            Coefficient::Constant { a1 } => domain(format!("A1 must be >= 0, got {a1}")),
            Coefficient::Cone { radius, alpha, n, p } => {
                if !(radius > 0.0) {
                    return domain(format!("cone R must be > 0, got {radius}"));
                }
                if !(alpha >= 1.0) {
                    return domain(format!("cone alpha must be >= 1, got {alpha}"));
                }
                if n < 1 || !(p > 1.0) {
                    return domain("cone coefficient needs n >= 1 and p > 1");
                }
                Ok(())
            }
        }
    }

    /// Smallest start time at which `K` is defined.
    fn min_time(&self) -> f64 {
        match self {
            Coefficient::Constant { .. } => 0.0,
            Coefficient::Cone { .. } => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    /// `F` value at which the run is declared blown up.
    pub threshold: f64,
    pub horizon: f64,
    /// Steps below `step_floor * max(t, 1)` abort the run.
    pub step_floor: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rtol: 1e-10,
            atol: 1e-12,
            threshold: 1e10,
            horizon: 1e8,
            step_floor: 1e-14,
            max_steps: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OdeTermination {
    Threshold,
    Horizon,
    StepFloor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeTrajectory {
    pub times: Vec<f64>,
    #[serde(rename = "F")]
    pub f: Vec<f64>,
    #[serde(rename = "Fp")]
    pub fp: Vec<f64>,
    pub blowup_time: Option<f64>,
    pub terminated_reason: OdeTermination,
}

impl OdeTrajectory {
    pub fn last(&self) -> (f64, f64, f64) {
        let i = self.times.len() - 1;
        (self.times[i], self.f[i], self.fp[i])
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct KatoRhs<'a> {
    mu: f64,
    p: f64,
    coef: &'a Coefficient,
}

impl KatoRhs<'_> {
    fn eval(&self, t: f64, y: [f64; 2]) -> [f64; 2] {
        let damping = if self.mu == 0.0 { 0.0 } else { self.mu / t * y[1] };
        [y[1], self.coef.eval(t) * y[0].abs().powf(self.p) - damping]
    }
}

/// Integrates `F'' + (μ/t) F' = K(t)|F|^p` from `(t0, F0, F1)`.
///
/// `t0 ≥ 1` is required except for a constant coefficient with `μ = 0`,
/// where `t0 ≥ 0` is admitted.
pub fn integrate_kato(
    mu: f64,
    p: f64,
    coef: &Coefficient,
    f0: f64,
    f1: f64,
    t0: f64,
    opts: &IntegratorOptions,
) -> Result<OdeTrajectory> {
    if !(p > 1.0) {
        return domain(format!("p must be > 1, got {p}"));
    }
    if !(mu >= 0.0) {
        return domain(format!("mu must be >= 0, got {mu}"));
    }
    coef.validate()?;
    if !(f0 >= 0.0) {
        return domain(format!("F0 must be >= 0, got {f0}"));
    }
    if !f1.is_finite() {
        return domain("F1 must be finite");
    }
    let t_min = if mu == 0.0 { coef.min_time() } else { 1.0_f64.max(coef.min_time()) };
    if !(t0 >= t_min) {
        return domain(format!("t0 must be >= {t_min}, got {t0}"));
    }
    if !(opts.threshold > f0) {
        return domain("threshold must exceed F0");
    }
    if !(opts.horizon > t0) {
        return domain("horizon must exceed t0");
    }

    let rhs = KatoRhs { mu, p, coef };
    let mut t = t0;
    let mut y = [f0, f1];
    let mut traj = OdeTrajectory {
        times: vec![t],
        f: vec![f0],
        fp: vec![f1],
        blowup_time: None,
        terminated_reason: OdeTermination::Horizon,
    };
    if f0 == 0.0 && f1 == 0.0 {
        // identically zero solution
        traj.times.push(opts.horizon);
        traj.f.push(0.0);
        traj.fp.push(0.0);
        return Ok(traj);
    }

    let mut h = 1e-4 * t.max(1.0);
    let mut k = [[0.0f64; 2]; 7];
    k[0] = rhs.eval(t, y);
    let mut steps = 0usize;
    loop {
        if steps >= opts.max_steps {
            traj.terminated_reason = OdeTermination::StepFloor;
            return Ok(traj);
        }
        let floor = opts.step_floor * t.max(1.0);
        let last_step = t + h >= opts.horizon;
        if last_step {
            h = opts.horizon - t;
        }
        if h < floor && !last_step {
            traj.terminated_reason = OdeTermination::StepFloor;
            return Ok(traj);
        }

        for s in 1..7 {
            let mut ys = y;
            for (r, kr) in k.iter().enumerate().take(s) {
                ys[0] += h * A[s][r] * kr[0];
                ys[1] += h * A[s][r] * kr[1];
            }
            k[s] = rhs.eval(t + C[s] * h, ys);
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for i in 0..2 {
            let mut e = 0.0;
            for s in 0..7 {
                y5[i] += h * B5[s] * k[s][i];
                e += h * (B5[s] - B4[s]) * k[s][i];
            }
            let scale = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
            err = err.max((e / scale).abs());
        }
        if !err.is_finite() || !y5[0].is_finite() || !y5[1].is_finite() {
            h *= 0.2;
            continue;
        }
        if err <= 1.0 {
            t = if last_step { opts.horizon } else { t + h };
            y = y5;
            steps += 1;
            // FSAL: last stage is the derivative at the new point
            k[0] = k[6];
            traj.times.push(t);
            traj.f.push(y[0]);
            traj.fp.push(y[1]);
            if y[0] >= opts.threshold {
                traj.terminated_reason = OdeTermination::Threshold;
                traj.blowup_time = Some(t + 2.0 / (p - 1.0) * y[0] / y[1]);
                return Ok(traj);
            }
            if last_step {
                traj.terminated_reason = OdeTermination::Horizon;
                return Ok(traj);
            }
        }
        let fac = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.2) };
        h *= fac.clamp(0.2, 5.0);
    }
}

/// Outcome of one ε in an ODE lifespan sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeSweepEntry {
    pub epsilon: f64,
    pub blowup_time: Option<f64>,
    pub terminated_reason: Option<OdeTermination>,
    pub error: Option<String>,
}

/// Runs [`integrate_kato`] with data `(ε f0, ε f1)` at `t0` for every ε.
/// Output order matches `eps_list`.
#[allow(clippy::too_many_arguments)]
pub fn ode_lifespan_sweep(
    mu: f64,
    p: f64,
    coef: &Coefficient,
    eps_list: &[f64],
    f0: f64,
    f1: f64,
    t0: f64,
    opts: &IntegratorOptions,
) -> Vec<OdeSweepEntry> {
    eps_list
        .par_iter()
        .map(|&eps| {
            if !(eps > 0.0) {
                return OdeSweepEntry {
                    epsilon: eps,
                    blowup_time: None,
                    terminated_reason: None,
                    error: Some(format!("epsilon must be > 0, got {eps}")),
                };
            }
            match integrate_kato(mu, p, coef, eps * f0, eps * f1, t0, opts) {
                Ok(traj) => OdeSweepEntry {
                    epsilon: eps,
                    blowup_time: traj.blowup_time,
                    terminated_reason: Some(traj.terminated_reason),
                    error: (traj.terminated_reason == OdeTermination::StepFloor)
                        .then(|| "step size fell below the floor".to_string()),
                },
                Err(e) => OdeSweepEntry {
                    epsilon: eps,
                    blowup_time: None,
                    terminated_reason: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn base() -> KatoParams {
        KatoParams {
            a: 0.0,
            b: 1.0,
            c: 1.0,
            q: 1.0,
            mu: 0.0,
            p: 2.0,
            a0: 1.0,
            a1: 1.0,
            t0: 2.0,
            t1: 3.0,
        }
    }

    #[test]
    fn hand_recurrence() {
        let s = kato_sequences(&base(), LemmaVariant::Lemma23, 3).unwrap();
        let a: Vec<f64> = s.iterates.iter().map(|it| it.a).collect();
        let b: Vec<f64> = s.iterates.iter().map(|it| it.b).collect();
        let c: Vec<f64> = s.iterates.iter().map(|it| it.c).collect();
        assert_eq!(a, vec![0.0; 4]);
        assert_eq!(b, vec![1.0, 3.0, 7.0, 15.0]);
        assert_eq!(c, vec![1.0, 4.0, 10.0, 22.0]);
        assert_abs_diff_eq!(s.iterates[1].d(), 1.0 / 16.0, epsilon = 1e-15);
        assert!(!s.overflowed);
    }

    #[test]
    fn b_ladder_is_geometric_without_damping() {
        let mut k = base();
        k.q = 0.7;
        let s = kato_sequences(&k, LemmaVariant::Lemma23, 10).unwrap();
        for w in s.iterates.windows(2) {
            let lhs = w[1].b + k.q;
            assert!((lhs - 2.0 * (w[0].b + k.q)).abs() <= 1e-15 * lhs);
        }
    }

    #[test]
    fn lemma33_ladder_uses_b_as_time_power() {
        let k = KatoParams { a: 3.0, b: 5.0, mu: 3.0, ..base() };
        let s = kato_sequences(&k, LemmaVariant::Lemma33, 2).unwrap();
        assert_eq!(s.iterates[1].c, 2.0 * 5.0 + 5.0);
        assert_eq!(s.iterates[1].b, 0.0);
        assert_eq!(s.iterates[1].a, 2.0 * 3.0 + 3.0);
    }

    #[test]
    fn overflow_stops_early() {
        let s = kato_sequences(&KatoParams { p: 4.0, ..base() }, LemmaVariant::Lemma23, 2000)
            .unwrap();
        assert!(s.overflowed);
        assert!(s.iterates.len() < 2001);
        assert!(s.iterates.iter().all(|it| it.ln_d.is_finite()));
    }

    #[test]
    fn series_and_e() {
        assert_eq!(weighted_geometric_sum(2.0), 2.0);
        let k = KatoParams { a1: 9.0, ..base() };
        assert_abs_diff_eq!(
            kato_e(&k, LemmaVariant::Lemma23).unwrap(),
            -4.0 * 2f64.ln(),
            epsilon = 1e-14
        );
        let scaled = KatoParams { a0: 7.5, ..k };
        assert_abs_diff_eq!(
            kato_e(&scaled, LemmaVariant::Lemma23).unwrap()
                - kato_e(&k, LemmaVariant::Lemma23).unwrap(),
            7.5f64.ln(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn lemma33_bound() {
        let k = KatoParams { a: 3.0, b: 5.0, mu: 3.0, a0: 1e-4, ..base() };
        assert_abs_diff_eq!(k.m(LemmaVariant::Lemma33), 4.0);
        assert_abs_diff_eq!(
            kato_bound(&k, LemmaVariant::Lemma33, 1.0).unwrap(),
            10.0,
            epsilon = 1e-12
        );
        let unit = KatoParams { a0: 1.0, ..k };
        assert_abs_diff_eq!(
            kato_bound(&unit, LemmaVariant::Lemma33, 2.5).unwrap(),
            2.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn invalid_m_rejected() {
        // (p-1)(c-a)+2 = 1*(1-5)+2 < 0
        let k = KatoParams { a: 5.0, ..base() };
        assert!(kato_sequences(&k, LemmaVariant::Lemma23, 3).is_err());
        let k = KatoParams { t1: 1.5, ..base() };
        assert!(kato_e(&k, LemmaVariant::Lemma23).is_err());
    }

    #[test]
    fn divergence_limits() {
        let k = base();
        let e = kato_e(&k, LemmaVariant::Lemma23).unwrap();
        let near = divergence_condition(k.t1 + 1e-12, &k, e, LemmaVariant::Lemma23).unwrap();
        assert!(near < -20.0);
        let far = divergence_condition(1e12, &k, e, LemmaVariant::Lemma23).unwrap();
        assert!(far > 10.0);
        assert!(divergence_condition(k.t1, &k, e, LemmaVariant::Lemma23).is_err());
        // finite-difference slope is positive for large t
        let t = 1e6;
        let d = (divergence_condition(t * 1.001, &k, e, LemmaVariant::Lemma23).unwrap()
            - divergence_condition(t, &k, e, LemmaVariant::Lemma23).unwrap())
            / (t * 0.001);
        assert!(d > 0.0);
        let onset = divergence_onset(&k, LemmaVariant::Lemma23).unwrap();
        assert!(divergence_condition(onset, &k, e, LemmaVariant::Lemma23).unwrap() > 0.0);
    }

    #[test]
    fn closed_form_blowup() {
        let opts = IntegratorOptions::default();
        let s = std::f64::consts::SQRT_2;
        let traj =
            integrate_kato(0.0, 3.0, &Coefficient::Constant { a1: 1.0 }, s, s, 0.0, &opts).unwrap();
        assert_eq!(traj.terminated_reason, OdeTermination::Threshold);
        let t_star = traj.blowup_time.unwrap();
        assert!((t_star - 1.0).abs() <= 1e-3, "t* = {t_star}");
        // interior points follow sqrt(2)/(1-t)
        for (t, f) in traj.times.iter().zip(&traj.f).step_by(10) {
            if *t < 0.99 {
                assert!((f - s / (1.0 - t)).abs() <= 1e-7 * f);
            }
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let opts = IntegratorOptions { horizon: 50.0, ..Default::default() };
        let traj =
            integrate_kato(0.0, 2.0, &Coefficient::Constant { a1: 1.0 }, 0.0, 0.0, 1.0, &opts)
                .unwrap();
        assert_eq!(traj.terminated_reason, OdeTermination::Horizon);
        assert!(traj.blowup_time.is_none());
        assert!(traj.f.iter().all(|&f| f == 0.0));
        assert_eq!(*traj.times.last().unwrap(), 50.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let opts = IntegratorOptions::default();
        let k = Coefficient::Constant { a1: 1.0 };
        assert!(integrate_kato(0.0, 2.0, &k, -1.0, 1.0, 1.0, &opts).is_err());
        assert!(integrate_kato(1.0, 2.0, &k, 1.0, 1.0, 0.5, &opts).is_err());
        let cone = Coefficient::Cone { radius: 1.0, alpha: 1.0, n: 2, p: 2.0 };
        assert!(integrate_kato(0.0, 2.0, &cone, 1.0, 1.0, 0.0, &opts).is_err());
    }

    #[test]
    fn damped_flux_is_monotone() {
        let opts = IntegratorOptions::default();
        let k = Coefficient::Cone { radius: 1.0, alpha: 2.0, n: 3, p: 2.0 };
        let mu = 3.0;
        let traj = integrate_kato(mu, 2.0, &k, 0.1, 0.1, 1.0, &opts).unwrap();
        assert_eq!(traj.terminated_reason, OdeTermination::Threshold);
        let flux: Vec<f64> = traj
            .times
            .iter()
            .zip(&traj.fp)
            .map(|(t, fp)| t.powf(mu) * fp)
            .collect();
        let scale = flux.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for w in flux.windows(2) {
            assert!(w[1] >= w[0] - 1e-9 * scale);
        }
        assert!(traj.fp.iter().all(|&fp| fp > 0.0));
        assert!(traj.f.iter().all(|&f| f >= 0.1));
    }

    #[test]
    fn lower_bound_ladder_holds_on_trajectory() {
        // K ≡ A1, data F(1) = F'(1) = ε. From F ≥ ε and t^μ F' increasing:
        // F(t) ≥ A1 ε^p t^{-μ} (t-1)^{μ+2} / ((μ+1)(μ+2)), i.e. the rung
        // j = 0 with a = μ, time power μ+2, T1 = 1.
        let (mu, p, a1, eps) = (3.0, 2.0, 1.0, 0.05);
        let opts = IntegratorOptions::default();
        let traj = integrate_kato(mu, p, &Coefficient::Constant { a1 }, eps, eps, 1.0, &opts)
            .unwrap();
        let params = KatoParams {
            a: mu,
            b: mu + 2.0,
            c: 0.0,
            q: 0.0,
            mu,
            p,
            a0: a1 * eps.powf(p) / ((mu + 1.0) * (mu + 2.0)),
            a1,
            t0: 1.0 + 1e-9,
            t1: 1.0 + 2e-9,
        };
        let ladder = kato_sequences(&params, LemmaVariant::Lemma33, 2).unwrap();
        for (t, f) in traj.times.iter().zip(&traj.f) {
            if *t <= 1.01 {
                continue;
            }
            for rung in &ladder.iterates {
                // the ladder was built with T1 = 1
                let lb = rung.ln_lower_bound(*t, 1.0);
                assert!(f.ln() >= lb - 1e-9, "rung {} fails at t = {t}", rung.j);
            }
        }
    }

    #[test]
    fn sweep_preserves_order_and_matches_single_run() {
        let opts = IntegratorOptions::default();
        let k = Coefficient::Constant { a1: 1.0 };
        let eps = [0.1, 0.4, 0.2, -1.0];
        let out = ode_lifespan_sweep(3.0, 2.0, &k, &eps, 1.0, 1.0, 1.0, &opts);
        assert_eq!(out.iter().map(|e| e.epsilon).collect::<Vec<_>>(), eps.to_vec());
        assert!(out[3].error.is_some());
        let single = integrate_kato(3.0, 2.0, &k, 0.2, 0.2, 1.0, &opts).unwrap();
        assert_eq!(out[2].blowup_time, single.blowup_time);
        assert!(out[0].blowup_time.unwrap() > out[2].blowup_time.unwrap());
        assert!(out[2].blowup_time.unwrap() > out[1].blowup_time.unwrap());
    }
}
