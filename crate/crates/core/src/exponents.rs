//! Critical exponents, the FLRW parameter dictionary, regime classification
//! and closed-form lifespan upper bounds.
//!
//! Everything here is a pure function of its arguments. Roots of the
//! quadratic exponent polynomials go through [`crate::roots::quadratic_roots`];
//! the only transcendental equation (the α = 1 lifespan bound) is solved by
//! bisection in `ln T`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::roots::{discriminant, quadratic_roots, solve_log_power};

/// Relative tolerance under which `p` is treated as sitting exactly on a
/// critical exponent.
pub const CRITICAL_TOL: f64 = 1e-12;

/// Tolerance for recognising α = 1 (equivalently w = 2/n − 1).
pub const ALPHA_ONE_TOL: f64 = 1e-12;

fn on_critical(p: f64, pc: f64) -> bool {
    (p - pc).abs() <= CRITICAL_TOL * p.abs().max(1.0)
}

/// Coefficients of the model problem `u_tt − t^{−2α}Δu + (μ/t)u_t = |u|^p`
/// with data `ε·(u0, u1)` supported in `|x| ≤ R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub n: u32,
    pub alpha: f64,
    pub mu: f64,
    pub p: f64,
    pub epsilon: f64,
    #[serde(rename = "R")]
    pub radius: f64,
}

impl ModelParams {
    pub fn new(n: u32, alpha: f64, mu: f64, p: f64, epsilon: f64, radius: f64) -> Result<Self> {
        let params = ModelParams {
            n,
            alpha,
            mu,
            p,
            epsilon,
            radius,
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks the parameter invariants. `epsilon = 0` is accepted because the
    /// zero-data run is a legitimate (trivial) simulation.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return domain(format!("n must be >= 2, got {}", self.n));
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            return domain(format!("p must be > 1, got {}", self.p));
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return domain(format!("mu must be >= 0, got {}", self.mu));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return domain(format!("alpha must be >= 0, got {}", self.alpha));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return domain(format!("epsilon must be >= 0, got {}", self.epsilon));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return domain(format!("R must be > 0, got {}", self.radius));
        }
        Ok(())
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }
}

/// Cosmological parameters: spatial dimension and equation-of-state constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlrwParams {
    pub n: u32,
    pub w: f64,
}

impl FlrwParams {
    /// Accepts `−1 < w ≤ 1`.
    pub fn new(n: u32, w: f64) -> Result<Self> {
        let params = Self::new_extended(n, w)?;
        if w > 1.0 {
            return domain(format!(
                "w must be <= 1 (got {w}); use the extended constructor to go beyond"
            ));
        }
        Ok(params)
    }

    /// Accepts any `w > −1`.
    pub fn new_extended(n: u32, w: f64) -> Result<Self> {
        if n < 2 {
            return domain(format!("n must be >= 2, got {n}"));
        }
        if !(w > -1.0) || !w.is_finite() {
            return domain(format!("w must exceed -1, got {w}"));
        }
        Ok(FlrwParams { n, w })
    }

    /// Expansion exponent α = 2/(n(1+w)).
    pub fn alpha(&self) -> f64 {
        2.0 / (self.n as f64 * (1.0 + self.w))
    }

    /// Damping coefficient μ = 2/(1+w).
    pub fn mu(&self) -> f64 {
        2.0 / (1.0 + self.w)
    }

    /// Scale-factor exponent: a(t) = c t^{2/(n(1+w))}.
    pub fn scale_factor_exponent(&self) -> f64 {
        self.alpha()
    }

    pub fn acceleration_threshold(&self) -> f64 {
        2.0 / self.n as f64 - 1.0
    }

    /// Accelerated expansion: w ≤ 2/n − 1 (α ≥ 1).
    pub fn accelerated(&self) -> bool {
        self.w <= self.acceleration_threshold() + ALPHA_ONE_TOL
    }

    /// Uniform acceleration: w = 2/n − 1 (α = 1).
    pub fn uniformly_accelerated(&self) -> bool {
        (self.w - self.acceleration_threshold()).abs() <= ALPHA_ONE_TOL
    }

    /// Effective dimension n − 2/(1+w) = n(1−α) of the heat-like bound.
    pub fn fujita_dimension(&self) -> f64 {
        self.n as f64 - 2.0 / (1.0 + self.w)
    }

    pub fn gamma0(&self, p: f64) -> f64 {
        let n = self.n as f64;
        let k = 4.0 / (n * (1.0 + self.w));
        -(n - 1.0) * p * p + (n + 1.0 + k) * p + 2.0 - k
    }

    /// Positive (larger) root of γ₀(n, ·, w).
    pub fn p_crit(&self) -> f64 {
        let n = self.n as f64;
        let k = 4.0 / (n * (1.0 + self.w));
        // leading coefficient is -(n-1) < 0 and the discriminant is positive
        // for every w > -1, so a root always exists.
        let (_, hi) = quadratic_roots(-(n - 1.0), n + 1.0 + k, 2.0 - k)
            .expect("gamma0 always has real roots for n >= 2, w > -1");
        hi
    }

    pub fn model(&self, p: f64, epsilon: f64, radius: f64) -> Result<ModelParams> {
        ModelParams::new(self.n, self.alpha(), self.mu(), p, epsilon, radius)
    }
}

/// γ_S(n, p) = −(n−1)p² + (n+1)p + 2.
pub fn gamma_s(n: u32, p: f64) -> f64 {
    let n = n as f64;
    -(n - 1.0) * p * p + (n + 1.0) * p + 2.0
}

/// γ(n, p, α, μ) for α < 1.
pub fn gamma(n: u32, p: f64, alpha: f64, mu: f64) -> Result<f64> {
    let (a, b, c) = gamma_coefficients(n, alpha, mu)?;
    Ok(a * p * p + b * p + c)
}

fn gamma_coefficients(n: u32, alpha: f64, mu: f64) -> Result<(f64, f64, f64)> {
    if !(alpha < 1.0) {
        return domain(format!(
            "gamma(n,p,alpha,mu) needs alpha < 1, got {alpha}; the alpha >= 1 regime has its own bounds"
        ));
    }
    let n = n as f64;
    let lead = n - 1.0 + (mu - alpha) / (1.0 - alpha);
    let lin = n + 1.0 + (mu + 3.0 * alpha) / (1.0 - alpha);
    Ok((-lead, lin, 2.0))
}

/// Fujita exponent p_F(d) = 1 + 2/d.
pub fn p_fujita(d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return domain(format!("Fujita exponent needs d > 0, got {d}"));
    }
    Ok(1.0 + 2.0 / d)
}

/// Strauss exponent: positive root of γ_S(n, ·).
pub fn p_strauss(n: u32) -> Result<f64> {
    if n < 2 {
        return domain(format!("n must be >= 2, got {n}"));
    }
    let nf = n as f64;
    let (_, hi) = quadratic_roots(-(nf - 1.0), nf + 1.0, 2.0)
        .ok_or_else(|| Error::Domain("Strauss polynomial has no real root".into()))?;
    Ok(hi)
}

/// p_c(n, α, μ): positive root of γ(n, ·, α, μ).
pub fn p_crit(n: u32, alpha: f64, mu: f64) -> Result<f64> {
    if n < 2 {
        return domain(format!("n must be >= 2, got {n}"));
    }
    let (a, b, c) = gamma_coefficients(n, alpha, mu)?;
    if !(-a > 0.0) {
        return domain(format!(
            "degenerate gamma: leading coefficient n-1+(mu-alpha)/(1-alpha) = {} <= 0",
            -a
        ));
    }
    let (_, hi) = quadratic_roots(a, b, c)
        .ok_or_else(|| Error::Domain("gamma has no real root".into()))?;
    Ok(hi)
}

/// γ₀(n, p, w), with −1 < w ≤ 1.
pub fn gamma0(n: u32, p: f64, w: f64) -> Result<f64> {
    Ok(FlrwParams::new(n, w)?.gamma0(p))
}

/// p_c(n, w): positive root of γ₀(n, ·, w), with −1 < w ≤ 1.
pub fn p_crit_flrw(n: u32, w: f64) -> Result<f64> {
    Ok(FlrwParams::new(n, w)?.p_crit())
}

/// Larger root w* of n(n²+n+2)w² + 2n(n−1)²w + n³−5n²+8n−8 = 0, where the
/// heat-like and wave-like critical curves cross. `Ok(None)` when the
/// discriminant is negative.
pub fn w_star(n: u32) -> Result<Option<f64>> {
    if n < 2 {
        return domain(format!("n must be >= 2, got {n}"));
    }
    let (a, b, c) = w_star_coefficients(n);
    if discriminant(a, b, c) < 0.0 {
        return Ok(None);
    }
    Ok(quadratic_roots(a, b, c).map(|(_, hi)| hi))
}

pub fn w_star_coefficients(n: u32) -> (f64, f64, f64) {
    let n = n as f64;
    (
        n * (n * n + n + 2.0),
        2.0 * n * (n - 1.0) * (n - 1.0),
        n * n * n - 5.0 * n * n + 8.0 * n - 8.0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// Accelerated expansion, α ≥ 1: blow-up for every p > 1.
    #[serde(rename = "A_accelerated")]
    AAccelerated,
    /// Decelerated, the γ₀ (Strauss-type) bound is the stronger one.
    #[serde(rename = "B_wavelike")]
    BWavelike,
    /// Decelerated, the Fujita-type bound is the stronger one.
    #[serde(rename = "C_heatlike")]
    CHeatlike,
    #[serde(rename = "no_blowup_proved")]
    NoBlowupProved,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::AAccelerated => "A",
            Regime::BWavelike => "B",
            Regime::CHeatlike => "C",
            Regime::NoBlowupProved => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeExponents {
    pub alpha: f64,
    pub mu: f64,
    pub p_strauss: f64,
    /// p_F(n − 2/(1+w)); absent in the accelerated range where n − 2/(1+w) ≤ 0.
    pub p_fujita: Option<f64>,
    pub p_crit: f64,
    pub w_star: Option<f64>,
    pub gamma0: f64,
    pub gamma_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub applicable_bound: String,
    /// Power of ε in a polynomial bound `T ≤ C ε^e`.
    pub bound_exponent: Option<f64>,
    /// Set when p sits on a critical exponent (exponential bound) or when the
    /// two polynomial exponents tie.
    pub critical: bool,
    pub exponents: RegimeExponents,
}

/// Classifies (w, p) into the regions of the (w, p) plane, with −1 < w ≤ 1.
pub fn classify_regime(n: u32, w: f64, p: f64) -> Result<RegimeReport> {
    classify_flrw(&FlrwParams::new(n, w)?, p)
}

/// Polynomial ε-exponent of the heat-like bound, when applicable.
fn heatlike_exponent(d: f64, p: f64) -> Option<f64> {
    let denom = 2.0 - d * (p - 1.0);
    (denom > 0.0).then(|| -(p - 1.0) / denom)
}

pub fn classify_flrw(flrw: &FlrwParams, p: f64) -> Result<RegimeReport> {
    if !(p > 1.0) {
        return domain(format!("p must be > 1, got {p}"));
    }
    let n = flrw.n;
    let d = flrw.fujita_dimension();
    let pf = if d > 0.0 { Some(p_fujita(d)?) } else { None };
    let pc = flrw.p_crit();
    let g0 = flrw.gamma0(p);
    let exponents = RegimeExponents {
        alpha: flrw.alpha(),
        mu: flrw.mu(),
        p_strauss: p_strauss(n)?,
        p_fujita: pf,
        p_crit: pc,
        w_star: w_star(n)?,
        gamma0: g0,
        gamma_s: gamma_s(n, p),
    };

    if flrw.accelerated() {
        let (bound, exponent) = if flrw.uniformly_accelerated() {
            (
                "T^2 (ln T)^{-n(p-1)} <= C eps^{-(p-1)}".to_string(),
                None,
            )
        } else {
            (
                "T <= C eps^{-(p-1)/2}".to_string(),
                Some(-(p - 1.0) / 2.0),
            )
        };
        return Ok(RegimeReport {
            regime: Regime::AAccelerated,
            applicable_bound: bound,
            bound_exponent: exponent,
            critical: false,
            exponents,
        });
    }

    // decelerated: d > 0 always holds here
    let pf = pf.expect("decelerated expansion has a positive Fujita dimension");
    let heat_poly = if p < pf && !on_critical(p, pf) {
        heatlike_exponent(d, p)
    } else {
        None
    };
    let wave_poly = if p < pc && !on_critical(p, pc) {
        Some(-2.0 * p * (p - 1.0) / g0)
    } else {
        None
    };
    let heat_crit = on_critical(p, pf);
    let wave_crit = on_critical(p, pc) && pc > pf;

    let report = |regime, bound: &str, exponent, critical| RegimeReport {
        regime,
        applicable_bound: bound.to_string(),
        bound_exponent: exponent,
        critical,
        exponents: exponents.clone(),
    };
    let heat_text = "T <= C eps^{-(p-1)/(2-(n-2/(1+w))(p-1))}";
    let wave_text = "T <= C eps^{-2p(p-1)/gamma0(n,p,w)}";

    Ok(match (heat_poly, wave_poly) {
        (Some(eh), Some(ew)) => {
            // the stronger upper bound has the ε-exponent closer to zero
            if eh.abs() < ew.abs() {
                report(Regime::CHeatlike, heat_text, Some(eh), false)
            } else if ew.abs() < eh.abs() {
                report(Regime::BWavelike, wave_text, Some(ew), false)
            } else {
                report(Regime::BWavelike, wave_text, Some(ew), true)
            }
        }
        (Some(eh), None) => report(Regime::CHeatlike, heat_text, Some(eh), false),
        (None, Some(ew)) => report(Regime::BWavelike, wave_text, Some(ew), false),
        (None, None) if heat_crit => report(
            Regime::CHeatlike,
            "T <= exp(C eps^{-(p-1)})",
            None,
            true,
        ),
        (None, None) if wave_crit => report(
            Regime::BWavelike,
            "T <= exp(C eps^{-p(p-1)})",
            None,
            true,
        ),
        (None, None) => report(Regime::NoBlowupProved, "none", None, false),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// α > 1: T ≤ C ε^{−(p−1)/2}.
    Accelerated,
    /// α = 1: T²(ln T)^{−n(p−1)} ≤ C ε^{−(p−1)}.
    UniformLog,
    /// α < 1, 1 < p < p_c(n,α,μ): T ≤ C ε^{−2p(p−1)/((1−α)γ)}.
    Wavelike,
    /// α < 1, p = p_c(n,α,μ) > p_F(n(1−α)): T ≤ exp(C ε^{−p(p−1)}).
    WavelikeCritical,
    /// α < 1, 1 < p < p_F(n(1−α)): T ≤ C ε^{−(p−1)/(2−n(1−α)(p−1))}.
    Heatlike,
    /// α < 1, p = p_F(n(1−α)): T ≤ exp(C ε^{−(p−1)}).
    HeatlikeCritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifespanBound {
    pub kind: BoundKind,
    pub value: f64,
}

/// Every proven lifespan upper bound that applies to `params`, evaluated
/// with normalisation constant `c`.
pub fn lifespan_bounds(params: &ModelParams, c: f64) -> Result<Vec<LifespanBound>> {
    params.validate()?;
    let eps = params.epsilon;
    if !(eps > 0.0 && eps <= 1.0) {
        return domain(format!("epsilon must lie in (0, 1], got {eps}"));
    }
    if !(c > 0.0) || !c.is_finite() {
        return domain(format!("normalization C must be > 0, got {c}"));
    }
    let p = params.p;
    let n = params.n as f64;
    let alpha = params.alpha;

    if (alpha - 1.0).abs() <= ALPHA_ONE_TOL {
        let k = n * (p - 1.0);
        let ln_target = c.ln() - (p - 1.0) * eps.ln();
        let s = solve_log_power(2.0, k, ln_target).ok_or_else(|| {
            Error::NoSolution(format!(
                "C eps^-(p-1) = {} is below the minimum of T^2 (ln T)^-{k}",
                ln_target.exp()
            ))
        })?;
        return Ok(vec![LifespanBound {
            kind: BoundKind::UniformLog,
            value: s.exp(),
        }]);
    }
    if alpha > 1.0 {
        return Ok(vec![LifespanBound {
            kind: BoundKind::Accelerated,
            value: c * eps.powf(-(p - 1.0) / 2.0),
        }]);
    }

    let mut out = Vec::new();
    let d = n * (1.0 - alpha);
    let pf = p_fujita(d)?;
    // a degenerate gamma has no critical exponent; the wave-like pair is skipped
    if let Ok(pc) = p_crit(params.n, alpha, params.mu) {
        if on_critical(p, pc) {
            if pc > pf {
                out.push(LifespanBound {
                    kind: BoundKind::WavelikeCritical,
                    value: (c * eps.powf(-p * (p - 1.0))).exp(),
                });
            }
        } else if p < pc {
            let g = gamma(params.n, p, alpha, params.mu)?;
            let e = -2.0 * p * (p - 1.0) / ((1.0 - alpha) * g);
            out.push(LifespanBound {
                kind: BoundKind::Wavelike,
                value: c * eps.powf(e),
            });
        }
    }
    if on_critical(p, pf) {
        out.push(LifespanBound {
            kind: BoundKind::HeatlikeCritical,
            value: (c * eps.powf(-(p - 1.0))).exp(),
        });
    } else if let Some(e) = heatlike_exponent(d, p) {
        out.push(LifespanBound {
            kind: BoundKind::Heatlike,
            value: c * eps.powf(e),
        });
    }
    if out.is_empty() {
        return Err(Error::NoBoundApplies(format!(
            "p = {p} exceeds both p_c(n,alpha,mu) and p_F(n(1-alpha)) = {pf}"
        )));
    }
    Ok(out)
}

/// Smallest applicable lifespan upper bound, with normalisation `c`.
pub fn lifespan_bound(params: &ModelParams, c: f64) -> Result<f64> {
    let bounds = lifespan_bounds(params, c)?;
    Ok(bounds
        .iter()
        .map(|b| b.value)
        .fold(f64::INFINITY, f64::min))
}
