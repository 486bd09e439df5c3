//! Radially symmetric finite-difference solver for
//!
//! ```text
//! u_tt - t^{-2α} Δu + (μ/t) u_t = |u|^p
//! ```
//!
//! The radial Laplacian `u_rr + (n-1)/r u_r` is discretised in conservative
//! (flux) form on the nodes `r_i = i h`: each node owns the shell
//! `[r_i - h/2, r_i + h/2]` and the flux through a face is
//! `r_face^{n-1} (u_{i+1} - u_i)/h`. On a uniform grid this is a second-order
//! centred stencil, it reduces to `n u_rr(0)` with the mirror ghost
//! `u_{-1} = u_1` at the origin, it is exact on `r^2`, and the discrete
//! integral `Σ V_i Δ_h u_i` telescopes to the outer boundary flux. The last
//! property makes the discrete `F(t) = ω Σ V_i u_i` obey the same ODE as the
//! continuous functional.
//!
//! Time stepping is leapfrog with the damping term time-centred and solved
//! for the new level, so `μ/t` does not enter the step restriction.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exponents::ModelParams;

/// Finite-speed-of-propagation cone `|x| ≤ R + A(t)`, `A(t) = ∫_1^t s^{-α} ds`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LightCone {
    pub alpha: f64,
    #[serde(rename = "R")]
    pub radius: f64,
}

impl LightCone {
    pub fn new(alpha: f64, radius: f64) -> Result<Self> {
        if !(alpha >= 1.0) {
            return domain(format!("light cone needs alpha >= 1, got {alpha}"));
        }
        if !(radius > 0.0) {
            return domain(format!("R must be > 0, got {radius}"));
        }
        Ok(LightCone { alpha, radius })
    }

    /// `A(t)`: `ln t` for α = 1, `(1 - t^{1-α})/(α-1)` otherwise.
    pub fn extent(alpha: f64, t: f64) -> f64 {
        if alpha == 1.0 {
            t.ln()
        } else {
            (1.0 - t.powf(1.0 - alpha)) / (alpha - 1.0)
        }
    }

    pub fn radius_at(&self, t: f64) -> f64 {
        self.radius + Self::extent(self.alpha, t)
    }

    /// `sup_t A(t) = 1/(α-1)` for α > 1; unbounded for α = 1.
    pub fn extent_bound(&self) -> Option<f64> {
        (self.alpha > 1.0).then(|| 1.0 / (self.alpha - 1.0))
    }
}

/// Uniform radial grid `r_i = i h`, `i = 0..=N`, with Dirichlet `u_N = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    r_max: f64,
    cells: usize,
    n: u32,
    h: f64,
    /// `r_{i+1/2}^{n-1}` for faces `i = 0..N-1`.
    face: Vec<f64>,
    /// Shell volumes `(r_{i+1/2}^n - r_{i-1/2}^n)/n`, without the sphere area.
    volume: Vec<f64>,
}

impl RadialGrid {
    pub fn new(r_max: f64, cells: usize, n: u32) -> Result<Self> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return domain(format!("r_max must be > 0, got {r_max}"));
        }
        if cells < 16 {
            return domain(format!("need at least 16 cells, got {cells}"));
        }
        if n < 1 {
            return domain("dimension must be >= 1");
        }
        let h = r_max / cells as f64;
        let nf = n as f64;
        let face: Vec<f64> = (0..cells)
            .map(|i| ((i as f64 + 0.5) * h).powi(n as i32 - 1))
            .collect();
        let volume = (0..=cells)
            .map(|i| {
                let r = i as f64 * h;
                let outer = if i == cells { r } else { r + 0.5 * h };
                let inner = (r - 0.5 * h).max(0.0);
                (outer.powf(nf) - inner.powf(nf)) / nf
            })
            .collect();
        Ok(RadialGrid {
            r_max,
            cells,
            n,
            h,
            face,
            volume,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dim(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.cells + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.cells).map(|i| self.r(i))
    }

    /// Quadrature weights (shell volumes) without the sphere area `ω_{n-1}`.
    pub fn volumes(&self) -> &[f64] {
        &self.volume
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes().map(f).collect()
    }
}

/// Surface area of the unit sphere in `R^n`: `2 π^{n/2} / Γ(n/2)`.
pub fn sphere_area(n: u32) -> f64 {
    // Γ(n/2) by the half-integer recursion
    let mut g = if n % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut x = if n % 2 == 0 { 1.0 } else { 0.5 };
    while x < n as f64 / 2.0 {
        g *= x;
        x += 1.0;
    }
    2.0 * PI.powf(n as f64 / 2.0) / g
}

/// Discrete radial Laplacian of `u` into `out`. `out[N]` is zero.
pub fn radial_laplacian_into(u: &[f64], grid: &RadialGrid, out: &mut [f64]) {
    let n = grid.cells;
    debug_assert_eq!(u.len(), n + 1);
    let inv_h = 1.0 / grid.h;
    let mut flux_left = 0.0;
    for i in 0..n {
        let flux_right = grid.face[i] * (u[i + 1] - u[i]) * inv_h;
        out[i] = (flux_right - flux_left) / grid.volume[i];
        flux_left = flux_right;
    }
    out[n] = 0.0;
}

pub fn radial_laplacian(u: &[f64], grid: &RadialGrid) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    radial_laplacian_into(u, grid, &mut out);
    out
}

/// Discretised field at time `t`: current level `u`, previous level
/// `u_prev = u(t - dt)` and a second-order velocity estimate `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialState {
    pub t: f64,
    pub dt: f64,
    pub u: Vec<f64>,
    pub u_prev: Vec<f64>,
    pub v: Vec<f64>,
}

impl RadialState {
    pub fn max_abs(&self) -> f64 {
        self.u.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().all(|x| x.is_finite())
    }
}

type Forcing = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Leapfrog stepper for one parameter set on one grid.
pub struct Stepper {
    grid: RadialGrid,
    params: ModelParams,
    nonlinear: bool,
    forcing: Option<Forcing>,
    lap: Vec<f64>,
    next: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: RadialGrid, params: ModelParams) -> Result<Self> {
        params.validate()?;
        if grid.n != params.n {
            return domain(format!(
                "grid dimension {} does not match n = {}",
                grid.n, params.n
            ));
        }
        let len = grid.len();
        Ok(Stepper {
            grid,
            params,
            nonlinear: true,
            forcing: None,
            lap: vec![0.0; len],
            next: vec![0.0; len],
        })
    }

    /// Switches the `|u|^p` source on or off.
    pub fn with_nonlinearity(mut self, on: bool) -> Self {
        self.nonlinear = on;
        self
    }

    /// Adds an external source `g(t, r)` to the right-hand side.
    pub fn with_forcing(mut self, g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.forcing = Some(Box::new(g));
        self
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    fn wave_speed_sq(&self, t: f64) -> f64 {
        t.powf(-2.0 * self.params.alpha)
    }

    fn source(&self, t: f64, i: usize, u: f64) -> f64 {
        let mut s = if self.nonlinear { u.abs().powf(self.params.p) } else { 0.0 };
        if let Some(g) = &self.forcing {
            s += g(t, self.grid.r(i));
        }
        s
    }

    /// Builds the state at `t0` from `u(t0)`, `u_t(t0)`. The previous level
    /// comes from a backward Taylor step with the PDE acceleration.
    pub fn initial_state(&mut self, u0: Vec<f64>, v0: Vec<f64>, t0: f64, dt: f64) -> RadialState {
        let len = self.grid.len();
        assert_eq!(u0.len(), len);
        assert_eq!(v0.len(), len);
        radial_laplacian_into(&u0, &self.grid, &mut self.lap);
        let c2 = self.wave_speed_sq(t0);
        let damp = self.params.mu / t0;
        let mut u_prev = vec![0.0; len];
        for i in 0..self.grid.cells {
            let acc = c2 * self.lap[i] - damp * v0[i] + self.source(t0, i, u0[i]);
            u_prev[i] = u0[i] - dt * v0[i] + 0.5 * dt * dt * acc;
        }
        RadialState {
            t: t0,
            dt,
            u: u0,
            u_prev,
            v: v0,
        }
    }

    /// Advances `state` by one step of size `state.dt`.
    pub fn step(&mut self, state: &mut RadialState) {
        let dt = state.dt;
        let t = state.t;
        radial_laplacian_into(&state.u, &self.grid, &mut self.lap);
        let c2 = self.wave_speed_sq(t);
        let k = 0.5 * self.params.mu * dt / t;
        let (plus, minus) = (1.0 + k, 1.0 - k);
        let dt2 = dt * dt;
        let last = self.grid.cells;
        for i in 0..last {
            let rhs = 2.0 * state.u[i] - minus * state.u_prev[i]
                + dt2 * (c2 * self.lap[i] + self.source(t, i, state.u[i]));
            self.next[i] = rhs / plus;
        }
        self.next[last] = 0.0;
        // v at the new level from the three-point backward difference
        let inv = 0.5 / dt;
        for i in 0..=last {
            state.v[i] = (3.0 * self.next[i] - 4.0 * state.u[i] + state.u_prev[i]) * inv;
        }
        std::mem::swap(&mut state.u_prev, &mut state.u);
        std::mem::swap(&mut state.u, &mut self.next);
        state.t = t + dt;
    }
}

/// Largest node radius with `|u| > tol`, or 0.
pub fn support_radius(u: &[f64], grid: &RadialGrid, tol: f64) -> f64 {
    u.iter()
        .rposition(|x| x.abs() > tol)
        .map_or(0.0, |i| grid.r(i))
}

/// `(F, F')` with `F = ∫ u dx = ω_{n-1} Σ V_i u_i` and likewise for `u_t`.
pub fn functional_f(state: &RadialState, grid: &RadialGrid) -> (f64, f64) {
    let w = sphere_area(grid.n);
    let (f, fp) = grid
        .volume
        .iter()
        .zip(state.u.iter().zip(&state.v))
        .fold((0.0, 0.0), |(f, fp), (vol, (u, v))| (f + vol * u, fp + vol * v));
    (w * f, w * fp)
}

/// `ω Σ V_i |u_i|^p`, the discrete `∫ |u|^p dx`.
pub fn power_integral(u: &[f64], grid: &RadialGrid, p: f64) -> f64 {
    sphere_area(grid.n)
        * grid
            .volume
            .iter()
            .zip(u)
            .map(|(vol, x)| vol * x.abs().powf(p))
            .sum::<f64>()
}

/// Discrete energy `½ Σ V v² + ½ c² Σ r_face^{n-1} (Δu)²/h` (no sphere area).
pub fn discrete_energy(state: &RadialState, grid: &RadialGrid, alpha: f64) -> f64 {
    let c2 = state.t.powf(-2.0 * alpha);
    let kinetic: f64 = grid.volume.iter().zip(&state.v).map(|(w, v)| w * v * v).sum();
    let potential: f64 = (0..grid.cells)
        .map(|i| {
            let d = state.u[i + 1] - state.u[i];
            grid.face[i] * d * d / grid.h
        })
        .sum();
    0.5 * kinetic + 0.5 * c2 * potential
}

/// Default initial profile `(1 - (r/R)^2)^4` on `r ≤ R`.
pub fn bump(r: f64, radius: f64) -> f64 {
    if r >= radius {
        0.0
    } else {
        let s = 1.0 - (r / radius) * (r / radius);
        s * s * s * s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimOptions {
    /// `max|u|` at which blow-up is declared.
    pub threshold: f64,
    pub horizon: f64,
    /// Record a history sample every `stride` steps.
    pub stride: usize,
    /// Courant number `dt/h`; defaults to `min(0.5, 0.9/sqrt(n))`.
    pub cfl: Option<f64>,
    /// Support tolerance relative to `max|u|` at t = 1.
    pub support_tol: f64,
    /// Cells of clearance required between the cone at the horizon and `r_max`.
    pub margin_cells: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            threshold: 1e6,
            horizon: 100.0,
            stride: 10,
            cfl: None,
            support_tol: 1e-12,
            margin_cells: 8,
        }
    }
}

impl SimOptions {
    pub fn cfl_for(&self, n: u32) -> f64 {
        self.cfl.unwrap_or_else(|| 0.5f64.min(0.9 / (n as f64).sqrt()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimTermination {
    Threshold,
    Horizon,
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSample {
    pub t: f64,
    pub max_u: f64,
    pub support_r: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "Fprime")]
    pub fprime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub params: ModelParams,
    pub r_max: f64,
    pub cells: usize,
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
    pub lifespan_estimate: Option<f64>,
    pub terminated_reason: SimTermination,
    pub samples: Vec<SimSample>,
}

impl SimResult {
    pub fn max_history(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.samples.iter().map(|s| (s.t, s.max_u))
    }

    pub fn support_history(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.samples.iter().map(|s| (s.t, s.support_r))
    }

    pub fn f_history(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.samples.iter().map(|s| (s.t, s.f, s.fprime))
    }
}

/// Checks that the grid keeps the outer Dirichlet boundary clear of the cone.
pub fn check_boundary_clearance(
    params: &ModelParams,
    grid: &RadialGrid,
    opts: &SimOptions,
) -> Result<()> {
    if !(params.alpha >= 1.0) {
        return Err(Error::Config(format!(
            "the simulator covers alpha >= 1 only, got {}",
            params.alpha
        )));
    }
    let reach = params.radius + LightCone::extent(params.alpha, opts.horizon);
    let need = reach + opts.margin_cells as f64 * grid.h();
    if grid.r_max() < need {
        return Err(Error::Config(format!(
            "r_max = {} is inside the light cone plus margin ({need:.6}) at the horizon {}",
            grid.r_max(),
            opts.horizon
        )));
    }
    Ok(())
}

/// Runs from t = 1 with data `ε (u0, u0)`, `u0` the default bump, until
/// `max|u|` crosses the threshold, the horizon is reached or the state stops
/// being finite.
pub fn run_to_blowup(params: &ModelParams, grid: &RadialGrid, opts: &SimOptions) -> Result<SimResult> {
    params.validate()?;
    if !(opts.horizon > 1.0) {
        return Err(Error::Config("horizon must exceed 1".into()));
    }
    if !(opts.threshold > 0.0) {
        return Err(Error::Config("threshold must be > 0".into()));
    }
    if opts.stride == 0 {
        return Err(Error::Config("stride must be >= 1".into()));
    }
    check_boundary_clearance(params, grid, opts)?;
    let cfl = opts.cfl_for(params.n);
    if !(cfl > 0.0 && cfl * (params.n as f64).sqrt() < 1.0) {
        return Err(Error::Config(format!(
            "cfl = {cfl} violates the leapfrog stability limit 1/sqrt(n)"
        )));
    }

    let dt = cfl * grid.h();
    let eps = params.epsilon;
    let u0 = grid.sample(|r| eps * bump(r, params.radius));
    let v0 = u0.clone();
    let mut stepper = Stepper::new(grid.clone(), *params)?;
    let mut state = stepper.initial_state(u0, v0, 1.0, dt);

    let tol = opts.support_tol * state.max_abs();
    let sample = |s: &RadialState| {
        let (f, fprime) = functional_f(s, grid);
        SimSample {
            t: s.t,
            max_u: s.max_abs(),
            support_r: support_radius(&s.u, grid, tol),
            f,
            fprime,
        }
    };

    let mut samples = vec![sample(&state)];
    let mut steps = 0usize;
    let mut prev_max = state.max_abs();
    let (lifespan, reason) = loop {
        if state.t >= opts.horizon - 1e-12 * opts.horizon {
            break (None, SimTermination::Horizon);
        }
        stepper.step(&mut state);
        steps += 1;
        if !state.is_finite() {
            break (Some(state.t), SimTermination::NonFinite);
        }
        let m = state.max_abs();
        if m >= opts.threshold {
            // log-linear interpolation of the crossing inside the last step
            let t_prev = state.t - dt;
            let t_cross = if prev_max > 0.0 && m > prev_max {
                let frac = (opts.threshold.ln() - prev_max.ln()) / (m.ln() - prev_max.ln());
                t_prev + frac.clamp(0.0, 1.0) * dt
            } else {
                state.t
            };
            samples.push(sample(&state));
            break (Some(t_cross), SimTermination::Threshold);
        }
        prev_max = m;
        if steps % opts.stride == 0 {
            samples.push(sample(&state));
        }
    };
    if reason == SimTermination::Horizon && samples.last().map(|s| s.t) != Some(state.t) {
        samples.push(sample(&state));
    }

    Ok(SimResult {
        params: *params,
        r_max: grid.r_max(),
        cells: grid.cells(),
        h: grid.h(),
        dt,
        steps,
        lifespan_estimate: lifespan,
        terminated_reason: reason,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    /// `max_t (support(t) - R - A(t)) / h`; negative when strictly inside.
    pub max_violation_h: f64,
    pub worst_time: f64,
    pub samples_checked: usize,
    /// Every sample within the 3h slack.
    pub contained: bool,
}

/// Slack, in cells, allowed between the discrete support and the cone.
pub const CONE_SLACK_CELLS: f64 = 3.0;

pub fn verify_cone(result: &SimResult, cone: &LightCone) -> ConeReport {
    let h = result.h;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_time = 1.0;
    let mut checked = 0;
    for (t, r) in result.support_history() {
        checked += 1;
        // zero support is trivially inside
        let excess = if r == 0.0 {
            -cone.radius_at(t) / h
        } else {
            (r - cone.radius_at(t)) / h
        };
        if excess > worst {
            worst = excess;
            worst_time = t;
        }
    }
    ConeReport {
        max_violation_h: worst,
        worst_time,
        samples_checked: checked,
        contained: worst <= CONE_SLACK_CELLS,
    }
}
