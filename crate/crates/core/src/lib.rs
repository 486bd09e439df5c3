//! Numerical laboratory for finite-time blow-up of the semilinear wave
//! equation
//!
//! ```text
//! u_tt - t^{-2α} Δu + (μ/t) u_t = |u|^p,   t > 1, x ∈ R^n
//! ```
//!
//! which is the flat FLRW wave equation with a(t) ∝ t^{2/(n(1+w))} once
//! α = 2/(n(1+w)) and μ = 2/(1+w).
//!
//! The crate is split by subsystem:
//!
//! * [`exponents`]: critical exponents, the FLRW dictionary, regime
//!   classification and closed-form lifespan upper bounds.
//! * [`kato`]: the iterated lower-bound machinery behind the blow-up
//!   argument and an adaptive integrator for the comparison ODE
//!   `F'' + (μ/t) F' = K(t) |F|^p`.
//! * [`wave`]: a radially symmetric finite-difference solver for the PDE.
//! * [`sweep`]: ε-sweeps over either model and log-log scaling fits.
//! * [`regions`]: plot-ready (w, p) regime grids.

pub mod error;
pub mod exponents;
pub mod kato;
pub mod regions;
pub mod roots;
pub mod sweep;
pub mod wave;

pub use error::{Error, Result};
pub use exponents::{
    classify_regime, gamma, gamma0, gamma_s, lifespan_bound, p_crit, p_crit_flrw, p_fujita,
    p_strauss, w_star, FlrwParams, ModelParams, Regime, RegimeReport,
};
pub use kato::{
    divergence_condition, integrate_kato, kato_bound, kato_e, kato_sequences, ode_lifespan_sweep,
    Coefficient, IntegratorOptions, KatoParams, KatoSequences, LemmaVariant, OdeTermination,
    OdeTrajectory,
};
pub use regions::{RegionGrid, RegionGridSpec};
pub use sweep::{
    fit_log_corrected, fit_powerlaw, sweep, FitOptions, FitResult, FitTransform, OdeSweepConfig,
    PdeSweepConfig, SourceConfig, SourceKind, SweepRecord,
};
pub use wave::{
    functional_f, radial_laplacian, run_to_blowup, support_radius, verify_cone, ConeReport,
    LightCone, RadialGrid, RadialState, SimOptions, SimResult, SimTermination, Stepper,
};
