use cosmowave_core::{ModelParams, RadialGrid, Stepper};

/// L∞ error at t = 2 against u*(t, r) = e^{-r^2}/t on `cells` cells of
/// [0, 6], n = 3, α = 1.5, μ = 2, p = 2, driven by the matching forcing.
pub fn manufactured_error(cells: usize) -> f64 {
    let (n, alpha, mu, p) = (3u32, 1.5, 2.0, 2.0);
    let params = ModelParams::new(n, alpha, mu, p, 1.0, 1.0).unwrap();
    let grid = RadialGrid::new(6.0, cells, n).unwrap();
    let exact = |t: f64, r: f64| (-r * r).exp() / t;
    let forcing = move |t: f64, r: f64| {
        let e = (-r * r).exp();
        let u_tt = 2.0 * e / t.powi(3);
        let u_t = -e / (t * t);
        let lap = (4.0 * r * r - 2.0 * n as f64) * e / t;
        u_tt - t.powf(-2.0 * alpha) * lap + mu / t * u_t - (e / t).powf(p)
    };
    let steps = (1.0 / (0.4 * grid.h())).round() as usize;
    let dt = 1.0 / steps as f64;
    let u0 = grid.sample(|r| exact(1.0, r));
    let v0 = grid.sample(|r| -exact(1.0, r));
    let mut stepper = Stepper::new(grid.clone(), params).unwrap().with_forcing(forcing);
    let mut state = stepper.initial_state(u0, v0, 1.0, dt);
    for _ in 0..steps {
        stepper.step(&mut state);
    }
    assert!((state.t - 2.0).abs() < 1e-9);
    state
        .u
        .iter()
        .zip(grid.nodes())
        .map(|(u, r)| (u - exact(2.0, r)).abs())
        .fold(0.0, f64::max)
}

/// Observed orders between consecutive refinements.
pub fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}
