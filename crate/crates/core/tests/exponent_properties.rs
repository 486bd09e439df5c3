use cosmowave_core::exponents::{lifespan_bounds, BoundKind};
use cosmowave_core::{
    classify_regime, gamma, gamma0, gamma_s, p_crit, p_crit_flrw, p_fujita, p_strauss, w_star,
    FlrwParams, ModelParams, Regime,
};
use proptest::prelude::*;

#[test]
fn strauss_roots_and_coincidence() {
    for n in 2..=10 {
        let ps = p_strauss(n).unwrap();
        assert!(gamma_s(n, ps).abs() <= 1e-9, "n = {n}");
        let pc = p_crit(n, 0.0, 0.0).unwrap();
        assert!((pc - ps).abs() <= 1e-12, "n = {n}: {pc} vs {ps}");
    }
}

#[test]
fn critical_curves_cross_at_w_star() {
    for n in [2, 3, 5] {
        let ws = w_star(n).unwrap().expect("root exists for the figure dimensions");
        let f = FlrwParams::new(n, ws).unwrap();
        let pf = p_fujita(f.fujita_dimension()).unwrap();
        assert!((pf - p_crit_flrw(n, ws).unwrap()).abs() <= 1e-8, "n = {n}");
    }
}

proptest! {
    #[test]
    fn p_crit_is_a_root(n in 2u32..=10, alpha in 0.0f64..0.95, mu in 0.0f64..4.0) {
        // the root only exists while the leading coefficient stays negative
        prop_assume!(n as f64 - 1.0 + (mu - alpha) / (1.0 - alpha) > 0.0);
        let pc = p_crit(n, alpha, mu).unwrap();
        prop_assert!(gamma(n, pc, alpha, mu).unwrap().abs() <= 1e-9);
    }

    #[test]
    fn gamma0_factorises(n in 2u32..=10, w in -0.999f64..=1.0, p in 1.0f64..8.0) {
        let alpha = 2.0 / (n as f64 * (1.0 + w));
        prop_assume!(alpha < 1.0);
        let mu = 2.0 / (1.0 + w);
        let lhs = gamma0(n, p, w).unwrap();
        let rhs = (1.0 - alpha) * gamma(n, p, alpha, mu).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn flrw_critical_exponent_exceeds_strauss(n in 2u32..=10, w in -0.999f64..=1.0) {
        prop_assert!(p_crit_flrw(n, w).unwrap() > p_strauss(n).unwrap());
    }

    #[test]
    fn flrw_critical_exponent_is_a_root(n in 2u32..=10, w in -0.999f64..=1.0) {
        let pc = p_crit_flrw(n, w).unwrap();
        prop_assert!(gamma0(n, pc, w).unwrap().abs() <= 1e-9 * pc * pc);
    }

    #[test]
    fn regimes_partition_the_plane(n in 2u32..=6, w in -0.999f64..=1.0, p in 1.0001f64..10.0) {
        let r = classify_regime(n, w, p).unwrap();
        let f = FlrwParams::new(n, w).unwrap();
        if f.accelerated() {
            prop_assert_eq!(r.regime, Regime::AAccelerated);
        } else {
            prop_assert!(r.regime != Regime::AAccelerated);
            let pf = p_fujita(f.fujita_dimension()).unwrap();
            let pc = f.p_crit();
            let above_both = p > pf * (1.0 + 1e-9) && p > pc * (1.0 + 1e-9);
            prop_assert_eq!(r.regime == Regime::NoBlowupProved, above_both);
        }
    }

    #[test]
    fn uniform_log_bound_back_substitutes(n in 2u32..=5, p in 1.2f64..4.0, k in 0.5f64..40.0) {
        // pick ε so that the target C ε^{-(p-1)} is e^k, always above the
        // minimum of T^2 (ln T)^{-n(p-1)} when k is large enough
        let eps = (-k / (p - 1.0)).exp();
        let params = ModelParams::new(n, 1.0, 2.0, p, eps, 1.0).unwrap();
        let kk = n as f64 * (p - 1.0);
        let floor = kk - kk * (kk / 2.0).ln();
        prop_assume!(k > floor + 1e-6);
        let bounds = lifespan_bounds(&params, 1.0).unwrap();
        let b = bounds.iter().find(|b| b.kind == BoundKind::UniformLog).unwrap();
        let s = b.value.ln();
        let residual = 2.0 * s - kk * s.ln() - k;
        prop_assert!(residual.abs() <= 1e-10 * k.abs().max(1.0), "residual {residual}");
    }
}
