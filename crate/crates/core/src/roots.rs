//! Small root-finding helpers shared by the exponent and bound code.

/// Real roots of `a x^2 + b x + c = 0`, returned in ascending order.
///
/// Uses the cancellation-free form `q = -(b + sign(b) sqrt(disc)) / 2`,
/// roots `q / a` and `c / q`. Returns `None` for a negative discriminant or
/// a vanishing leading coefficient.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    if a == 0.0 || !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return None;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let q = -0.5 * (b + disc.sqrt().copysign(b));
    if q == 0.0 {
        // b == 0 and c == 0: double root at the origin
        return Some((0.0, 0.0));
    }
    let r0 = q / a;
    let r1 = c / q;
    Some((r0.min(r1), r0.max(r1)))
}

/// Discriminant of `a x^2 + b x + c`.
pub fn discriminant(a: f64, b: f64, c: f64) -> f64 {
    b * b - 4.0 * a * c
}

/// Solves `lead * s - log_exp * ln(s) = ln_target` for `s` on the branch
/// `s > log_exp / lead`, where the left side is increasing.
///
/// This is the logarithmic form of `T^lead (ln T)^{-log_exp} = target` with
/// `s = ln T`. Returns `None` when `ln_target` lies below the branch minimum.
pub fn solve_log_power(lead: f64, log_exp: f64, ln_target: f64) -> Option<f64> {
    debug_assert!(lead > 0.0 && log_exp >= 0.0);
    let g = |s: f64| lead * s - log_exp * s.ln() - ln_target;
    let s_min = log_exp / lead;
    let mut lo = if s_min > 0.0 { s_min } else { f64::MIN_POSITIVE };
    if g(lo) > 0.0 {
        return None;
    }
    let mut hi = (2.0 * lo).max(1.0);
    while g(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return None;
        }
    }
    // bisect until the bracket stops shrinking
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(if g(lo).abs() < g(hi).abs() { lo } else { hi })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_roots_of_strauss_polynomial() {
        // -2p^2 + 4p + 2 = 0  ->  1 ± sqrt(2)
        let (lo, hi) = quadratic_roots(-2.0, 4.0, 2.0).unwrap();
        assert!((hi - (1.0 + 2f64.sqrt())).abs() < 1e-15);
        assert!((lo - (1.0 - 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn tiny_root_without_cancellation() {
        // x^2 - 1e8 x + 1 = 0 has a root near 1e-8 that the textbook formula loses.
        let (lo, _) = quadratic_roots(1.0, -1e8, 1.0).unwrap();
        assert!((lo - 1e-8).abs() / 1e-8 < 1e-14);
    }

    #[test]
    fn negative_discriminant_and_degenerate() {
        assert!(quadratic_roots(1.0, 0.0, 1.0).is_none());
        assert!(quadratic_roots(0.0, 1.0, 1.0).is_none());
    }

    #[test]
    fn log_power_back_substitution() {
        // T^2 (ln T)^-2 = e^4, root on the branch ln T > 1
        let s = solve_log_power(2.0, 2.0, 4.0).unwrap();
        assert!((s - 3.146193220620582585).abs() < 1e-13);
        assert!((2.0 * s - 2.0 * s.ln() - 4.0).abs() < 1e-13);
    }

    #[test]
    fn log_power_below_minimum() {
        // minimum of 2s - 2 ln s is 2 at s = 1
        assert!(solve_log_power(2.0, 2.0, 1.5).is_none());
    }
}
