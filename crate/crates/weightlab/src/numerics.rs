//! Small numeric helpers shared across the crate.
//!
//! Everything downstream works in log space, so the only primitives needed
//! here are a stable log-sum-exp, stable `log(1 - e^x)` style transforms,
//! and the fixed float formatting used by the deterministic reports.

/// Natural log of 2; dyadic levels are spaced by this amount in log space.
pub const LN_2: f64 = std::f64::consts::LN_2;

/// log(sum(exp(v))) without overflow. Returns -inf for an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        // all -inf (empty sum) or a +inf/NaN dominates; either way m is the answer
        return m;
    }
    let sum: f64 = values.iter().map(|&v| (v - m).exp()).sum();
    m + sum.ln()
}

/// log(exp(a) + exp(b)), the two-term case used by running integrals.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// ln(1 - e^x) for x < 0, stable both near 0- and for very negative x.
pub fn ln_one_minus_exp(x: f64) -> f64 {
    debug_assert!(x < 0.0);
    if x > -LN_2 {
        // 1 - e^x is small: use expm1 for the cancellation-prone region
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// t = log(1/(1-r)) expressed through x = log r; the disc boundary coordinate.
pub fn boundary_coord_from_x(x: f64) -> f64 {
    -ln_one_minus_exp(x)
}

/// Inverse of the disc grid parameterization: r = 1 - e^{-t}.
pub fn radius_from_boundary_coord(t: f64) -> f64 {
    -(-t).exp_m1()
}

/// Round to 12 significant decimal digits. Report values go through this so
/// that serialized output is identical across platforms and libm versions.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    // format at 12 significant digits and parse back; the detour through the
    // decimal string is exactly the rounding we want
    format!("{:.11e}", x).parse().unwrap_or(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_single_term_is_identity() {
        for &v in &[0.0, -3.5, 700.0, -745.0] {
            assert_eq!(log_sum_exp(&[v]), v);
        }
    }

    #[test]
    fn log_sum_exp_handles_large_terms() {
        let v = log_sum_exp(&[1000.0, 1000.0]);
        assert!((v - (1000.0 + LN_2)).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn ln_one_minus_exp_matches_naive_in_safe_range() {
        for &x in &[-0.5f64, -1.0, -5.0, -0.01, -40.0] {
            let naive = (1.0 - x.exp()).ln();
            let stable = ln_one_minus_exp(x);
            assert!(
                (naive - stable).abs() <= 1e-12 * naive.abs().max(1.0),
                "x={x}: {naive} vs {stable}"
            );
        }
    }

    #[test]
    fn boundary_coord_roundtrip() {
        for n in 1..50 {
            let r = 1.0 - 2f64.powi(-n);
            let t = boundary_coord_from_x(r.ln());
            assert!((t - (n as f64) * LN_2).abs() < 1e-9 * (n as f64));
            let back = radius_from_boundary_coord(t);
            assert!((back - r).abs() < 1e-15);
        }
    }

    #[test]
    fn round_sig12_is_idempotent_and_stable() {
        let x = std::f64::consts::PI;
        let r1 = round_sig12(x);
        let r2 = round_sig12(r1);
        assert_eq!(r1, r2);
        assert!((r1 - x).abs() < 1e-11);
        assert_eq!(round_sig12(0.0), 0.0);
        assert!(round_sig12(f64::INFINITY).is_infinite());
    }
}
