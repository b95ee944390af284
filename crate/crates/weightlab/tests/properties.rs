//! Property tests over arbitrary monotone log-profiles (not only log-convex
//! ones): the hull and Legendre-transform invariants have to survive any
//! valid input, not just the built-in families.

use proptest::prelude::*;
use weightlab::convexity::{convex_minorant, is_log_convex, monomial_log_norms_lenient};
use weightlab::operators::PolyFunction;
use weightlab::weight::{Domain, LogProfile};

/// Strictly increasing xs, nondecreasing phis, on either domain.
fn arb_profile() -> impl Strategy<Value = LogProfile> {
    let steps = prop::collection::vec((1e-3f64..2.0, 0.0f64..5.0), 3..40);
    (steps, any::<bool>()).prop_map(|(steps, disc)| {
        let mut xs = Vec::with_capacity(steps.len() + 1);
        let mut phis = Vec::with_capacity(steps.len() + 1);
        let span: f64 = steps.iter().map(|(dx, _)| dx).sum();
        let mut x = if disc { -span - 0.5 } else { -1.0 };
        let mut phi = 0.0;
        xs.push(x);
        phis.push(phi);
        for (dx, dphi) in steps {
            x += dx;
            phi += dphi;
            xs.push(x);
            phis.push(phi);
        }
        LogProfile {
            xs,
            phis,
            domain: if disc { Domain::Disc } else { Domain::Plane },
        }
    })
}

proptest! {
    #[test]
    fn hull_is_below_touches_and_idempotent(p in arb_profile()) {
        let hull = convex_minorant(&p).unwrap();
        let mut touches = 0usize;
        for (i, &x) in p.xs.iter().enumerate() {
            let h = hull.eval(x).unwrap();
            let scale = p.phis[i].abs().max(1.0);
            prop_assert!(h <= p.phis[i] + 1e-9 * scale);
            if (h - p.phis[i]).abs() <= 1e-12 * scale {
                touches += 1;
            }
        }
        prop_assert!(touches >= 2);
        let again = convex_minorant(&hull.to_log_profile(p.domain)).unwrap();
        prop_assert_eq!(&hull, &again);
        let (convex, _) = is_log_convex(&hull.to_log_profile(p.domain), 1e-9).unwrap();
        prop_assert!(convex);
    }

    #[test]
    fn legendre_transform_is_convex_and_hull_invariant(p in arb_profile()) {
        let n_max = 48usize;
        let direct = monomial_log_norms_lenient(&p, n_max).unwrap();
        // transform of anything is convex in n
        let mut prev = f64::NEG_INFINITY;
        for n in 0..n_max {
            let d = direct.a[n + 1] - direct.a[n];
            prop_assert!(d >= prev - 1e-9 * direct.a[n].abs().max(1.0));
            prev = d;
        }
        // maximizers are nondecreasing
        prop_assert!(direct.x_arg.windows(2).all(|ab| ab[1] >= ab[0]));
        // convexification leaves the transform unchanged
        let hull = convex_minorant(&p).unwrap();
        let via_hull =
            monomial_log_norms_lenient(&hull.to_log_profile(p.domain), n_max).unwrap();
        prop_assert_eq!(direct.a, via_hull.a);
    }

    #[test]
    fn derivative_inverts_antiderivative(coeffs in prop::collection::vec(0.0f64..100.0, 0..10)) {
        let f = PolyFunction::new(coeffs).unwrap();
        let back = f.integral().derivative();
        prop_assert_eq!(back.coeffs().len(), f.coeffs().len());
        for (a, b) in back.coeffs().iter().zip(f.coeffs()) {
            // one rounding in the division, one in the multiplication
            prop_assert!((a - b).abs() <= f64::EPSILON * b.abs());
        }
        // integrating the derivative only forgets the constant term
        let no_constant = f.derivative().integral();
        for (k, (a, b)) in no_constant.coeffs().iter().zip(f.coeffs()).enumerate() {
            if k == 0 {
                prop_assert_eq!(*a, 0.0);
            } else {
                prop_assert!((a - b).abs() <= f64::EPSILON * b.abs());
            }
        }
    }
}
