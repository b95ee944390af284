//! Log-convexification and the discrete Legendre transform.
//!
//! The largest convex minorant of a sampled log-profile is its lower convex
//! hull, computed by a single monotone-chain pass (the data is already
//! x-sorted). Monomial norms are the Legendre transform of the profile at
//! integer slopes: `A_n = sup_x (n x - phi(x))`, and because the functional
//! is linear in `(x, phi)` the supremum over the grid is always attained at
//! a hull vertex, so only vertices are scanned.

use crate::weight::{Domain, LogProfile, RadialWeight};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConvexityError {
    #[error("profile has fewer than 2 points")]
    DegenerateProfile,
    #[error("maximizer for n = {0} hit the right end of the grid; extend the grid")]
    MaximizerAtBoundary(usize),
    #[error("x = {0} lies outside the breakpoint range")]
    OutOfRange(f64),
}

/// A convex piecewise-linear function: hull vertices plus segment slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearConvex {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    /// One slope per segment; strictly increasing (collinear runs merge).
    pub slopes: Vec<f64>,
}

impl PiecewiseLinearConvex {
    pub fn eval(&self, x: f64) -> Result<f64, ConvexityError> {
        let n = self.breakpoints.len();
        if x < self.breakpoints[0] || x > self.breakpoints[n - 1] {
            return Err(ConvexityError::OutOfRange(x));
        }
        let seg = match self
            .breakpoints
            .binary_search_by(|b| b.partial_cmp(&x).unwrap())
        {
            Ok(i) => return Ok(self.values[i]),
            Err(i) => i - 1,
        };
        Ok(self.values[seg] + self.slopes[seg] * (x - self.breakpoints[seg]))
    }

    /// Slope of the segment at or right of x; at a breakpoint the right
    /// segment's slope (the last segment at the final breakpoint).
    pub fn right_slope(&self, x: f64) -> Result<f64, ConvexityError> {
        let n = self.breakpoints.len();
        if x < self.breakpoints[0] || x > self.breakpoints[n - 1] {
            return Err(ConvexityError::OutOfRange(x));
        }
        let seg = match self
            .breakpoints
            .binary_search_by(|b| b.partial_cmp(&x).unwrap())
        {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        };
        Ok(self.slopes[seg])
    }

    /// The vertices as a log-profile (the hull of a profile is one).
    pub fn to_log_profile(&self, domain: Domain) -> LogProfile {
        LogProfile {
            xs: self.breakpoints.clone(),
            phis: self.values.clone(),
            domain,
        }
    }
}

/// Right derivative of a convex piecewise-linear function at x.
pub fn right_derivative(q: &PiecewiseLinearConvex, x: f64) -> Result<f64, ConvexityError> {
    q.right_slope(x)
}

/// Largest convex minorant of the sampled profile: the lower convex hull of
/// the point set, via a monotone-chain scan in O(n).
pub fn convex_minorant(p: &LogProfile) -> Result<PiecewiseLinearConvex, ConvexityError> {
    if p.len() < 2 {
        return Err(ConvexityError::DegenerateProfile);
    }
    let mut hull: Vec<usize> = Vec::with_capacity(p.len());
    for i in 0..p.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // keep b only on a strict left turn a -> b -> i (slope increase);
            // collinear points merge into one segment
            let cross = (p.xs[b] - p.xs[a]) * (p.phis[i] - p.phis[a])
                - (p.xs[i] - p.xs[a]) * (p.phis[b] - p.phis[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let breakpoints: Vec<f64> = hull.iter().map(|&i| p.xs[i]).collect();
    let values: Vec<f64> = hull.iter().map(|&i| p.phis[i]).collect();
    let slopes: Vec<f64> = (0..breakpoints.len() - 1)
        .map(|j| (values[j + 1] - values[j]) / (breakpoints[j + 1] - breakpoints[j]))
        .collect();
    Ok(PiecewiseLinearConvex { breakpoints, values, slopes })
}

/// Is phi convex in x? Successive difference-quotient slopes must be
/// nondecreasing up to `tol` scaled by the local slope magnitude (slopes
/// near the disc boundary grow like 1/(1-r), so an absolute band would
/// drown in rounding there). Returns the verdict and the largest absolute
/// slope decrease observed.
pub fn is_log_convex(p: &LogProfile, tol: f64) -> Result<(bool, f64), ConvexityError> {
    if p.len() < 2 {
        return Err(ConvexityError::DegenerateProfile);
    }
    let mut max_violation: f64 = 0.0;
    let mut convex = true;
    let mut prev_slope = f64::NEG_INFINITY;
    for i in 0..p.len() - 1 {
        let s = (p.phis[i + 1] - p.phis[i]) / (p.xs[i + 1] - p.xs[i]);
        let drop = prev_slope - s;
        if drop > max_violation {
            max_violation = drop;
        }
        if drop > tol * prev_slope.abs().max(s.abs()).max(1.0) {
            convex = false;
        }
        prev_slope = s;
    }
    Ok((convex, max_violation))
}

/// The sequence `A_n = log ||z^n||_v` together with its maximizers.
#[derive(Debug, Clone)]
pub struct MonomialNorms {
    /// A[n] for n = 0..=n_max.
    pub a: Vec<f64>,
    /// Argmax of n x - phi(x); nondecreasing in n.
    pub x_arg: Vec<f64>,
    /// True when the maximizer sat at the right end of the grid, i.e. the
    /// grid was too short to certify the supremum for this n.
    pub grid_limited: Vec<bool>,
}

impl MonomialNorms {
    pub fn n_max(&self) -> usize {
        self.a.len() - 1
    }
}

fn norms_from_hull(hull: &PiecewiseLinearConvex, n_max: usize) -> MonomialNorms {
    let m = hull.breakpoints.len();
    let mut a = Vec::with_capacity(n_max + 1);
    let mut x_arg = Vec::with_capacity(n_max + 1);
    let mut grid_limited = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let nf = n as f64;
        // first vertex whose outgoing slope is >= n; all slopes smaller
        // means the sup escapes past the right end of the grid
        let j = hull.slopes.partition_point(|&s| s < nf);
        let at_boundary = j == m - 1;
        a.push(nf * hull.breakpoints[j] - hull.values[j]);
        x_arg.push(hull.breakpoints[j]);
        grid_limited.push(at_boundary);
    }
    MonomialNorms { a, x_arg, grid_limited }
}

/// Grid-exact monomial norms. On the plane a maximizer pinned to the right
/// end of the grid is an error (the true supremum is interior but out of
/// reach); on the disc it is carried as a flag, since there the supremum
/// over x < 0 may genuinely sit arbitrarily close to the boundary.
pub fn monomial_log_norms(p: &LogProfile, n_max: usize) -> Result<MonomialNorms, ConvexityError> {
    let hull = convex_minorant(p)?;
    let norms = norms_from_hull(&hull, n_max);
    if p.domain == Domain::Plane {
        if let Some(n) = norms.grid_limited.iter().position(|&l| l) {
            return Err(ConvexityError::MaximizerAtBoundary(n));
        }
    }
    Ok(norms)
}

/// Like [`monomial_log_norms`] but never errors: plane boundary hits are
/// flagged instead, for callers that exclude them from asymptotics.
pub fn monomial_log_norms_lenient(
    p: &LogProfile,
    n_max: usize,
) -> Result<MonomialNorms, ConvexityError> {
    let hull = convex_minorant(p)?;
    Ok(norms_from_hull(&hull, n_max))
}

/// Monomial norms with a closed-form refinement pass: for smooth built-in
/// sources the interior maximizer of `n x - phi(x)` solves `phi'(x) = n`, and
/// one bisection on the increasing derivative pins it to machine precision.
/// Piecewise-linear sources are already exact at hull vertices.
pub fn monomial_log_norms_refined(
    w: &RadialWeight,
    p: &LogProfile,
    n_max: usize,
) -> Result<MonomialNorms, ConvexityError> {
    let mut norms = monomial_log_norms(p, n_max)?;
    if !w.is_smooth_closed_form() {
        return Ok(norms);
    }
    let (x_lo, x_hi) = (p.xs[0], p.xs[p.len() - 1]);
    for n in 0..=n_max {
        if norms.grid_limited[n] {
            continue;
        }
        let nf = n as f64;
        let d_lo = match w.phi_deriv(x_lo) {
            Some(d) => d,
            None => return Ok(norms),
        };
        if d_lo >= nf {
            continue; // maximizer at the left end; the grid value is it
        }
        let d_hi = w.phi_deriv(x_hi).unwrap();
        if d_hi <= nf {
            continue;
        }
        let (mut lo, mut hi) = (x_lo, x_hi);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if w.phi_deriv(mid).unwrap() < nf {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x_star = 0.5 * (lo + hi);
        let refined = nf * x_star - w.phi(x_star);
        if refined > norms.a[n] {
            norms.a[n] = refined;
            norms.x_arg[n] = x_star;
        }
    }
    Ok(norms)
}

/// The monomial lower envelope of the profile: the largest function of the
/// form `max_n (n x - A_n)` on the profile's grid. The normalized monomials
/// `z^n / ||z^n||_v` are unit-ball members, so the result is a pointwise
/// lower bound for phi, and as a max of affine functions it is convex.
pub fn associated_envelope(m: &MonomialNorms, p: &LogProfile) -> LogProfile {
    let n_max = m.n_max();
    let mut phis = Vec::with_capacity(p.len());
    // the best n is nondecreasing in x, so one forward pointer suffices
    let mut best = 0usize;
    for &x in &p.xs {
        let val = |n: usize| n as f64 * x - m.a[n];
        while best < n_max && val(best + 1) >= val(best) {
            best += 1;
        }
        phis.push(val(best));
    }
    LogProfile { xs: p.xs.clone(), phis, domain: p.domain }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::{sample_log_profile, GridSpec};

    fn profile_of(spec: &str, grid: &GridSpec) -> LogProfile {
        let w = crate::weight::parse_weight_spec(spec).unwrap();
        sample_log_profile(&w, grid).unwrap()
    }

    #[test]
    fn two_point_profile_gives_single_segment() {
        let p = LogProfile {
            xs: vec![0.0, 1.0],
            phis: vec![0.0, 5.0],
            domain: Domain::Plane,
        };
        let h = convex_minorant(&p).unwrap();
        assert_eq!(h.breakpoints, vec![0.0, 1.0]);
        assert_eq!(h.slopes, vec![5.0]);
        assert!(matches!(
            convex_minorant(&LogProfile {
                xs: vec![0.0],
                phis: vec![0.0],
                domain: Domain::Plane
            }),
            Err(ConvexityError::DegenerateProfile)
        ));
    }

    #[test]
    fn hull_of_convex_data_is_the_data() {
        let grid = GridSpec::default();
        let p = profile_of("power_disc(2)@disc", &grid);
        let h = convex_minorant(&p).unwrap();
        for (i, &x) in p.xs.iter().enumerate() {
            let v = h.eval(x).unwrap();
            assert!(
                (v - p.phis[i]).abs() <= 1e-9 * p.phis[i].abs().max(1.0),
                "hull departs from convex input at x = {x}"
            );
        }
    }

    #[test]
    fn hull_of_kinked_data_is_the_chord() {
        let p = LogProfile {
            xs: vec![0.0, 1.0, 2.0],
            phis: vec![0.0, 2.0, 2.5],
            domain: Domain::Plane,
        };
        let h = convex_minorant(&p).unwrap();
        assert_eq!(h.breakpoints, vec![0.0, 2.0]);
        assert_eq!(h.slopes, vec![1.25]);
    }

    #[test]
    fn hull_is_idempotent_and_below_input() {
        let grid = GridSpec::default();
        for spec in ["power_disc(0.5)@disc", "exp_inv_disc(1,1)@disc", "exp_plane(1)@plane"] {
            let p = profile_of(spec, &grid);
            let h = convex_minorant(&p).unwrap();
            let again = convex_minorant(&h.to_log_profile(p.domain)).unwrap();
            assert_eq!(h, again, "{spec}: hull not idempotent");
            let mut touches = 0;
            for (i, &x) in p.xs.iter().enumerate() {
                let v = h.eval(x).unwrap();
                assert!(v <= p.phis[i] + 1e-9 * p.phis[i].abs().max(1.0));
                if v == p.phis[i] {
                    touches += 1;
                }
            }
            assert!(touches >= 2, "{spec}: hull touches input at {touches} points");
        }
    }

    #[test]
    fn log_convexity_of_builtins() {
        let grid = GridSpec::default();
        for spec in [
            "power_disc(0.5)@disc",
            "power_disc(3)@disc",
            "exp_inv_disc(1,1)@disc",
            "log_power_disc(2)@disc",
            "exp_plane(0.5)@plane",
            "exp_plane(1)@plane",
            "exp_plane(2)@plane",
        ] {
            let p = profile_of(spec, &grid);
            let (convex, violation) = is_log_convex(&p, 1e-9).unwrap();
            assert!(convex, "{spec} should be log-convex, violation {violation}");
        }
    }

    #[test]
    fn sawtooth_is_not_log_convex() {
        let p = LogProfile {
            xs: vec![-3.0, -2.0, -1.0, -0.5],
            phis: vec![0.0, 2.0, 2.5, 4.0],
            domain: Domain::Disc,
        };
        let (convex, violation) = is_log_convex(&p, 1e-12).unwrap();
        assert!(!convex);
        // slope drops from 2 to 0.5
        assert!((violation - 1.5).abs() < 1e-12);
    }

    #[test]
    fn hull_output_is_log_convex() {
        let p = LogProfile {
            xs: vec![-3.0, -2.0, -1.0, -0.5, -0.1],
            phis: vec![0.0, 2.0, 2.5, 4.0, 9.0],
            domain: Domain::Disc,
        };
        let h = convex_minorant(&p).unwrap();
        let (convex, _) = is_log_convex(&h.to_log_profile(Domain::Disc), 1e-12).unwrap();
        assert!(convex);
    }

    /// Brute-force oracle: dense scan of n x - phi(x), independent of the
    /// hull/vertex path that the implementation takes.
    fn brute_force_a_n(n: usize, phi: impl Fn(f64) -> f64, x_lo: f64, x_hi: f64) -> f64 {
        let steps = 400_000;
        let mut best = f64::NEG_INFINITY;
        for k in 0..=steps {
            let x = x_lo + (x_hi - x_lo) * k as f64 / steps as f64;
            best = best.max(n as f64 * x - phi(x));
        }
        best
    }

    #[test]
    fn exp_plane_monomial_norms_match_stationarity_oracle() {
        // for v = e^r the true value is A_n = n log n - n (n >= 1), A_0 = 0;
        // cross-check the closed form against the brute-force scan first
        for &n in &[1usize, 5, 17] {
            let closed = n as f64 * (n as f64).ln() - n as f64;
            let brute = brute_force_a_n(n, |x| x.exp(), -1.0, 8.0);
            assert!((brute - closed).abs() < 1e-6, "oracle mismatch at n={n}");
        }
        let w = crate::weight::parse_weight_spec("exp_plane(1)@plane").unwrap();
        let grid = GridSpec::default();
        let p = sample_log_profile(&w, &grid).unwrap();
        let norms = monomial_log_norms_refined(&w, &p, 50).unwrap();
        for n in 1..=50usize {
            let closed = n as f64 * (n as f64).ln() - n as f64;
            assert!(
                (norms.a[n] - closed).abs() < 1e-8,
                "A_{n} = {} vs {}",
                norms.a[n],
                closed
            );
        }
        // A_0 is the left-end value -phi(x_min), approximately -v(r_min)
        assert_eq!(norms.a[0], -p.phis[0]);
        assert!(norms.a[0].abs() < 0.5);
    }

    #[test]
    fn power_disc_first_norm_matches_calculus_oracle() {
        // sup_{r<1} log(r(1-r)) at r* = 1/2 gives log(1/4)
        let w = crate::weight::parse_weight_spec("power_disc(1)@disc").unwrap();
        let p = sample_log_profile(&w, &GridSpec::default()).unwrap();
        let norms = monomial_log_norms_refined(&w, &p, 1).unwrap();
        assert!((norms.a[1] - 0.25f64.ln()).abs() < 1e-9);
        assert!((norms.x_arg[1] - 0.5f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn norms_unchanged_by_convexification() {
        let grid = GridSpec::default();
        for spec in [
            "power_disc(1)@disc",
            "exp_inv_disc(1,1)@disc",
            "log_power_disc(2)@disc",
            "exp_plane(1)@plane",
            "exp_plane(2)@plane",
        ] {
            let p = profile_of(spec, &grid);
            let n_max = if p.domain == Domain::Plane { 256 } else { 128 };
            let direct = monomial_log_norms(&p, n_max).unwrap();
            let hull = convex_minorant(&p).unwrap();
            let via_hull = monomial_log_norms(&hull.to_log_profile(p.domain), n_max).unwrap();
            assert_eq!(direct.a, via_hull.a, "{spec}");
            assert_eq!(direct.x_arg, via_hull.x_arg, "{spec}");
        }
    }

    #[test]
    fn norm_increments_are_nondecreasing() {
        let grid = GridSpec::default();
        for spec in ["exp_plane(1)@plane", "power_disc(2)@disc", "exp_inv_disc(1,2)@disc"] {
            let p = profile_of(spec, &grid);
            let norms = monomial_log_norms_lenient(&p, 100).unwrap();
            let mut prev = f64::NEG_INFINITY;
            for n in 0..100 {
                let d = norms.a[n + 1] - norms.a[n];
                assert!(d >= prev - 1e-9, "{spec}: increments dip at n={n}");
                prev = d;
            }
            // maximizers are nondecreasing too
            assert!(norms.x_arg.windows(2).all(|ab| ab[1] >= ab[0]));
        }
    }

    #[test]
    fn plane_boundary_maximizer_is_an_error() {
        let w = crate::weight::parse_weight_spec("exp_plane(1)@plane").unwrap();
        let grid = GridSpec::new(4, 8).unwrap();
        let p = sample_log_profile(&w, &grid).unwrap();
        // slope at the end of the depth-4 grid is about e^{4 ln 2} = 16
        match monomial_log_norms(&p, 100) {
            Err(ConvexityError::MaximizerAtBoundary(n)) => assert!(n > 10 && n < 40),
            other => panic!("expected boundary error, got {other:?}"),
        }
        // the lenient path flags instead
        let lenient = monomial_log_norms_lenient(&p, 100).unwrap();
        assert!(lenient.grid_limited.iter().any(|&l| l));
        assert!(!lenient.grid_limited[1]);
    }

    #[test]
    fn disc_grid_limited_is_flagged_not_fatal() {
        let w = crate::weight::parse_weight_spec("power_disc(1)@disc").unwrap();
        let grid = GridSpec::new(4, 8).unwrap();
        let p = sample_log_profile(&w, &grid).unwrap();
        let norms = monomial_log_norms(&p, 256).unwrap();
        assert!(norms.grid_limited[256]);
        assert!(!norms.grid_limited[1]);
    }

    #[test]
    fn envelope_is_below_profile_and_convex() {
        let grid = GridSpec::default();
        for spec in ["exp_plane(1)@plane", "power_disc(2)@disc"] {
            let p = profile_of(spec, &grid);
            let norms = monomial_log_norms_lenient(&p, 256).unwrap();
            let env = associated_envelope(&norms, &p);
            for i in 0..p.len() {
                assert!(
                    env.phis[i] <= p.phis[i] + 1e-9 * p.phis[i].abs().max(1.0),
                    "{spec}: envelope exceeds profile"
                );
            }
            // convexity, value-based: convexification leaves the envelope
            // fixed on its own grid
            let h = convex_minorant(&env).unwrap();
            for (i, &x) in env.xs.iter().enumerate() {
                let hv = h.eval(x).unwrap();
                assert!(
                    (hv - env.phis[i]).abs() <= 1e-9 * env.phis[i].abs().max(1.0),
                    "{spec}: envelope not its own hull at x = {x}"
                );
            }
        }
    }

    #[test]
    fn envelope_with_n_zero_is_constant() {
        let grid = GridSpec::default();
        let p = profile_of("exp_plane(1)@plane", &grid);
        let norms = monomial_log_norms_lenient(&p, 0).unwrap();
        let env = associated_envelope(&norms, &p);
        assert!(env.phis.iter().all(|&v| v == -norms.a[0]));
    }

    #[test]
    fn double_transform_fixes_integer_slope_profiles() {
        // convex piecewise-linear with integer slopes 0,1,2,3
        let xs = vec![-4.0, -3.0, -2.0, -1.0, -0.5];
        let phis = vec![1.0, 1.0, 2.0, 4.0, 5.5];
        let p = LogProfile { xs: xs.clone(), phis: phis.clone(), domain: Domain::Disc };
        let norms = monomial_log_norms_lenient(&p, 8).unwrap();
        let env = associated_envelope(&norms, &p);
        for (i, &x) in xs.iter().enumerate() {
            assert!(
                (env.phis[i] - phis[i]).abs() < 1e-12,
                "envelope differs at breakpoint {x}"
            );
        }
    }

    #[test]
    fn envelope_gap_for_exp_plane_is_at_most_x_plus_slack() {
        let w = crate::weight::parse_weight_spec("exp_plane(1)@plane").unwrap();
        let p = sample_log_profile(&w, &GridSpec::default()).unwrap();
        let norms = monomial_log_norms_lenient(&p, 400).unwrap();
        let env = associated_envelope(&norms, &p);
        for (i, &x) in p.xs.iter().enumerate() {
            if x >= 0.0 && x <= (400f64).ln() - 1.0 {
                assert!(
                    p.phis[i] - env.phis[i] <= x + 1.0,
                    "gap too large at x = {x}: {}",
                    p.phis[i] - env.phis[i]
                );
            }
        }
    }

    #[test]
    fn right_derivative_conventions() {
        let q = PiecewiseLinearConvex {
            breakpoints: vec![0.0, 1.0, 2.0],
            values: vec![0.0, 1.0, 3.0],
            slopes: vec![1.0, 2.0],
        };
        assert_eq!(right_derivative(&q, 0.5).unwrap(), 1.0);
        // at a breakpoint: the right segment
        assert_eq!(right_derivative(&q, 1.0).unwrap(), 2.0);
        // at the last breakpoint: the final segment
        assert_eq!(right_derivative(&q, 2.0).unwrap(), 2.0);
        assert!(matches!(
            right_derivative(&q, 2.5),
            Err(ConvexityError::OutOfRange(_))
        ));
        let single = PiecewiseLinearConvex {
            breakpoints: vec![0.0, 2.0],
            values: vec![0.0, 10.0],
            slopes: vec![5.0],
        };
        assert_eq!(right_derivative(&single, 1.3).unwrap(), 5.0);
    }

    #[test]
    fn convexified_power_disc_slope_matches_analytic_derivative() {
        // (1-r) v'/v = alpha for power_disc(alpha): the hull's difference
        // quotients in the boundary coordinate t = log(1/(1-r)) reproduce it
        let alpha = 2.0;
        let w = crate::weight::parse_weight_spec("power_disc(2)@disc").unwrap();
        let p = sample_log_profile(&w, &GridSpec::default()).unwrap();
        let h = convex_minorant(&p).unwrap();
        let t_of = |x: f64| crate::numerics::boundary_coord_from_x(x);
        for j in [10usize, 100, 250] {
            let quotient = (h.values[j + 1] - h.values[j])
                / (t_of(h.breakpoints[j + 1]) - t_of(h.breakpoints[j]));
            assert!((quotient - alpha).abs() < 1e-6, "vertex {j}: {quotient}");
        }
    }
}
