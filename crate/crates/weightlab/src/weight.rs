//! Radial weights on the unit disc and the complex plane.
//!
//! A radial weight `v` is positive, continuous and increasing on `[0, a)`
//! with `a = 1` for the disc and `a = +inf` for the plane, blowing up at the
//! boundary (disc) or beating every power of `r` (plane). Everything is kept
//! in log space: the object actually evaluated is `phi(x) = log v(e^x)` with
//! `x = log r`, which stays of moderate size even for weights like
//! `exp(1/(1-r))` close to the boundary.

use crate::numerics::{boundary_coord_from_x, LN_2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("unknown weight family `{0}`")]
    UnknownFamily(String),
    #[error("invalid parameters for `{family}`: {reason}")]
    InvalidParams { family: String, reason: String },
    #[error("weight is invalid on {domain}: {reason}")]
    InvalidForDomain { domain: Domain, reason: String },
    #[error("r = {r} lies outside [0, {boundary})")]
    OutOfDomain { r: f64, boundary: f64 },
    #[error("cannot parse weight spec `{spec}`: {reason}")]
    Parse { spec: String, reason: String },
    #[error("invalid piecewise profile: {0}")]
    InvalidProfile(String),
    #[error("log-evaluation overflowed at r = {0}; weight grows too fast for this grid")]
    Overflow(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("cannot read piecewise weight file `{path}`: {reason}")]
    Io { path: String, reason: String },
}

/// Domain of the weight: the open unit disc or the whole plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Disc,
    Plane,
}

impl Domain {
    /// Boundary radius `a`: 1 for the disc, +inf for the plane.
    pub fn boundary(self) -> f64 {
        match self {
            Domain::Disc => 1.0,
            Domain::Plane => f64::INFINITY,
        }
    }
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Domain::Disc => write!(f, "disc"),
            Domain::Plane => write!(f, "plane"),
        }
    }
}

/// Built-in closed-form families, all evaluated directly in log space.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `(1-r)^{-alpha}` on the disc.
    PowerDisc { alpha: f64 },
    /// `exp(beta / (1-r)^p)` on the disc.
    ExpInvDisc { beta: f64, p: f64 },
    /// `(log(e/(1-r)))^alpha` on the disc.
    LogPowerDisc { alpha: f64 },
    /// `exp(r^p)` on the plane.
    ExpPlane { p: f64 },
    /// `(1+r)^sigma * exp(r^p)` on the plane.
    PowerExpPlane { sigma: f64, p: f64 },
}

impl Family {
    fn domain(&self) -> Domain {
        match self {
            Family::PowerDisc { .. } | Family::ExpInvDisc { .. } | Family::LogPowerDisc { .. } => {
                Domain::Disc
            }
            Family::ExpPlane { .. } | Family::PowerExpPlane { .. } => Domain::Plane,
        }
    }

    /// phi(x) = log v(e^x).
    fn phi(&self, x: f64) -> f64 {
        match *self {
            Family::PowerDisc { alpha } => alpha * boundary_coord_from_x(x),
            Family::ExpInvDisc { beta, p } => beta * (p * boundary_coord_from_x(x)).exp(),
            Family::LogPowerDisc { alpha } => alpha * boundary_coord_from_x(x).ln_1p(),
            Family::ExpPlane { p } => (p * x).exp(),
            Family::PowerExpPlane { sigma, p } => {
                let r_ln1p = if x > 30.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
                sigma * r_ln1p + (p * x).exp()
            }
        }
    }

    /// Analytic right derivative d(phi)/dx.
    fn phi_deriv(&self, x: f64) -> f64 {
        // e^x / (1 - e^x), the derivative of the boundary coordinate t(x)
        let dt = |x: f64| {
            let ex = x.exp();
            ex / (-x.exp_m1())
        };
        match *self {
            Family::PowerDisc { alpha } => alpha * dt(x),
            Family::ExpInvDisc { beta, p } => {
                beta * p * (p * boundary_coord_from_x(x)).exp() * dt(x)
            }
            Family::LogPowerDisc { alpha } => alpha * dt(x) / (1.0 + boundary_coord_from_x(x)),
            Family::ExpPlane { p } => p * (p * x).exp(),
            Family::PowerExpPlane { sigma, p } => {
                let ex = x.exp();
                sigma * ex / (1.0 + ex) + p * (p * x).exp()
            }
        }
    }

    fn label(&self) -> String {
        match *self {
            Family::PowerDisc { alpha } => format!("power_disc({alpha})"),
            Family::ExpInvDisc { beta, p } => format!("exp_inv_disc({beta},{p})"),
            Family::LogPowerDisc { alpha } => format!("log_power_disc({alpha})"),
            Family::ExpPlane { p } => format!("exp_plane({p})"),
            Family::PowerExpPlane { sigma, p } => format!("power_exp_plane({sigma},{p})"),
        }
    }
}

/// Piecewise-linear log-profile data: `phi` interpolates linearly in `x`
/// between breakpoints, is constant left of the first breakpoint and
/// continues with the final slope right of the last one.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLog {
    pub xs: Vec<f64>,
    pub phis: Vec<f64>,
}

impl PiecewiseLog {
    pub fn new(xs: Vec<f64>, phis: Vec<f64>) -> Result<Self, WeightError> {
        if xs.len() != phis.len() {
            return Err(WeightError::InvalidProfile(format!(
                "xs has {} entries but phis has {}",
                xs.len(),
                phis.len()
            )));
        }
        if xs.len() < 2 {
            return Err(WeightError::InvalidProfile(
                "need at least two breakpoints".into(),
            ));
        }
        if xs.iter().zip(xs.iter().skip(1)).any(|(a, b)| b.partial_cmp(a) != Some(std::cmp::Ordering::Greater)) {
            return Err(WeightError::InvalidProfile(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if phis.iter().any(|p| !p.is_finite()) {
            return Err(WeightError::InvalidProfile(
                "profile values must be finite".into(),
            ));
        }
        if phis.iter().zip(phis.iter().skip(1)).any(|(a, b)| a > b) {
            return Err(WeightError::InvalidProfile(
                "profile values must be nondecreasing (weights are increasing)".into(),
            ));
        }
        Ok(PiecewiseLog { xs, phis })
    }

    /// Index of the segment containing x (clamped to the outer segments).
    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|b| b.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.xs.len() - 2),
        }
    }

    fn slope(&self, seg: usize) -> f64 {
        (self.phis[seg + 1] - self.phis[seg]) / (self.xs[seg + 1] - self.xs[seg])
    }

    fn phi(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            // constant extension keeps v positive and nondecreasing
            return self.phis[0];
        }
        let seg = self.segment(x);
        self.phis[seg] + self.slope(seg) * (x - self.xs[seg])
    }

    /// Right derivative: the slope of the segment at or right of x.
    fn phi_deriv(&self, x: f64) -> f64 {
        if x < self.xs[0] {
            return 0.0;
        }
        let n = self.xs.len();
        if x >= self.xs[n - 1] {
            return self.slope(n - 2);
        }
        // at an interior breakpoint take the right segment
        match self.xs.binary_search_by(|b| b.partial_cmp(&x).unwrap()) {
            Ok(i) => {
                if i == n - 1 {
                    self.slope(n - 2)
                } else {
                    self.slope(i)
                }
            }
            Err(i) => self.slope(i - 1),
        }
    }
}

/// Plane profile that follows `e^x` except for a unit-slope notch of width
/// `eps[n-1]` just after each integer `x = n`; after the n-th notch the
/// exponential branch is shifted down by the accumulated defect
/// `delta_prefix[n]`. This is the construction behind the plane
/// integration-operator counterexample.
#[derive(Debug, Clone, PartialEq)]
pub struct NotchedExpPlane {
    /// Notch widths eps[k-1] for integers k = 1..=n_max; positive, decreasing.
    pub eps: Vec<f64>,
    /// delta_prefix[n] = sum of the first n notch defects; delta_prefix[0] = 0.
    pub delta_prefix: Vec<f64>,
}

impl NotchedExpPlane {
    fn n_max(&self) -> usize {
        self.eps.len()
    }

    /// phi value at integer breakpoint n (left end of the n-th notch).
    fn phi_at_integer(&self, n: usize) -> f64 {
        (n as f64).exp() - self.delta_prefix[n - 1]
    }

    fn phi(&self, x: f64) -> f64 {
        if x <= 1.0 {
            return x.exp();
        }
        let n = (x.floor() as usize).min(self.n_max());
        if n >= 1 && x > n as f64 && x <= n as f64 + self.eps[n - 1] {
            // unit-slope notch
            return x - n as f64 + self.phi_at_integer(n);
        }
        // exponential branch; past the last constructed notch the final
        // branch simply continues
        let completed = if x > n as f64 { n } else { n.saturating_sub(1) };
        x.exp() - self.delta_prefix[completed]
    }

    fn phi_deriv(&self, x: f64) -> f64 {
        if x < 1.0 {
            return x.exp();
        }
        let n = (x.floor() as usize).min(self.n_max());
        if n >= 1 && x >= n as f64 && x < n as f64 + self.eps[n - 1] {
            // right derivative, so the notch slope applies at x = n itself
            return 1.0;
        }
        x.exp()
    }

    /// Breakpoints of the construction: each integer and each notch end.
    fn breakpoints(&self) -> Vec<f64> {
        let mut pts = Vec::with_capacity(2 * self.n_max() + 1);
        pts.push(1.0);
        for n in 1..=self.n_max() {
            let xn = n as f64;
            pts.push(xn);
            let end = xn + self.eps[n - 1];
            if end > xn {
                pts.push(end);
            }
        }
        pts
    }
}

/// How the weight is defined.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSource {
    /// Closed-form built-in family.
    ClosedForm(Family),
    /// Exact piecewise-linear log-profile (a construction).
    Piecewise(PiecewiseLog),
    /// Sampled log-data interpolated piecewise-linearly (e.g. from a file).
    Tabulated(PiecewiseLog),
    /// `e^x` with unit-slope notches; see [`NotchedExpPlane`].
    NotchedExp(NotchedExpPlane),
    /// `v(r)/(1-r)` for a disc weight `v`.
    OverOneMinusR(Box<RadialWeight>),
    /// The Cauchy-estimate companion weight: on the disc
    /// `2/(1-r) * v((1+r)/2)`, on the plane `v(r+1)`.
    CauchyAmplified(Box<RadialWeight>),
}

/// A radial weight, identified by its log-profile `phi(x) = log v(e^x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialWeight {
    pub domain: Domain,
    pub source: WeightSource,
    pub label: String,
    /// Set only by [`RadialWeight::dyadic_linear_disc`]: log v is linear in
    /// log r between the radii `exp(-2^-n)`, the structure behind the
    /// rapidly-growing classification.
    pub dyadic_linear: bool,
}

impl RadialWeight {
    /// Build one of the closed-form families.
    pub fn make_builtin(family: &str, params: &[f64], domain: Domain) -> Result<Self, WeightError> {
        let bad = |reason: &str| WeightError::InvalidParams {
            family: family.to_string(),
            reason: reason.to_string(),
        };
        if params.iter().any(|p| !p.is_finite()) {
            return Err(bad("parameters must be finite"));
        }
        let arity_err = |n: usize| bad(&format!("expected {n} parameter(s), got {}", params.len()));
        let fam = match family {
            "power_disc" => {
                if params.len() != 1 {
                    return Err(arity_err(1));
                }
                if params[0] <= 0.0 {
                    return Err(bad("alpha must be positive (the weight must increase)"));
                }
                Family::PowerDisc { alpha: params[0] }
            }
            "exp_inv_disc" => {
                if params.len() != 2 {
                    return Err(arity_err(2));
                }
                if params[0] <= 0.0 || params[1] <= 0.0 {
                    return Err(bad("beta and p must be positive"));
                }
                Family::ExpInvDisc { beta: params[0], p: params[1] }
            }
            "log_power_disc" => {
                if params.len() != 1 {
                    return Err(arity_err(1));
                }
                if params[0] <= 0.0 {
                    return Err(bad("alpha must be positive (otherwise v stays bounded)"));
                }
                Family::LogPowerDisc { alpha: params[0] }
            }
            "exp_plane" => {
                if params.len() != 1 {
                    return Err(arity_err(1));
                }
                if params[0] <= 0.0 {
                    return Err(bad("p must be positive"));
                }
                Family::ExpPlane { p: params[0] }
            }
            "power_exp_plane" => {
                if params.len() != 2 {
                    return Err(arity_err(2));
                }
                if params[0] < 0.0 {
                    return Err(bad("sigma must be nonnegative"));
                }
                if params[1] <= 0.0 {
                    return Err(bad("p must be positive"));
                }
                Family::PowerExpPlane { sigma: params[0], p: params[1] }
            }
            other => return Err(WeightError::UnknownFamily(other.to_string())),
        };
        if fam.domain() != domain {
            return Err(WeightError::InvalidForDomain {
                domain,
                reason: format!("family `{family}` is defined on the {}", fam.domain()),
            });
        }
        Ok(RadialWeight {
            domain,
            label: fam.label(),
            source: WeightSource::ClosedForm(fam),
            dyadic_linear: false,
        })
    }

    /// Exact piecewise-linear log-profile with given breakpoint values.
    pub fn piecewise(
        xs: Vec<f64>,
        phis: Vec<f64>,
        domain: Domain,
        label: impl Into<String>,
    ) -> Result<Self, WeightError> {
        let pw = PiecewiseLog::new(xs, phis)?;
        if domain == Domain::Disc && pw.xs.iter().any(|&x| x >= 0.0) {
            return Err(WeightError::InvalidProfile(
                "disc breakpoints must satisfy x = log r < 0".into(),
            ));
        }
        Ok(RadialWeight {
            domain,
            source: WeightSource::Piecewise(pw),
            label: label.into(),
            dyadic_linear: false,
        })
    }

    /// Sampled log-data (same interpolation as [`RadialWeight::piecewise`]).
    pub fn tabulated(
        xs: Vec<f64>,
        phis: Vec<f64>,
        domain: Domain,
        label: impl Into<String>,
    ) -> Result<Self, WeightError> {
        let mut w = Self::piecewise(xs, phis, domain, label)?;
        if let WeightSource::Piecewise(pw) = w.source {
            w.source = WeightSource::Tabulated(pw);
        }
        Ok(w)
    }

    /// Disc weight whose log is linear in log r between the radii
    /// `exp(-2^-n)`, n = 0..values.len()-1. `values[n] = log v(exp(-2^-n))`
    /// must be nondecreasing. This is the generator whose outputs are
    /// eligible for the rapidly-growing classification.
    pub fn dyadic_linear_disc(values: Vec<f64>) -> Result<Self, WeightError> {
        let xs: Vec<f64> = (0..values.len()).map(|n| -2f64.powi(-(n as i32))).collect();
        let mut w = Self::piecewise(xs, values, Domain::Disc, "dyadic_linear")?;
        w.dyadic_linear = true;
        Ok(w)
    }

    /// The `e^x`-with-notches plane construction.
    pub fn notched_exp_plane(
        eps: Vec<f64>,
        delta_prefix: Vec<f64>,
        label: impl Into<String>,
    ) -> Result<Self, WeightError> {
        if eps.is_empty() || delta_prefix.len() != eps.len() + 1 {
            return Err(WeightError::InvalidProfile(
                "need delta_prefix.len() == eps.len() + 1".into(),
            ));
        }
        if eps.iter().any(|&e| !e.is_finite() || e <= 0.0 || e >= 1.0) {
            return Err(WeightError::InvalidProfile(
                "notch widths must lie in (0, 1)".into(),
            ));
        }
        Ok(RadialWeight {
            domain: Domain::Plane,
            source: WeightSource::NotchedExp(NotchedExpPlane { eps, delta_prefix }),
            label: label.into(),
            dyadic_linear: false,
        })
    }

    /// `v(r)/(1-r)`, the canonical differentiation target on the disc.
    pub fn over_one_minus_r(v: &RadialWeight) -> Result<Self, WeightError> {
        if v.domain != Domain::Disc {
            return Err(WeightError::InvalidForDomain {
                domain: v.domain,
                reason: "v/(1-r) only makes sense on the disc".into(),
            });
        }
        Ok(RadialWeight {
            domain: Domain::Disc,
            label: format!("{}/(1-r)", v.label),
            source: WeightSource::OverOneMinusR(Box::new(v.clone())),
            dyadic_linear: false,
        })
    }

    /// The Cauchy-estimate companion `v_rho` for the standard distance
    /// functions: rho = (1-r)/2 on the disc, rho = 1 on the plane. Since v is
    /// radial and increasing the maximum over the disc of radius rho is
    /// attained at r + rho.
    pub fn cauchy_amplified(v: &RadialWeight) -> Self {
        RadialWeight {
            domain: v.domain,
            label: format!("cauchy[{}]", v.label),
            source: WeightSource::CauchyAmplified(Box::new(v.clone())),
            dyadic_linear: false,
        }
    }

    /// phi(x) = log v(e^x); accepts any x < log(boundary).
    pub fn phi(&self, x: f64) -> f64 {
        match &self.source {
            WeightSource::ClosedForm(f) => f.phi(x),
            WeightSource::Piecewise(pw) | WeightSource::Tabulated(pw) => pw.phi(x),
            WeightSource::NotchedExp(ne) => ne.phi(x),
            WeightSource::OverOneMinusR(v) => v.phi(x) + boundary_coord_from_x(x),
            WeightSource::CauchyAmplified(v) => match self.domain {
                // 2/(1-r) * v((1+r)/2); log((1+r)/2) = log(1 - (1-r)/2)
                Domain::Disc => {
                    let half_gap = 0.5 * (-x.exp_m1()); // (1-r)/2
                    LN_2 + boundary_coord_from_x(x) + v.phi((-half_gap).ln_1p())
                }
                // v(r+1); log(r+1) = ln_1p(e^x)
                Domain::Plane => v.phi(x.exp().ln_1p()),
            },
        }
    }

    /// Analytic right derivative of phi in x, when the source supports one.
    pub fn phi_deriv(&self, x: f64) -> Option<f64> {
        match &self.source {
            WeightSource::ClosedForm(f) => Some(f.phi_deriv(x)),
            WeightSource::Piecewise(pw) => Some(pw.phi_deriv(x)),
            WeightSource::Tabulated(_) => None,
            WeightSource::NotchedExp(ne) => Some(ne.phi_deriv(x)),
            WeightSource::OverOneMinusR(v) => {
                let ex = x.exp();
                Some(v.phi_deriv(x)? + ex / (-x.exp_m1()))
            }
            WeightSource::CauchyAmplified(_) => None,
        }
    }

    /// log v(r).
    pub fn eval_log(&self, r: f64) -> Result<f64, WeightError> {
        let boundary = self.domain.boundary();
        if !(0.0..boundary).contains(&r) {
            return Err(WeightError::OutOfDomain { r, boundary });
        }
        Ok(self.phi(r.ln()))
    }

    /// Source breakpoints inside `[x_lo, x_hi]`, inserted into sampled
    /// profiles so that hulls and condition traces see the exact kinks.
    pub fn feature_points(&self, x_lo: f64, x_hi: f64) -> Vec<f64> {
        let raw: Vec<f64> = match &self.source {
            WeightSource::ClosedForm(_) => Vec::new(),
            WeightSource::Piecewise(pw) | WeightSource::Tabulated(pw) => pw.xs.clone(),
            WeightSource::NotchedExp(ne) => ne.breakpoints(),
            WeightSource::OverOneMinusR(v) => v.feature_points(x_lo, x_hi),
            WeightSource::CauchyAmplified(_) => Vec::new(),
        };
        raw.into_iter().filter(|&x| x >= x_lo && x <= x_hi).collect()
    }

    /// True when phi is smooth enough for the closed-form refinement path
    /// (continuous increasing derivative, no kinks).
    pub fn is_smooth_closed_form(&self) -> bool {
        match &self.source {
            WeightSource::ClosedForm(_) => true,
            WeightSource::OverOneMinusR(v) => v.is_smooth_closed_form(),
            _ => false,
        }
    }
}

/// Validation thresholds for the type invariants checked on a grid.
#[derive(Debug, Clone)]
pub struct ValidationConfig {
    /// Disc: log v at the last grid point must exceed log v at the midpoint
    /// by this margin (v must blow up at the boundary).
    pub disc_blowup_margin: f64,
    /// Plane: phi(x)/x at the end of the grid must exceed the midpoint value
    /// by this factor (log r = o(log v)).
    pub plane_growth_factor: f64,
    /// Tolerance for the monotonicity check on the grid.
    pub monotone_tol: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            disc_blowup_margin: 0.01,
            plane_growth_factor: 1.2,
            monotone_tol: 1e-9,
        }
    }
}

/// Dyadic evaluation grid.
///
/// Disc: uniform in t = log(1/(1-r)) on (0, J*ln2], so the dyadic radii
/// 1 - 2^-n are (up to rounding of t) grid points and each dyadic level
/// n holds `points_per_level` samples. Plane: uniform in x = log r from
/// -1 up to J*ln2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub depth: u32,
    pub points_per_level: u32,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { depth: 40, points_per_level: 8 }
    }
}

impl GridSpec {
    pub fn new(depth: u32, points_per_level: u32) -> Result<Self, WeightError> {
        // depth > 48 would push the dyadic radii 1 - 2^-n past f64 resolution
        if !(4..=48).contains(&depth) {
            return Err(WeightError::InvalidGrid(format!(
                "depth must lie in [4, 48], got {depth}"
            )));
        }
        if !(2..=65536).contains(&points_per_level) {
            return Err(WeightError::InvalidGrid(format!(
                "points_per_level must lie in [2, 65536], got {points_per_level}"
            )));
        }
        Ok(GridSpec { depth, points_per_level })
    }

    /// A copy with `factor` times more points per level.
    pub fn refined(&self, factor: u32) -> GridSpec {
        GridSpec {
            depth: self.depth,
            points_per_level: (self.points_per_level * factor).min(65536),
        }
    }

    /// Grid in x = log r for the given domain.
    pub fn xs(&self, domain: Domain) -> Vec<f64> {
        let p = self.points_per_level as f64;
        let step = LN_2 / p;
        match domain {
            Domain::Disc => {
                let n = self.depth * self.points_per_level;
                (1..=n)
                    .map(|k| {
                        let t = k as f64 * step;
                        // x = log(1 - e^-t), stable however close to the boundary
                        (-(-t).exp()).ln_1p()
                    })
                    .collect()
            }
            Domain::Plane => {
                let x_max = self.depth as f64 * LN_2;
                let n = ((x_max + 1.0) / step).ceil() as u64;
                (0..=n).map(|k| -1.0 + k as f64 * step).collect()
            }
        }
    }

    /// Exact dyadic radii 1 - 2^-n for n = 0..=depth.
    pub fn dyadic_radii(&self) -> Vec<f64> {
        (0..=self.depth).map(|n| 1.0 - 2f64.powi(-(n as i32))).collect()
    }
}

/// Sampled log-profile: the universal internal representation.
#[derive(Debug, Clone, PartialEq)]
pub struct LogProfile {
    /// Strictly increasing; all negative on the disc.
    pub xs: Vec<f64>,
    /// phi(x) = log v(e^x); nondecreasing.
    pub phis: Vec<f64>,
    pub domain: Domain,
}

impl LogProfile {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
}

/// Sample phi on the grid, inserting the source's own breakpoints so that
/// kinks are represented exactly. A breakpoint landing almost on top of a
/// grid point replaces it: a sliver panel between the two would only carry
/// a rounding-noise chord.
pub fn sample_log_profile(w: &RadialWeight, grid: &GridSpec) -> Result<LogProfile, WeightError> {
    let base = grid.xs(w.domain);
    let (lo, hi) = (base[0], base[base.len() - 1]);
    let mut features = w.feature_points(lo, hi);
    features.sort_by(|a, b| a.partial_cmp(b).unwrap());
    features.dedup();
    let xs = if features.is_empty() {
        base
    } else {
        // drop grid points that nearly coincide with a feature (features
        // may sit much closer together than the grid and must all survive)
        let near_feature = |x: f64, local: f64| {
            let pos = features.partition_point(|&f| f < x);
            let d_right = features.get(pos).map_or(f64::INFINITY, |f| f - x);
            let d_left = if pos > 0 { x - features[pos - 1] } else { f64::INFINITY };
            d_right.min(d_left) < 0.01 * local
        };
        let mut merged: Vec<f64> = Vec::with_capacity(base.len() + features.len());
        for (i, &x) in base.iter().enumerate() {
            let gap_left = if i > 0 { x - base[i - 1] } else { f64::INFINITY };
            let gap_right = if i + 1 < base.len() { base[i + 1] - x } else { f64::INFINITY };
            if !near_feature(x, gap_left.min(gap_right)) {
                merged.push(x);
            }
        }
        merged.extend_from_slice(&features);
        merged.sort_by(|a, b| a.partial_cmp(b).unwrap());
        merged.dedup();
        merged
    };
    let mut phis = Vec::with_capacity(xs.len());
    for &x in &xs {
        let p = w.phi(x);
        if !p.is_finite() {
            return Err(WeightError::Overflow(x.exp()));
        }
        phis.push(p);
    }
    Ok(LogProfile { xs, phis, domain: w.domain })
}

/// Check the radial-weight invariants on the grid: v positive and
/// nondecreasing, blowing up at the disc boundary, beating every power of r
/// on the plane.
pub fn validate_weight(
    w: &RadialWeight,
    grid: &GridSpec,
    cfg: &ValidationConfig,
) -> Result<(), WeightError> {
    let profile = sample_log_profile(w, grid)?;
    let n = profile.len();
    for i in 0..n - 1 {
        if profile.phis[i + 1] < profile.phis[i] - cfg.monotone_tol {
            return Err(WeightError::InvalidForDomain {
                domain: w.domain,
                reason: format!(
                    "v is decreasing near r = {:.6} (log v drops by {:.3e})",
                    profile.xs[i].exp(),
                    profile.phis[i] - profile.phis[i + 1]
                ),
            });
        }
    }
    match w.domain {
        Domain::Disc => {
            let mid = profile.phis[n / 2];
            let last = profile.phis[n - 1];
            if last < mid + cfg.disc_blowup_margin {
                return Err(WeightError::InvalidForDomain {
                    domain: w.domain,
                    reason: format!(
                        "v does not blow up at the boundary (log v gains only {:.3e} over the outer half of the grid)",
                        last - mid
                    ),
                });
            }
        }
        Domain::Plane => {
            // log v(r)/log r must keep growing along the tail
            let ratio = |i: usize| profile.phis[i] / profile.xs[i];
            let i_mid = profile.xs.iter().position(|&x| x >= 0.5 * profile.xs[n - 1]);
            let i_mid = match i_mid {
                Some(i) if profile.xs[i] > 0.0 => i,
                _ => {
                    return Err(WeightError::InvalidForDomain {
                        domain: w.domain,
                        reason: "grid does not reach far enough to test growth".into(),
                    })
                }
            };
            if !(ratio(n - 1) > 0.0 && ratio(n - 1) >= cfg.plane_growth_factor * ratio(i_mid)) {
                return Err(WeightError::InvalidForDomain {
                    domain: w.domain,
                    reason: format!(
                        "log v(r)/log r is not growing along the tail ({:.4} at the midpoint vs {:.4} at the end); log r = o(log v) fails",
                        ratio(i_mid),
                        ratio(n - 1)
                    ),
                });
            }
        }
    }
    Ok(())
}

#[derive(Deserialize)]
struct PiecewiseFile {
    xs: Vec<f64>,
    phis: Vec<f64>,
    domain: Domain,
}

/// Parse the weight-spec grammar:
/// `family(p1,p2,...)@disc|plane` or `piecewise:<path>.json`.
pub fn parse_weight_spec(spec: &str) -> Result<RadialWeight, WeightError> {
    let spec = spec.trim();
    let err = |reason: &str| WeightError::Parse {
        spec: spec.to_string(),
        reason: reason.to_string(),
    };
    if let Some(path) = spec.strip_prefix("piecewise:") {
        let text = std::fs::read_to_string(path).map_err(|e| WeightError::Io {
            path: path.to_string(),
            reason: e.to_string(),
        })?;
        let file: PiecewiseFile = serde_json::from_str(&text).map_err(|e| WeightError::Io {
            path: path.to_string(),
            reason: format!("invalid JSON: {e}"),
        })?;
        let mut w = RadialWeight::tabulated(file.xs, file.phis, file.domain, spec)?;
        w.label = format!("piecewise[{path}]");
        return Ok(w);
    }
    let (head, domain_str) = spec
        .rsplit_once('@')
        .ok_or_else(|| err("expected `family(params)@disc|plane`"))?;
    let domain = match domain_str {
        "disc" => Domain::Disc,
        "plane" => Domain::Plane,
        other => return Err(err(&format!("unknown domain `{other}`"))),
    };
    let (name, rest) = head
        .split_once('(')
        .ok_or_else(|| err("expected `family(params)`"))?;
    let params_str = rest
        .strip_suffix(')')
        .ok_or_else(|| err("missing closing parenthesis"))?;
    let params: Vec<f64> = if params_str.trim().is_empty() {
        Vec::new()
    } else {
        params_str
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| err(&format!("cannot parse parameter `{}`", p.trim())))
            })
            .collect::<Result<_, _>>()?
    };
    RadialWeight::make_builtin(name.trim(), &params, domain)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn builtin(family: &str, params: &[f64], domain: Domain) -> RadialWeight {
        RadialWeight::make_builtin(family, params, domain).unwrap()
    }

    #[test]
    fn power_disc_eval_matches_closed_form() {
        let v = builtin("power_disc", &[1.0], Domain::Disc);
        // v(0.5) = 1/(1-0.5) = 2
        assert!((v.eval_log(0.5).unwrap() - 2f64.ln()).abs() < 1e-14);
        assert_eq!(v.eval_log(0.0).unwrap(), 0.0);
        // alpha=3 at r = 1 - 2^-10: log v = 3 * 10 * ln 2
        let v3 = builtin("power_disc", &[3.0], Domain::Disc);
        let r = 1.0 - 2f64.powi(-10);
        assert!((v3.eval_log(r).unwrap() - 30.0 * LN_2).abs() < 1e-10);
    }

    #[test]
    fn exp_plane_eval_matches_closed_form() {
        let v = builtin("exp_plane", &[1.0], Domain::Plane);
        assert!((v.eval_log(3.0).unwrap() - 3.0).abs() < 1e-12);
        assert!((v.eval_log(10.0).unwrap() - 10.0).abs() < 1e-12);
        // value, not log: e^3
        assert!((v.eval_log(3.0).unwrap().exp() - 20.085_536_923_187_668).abs() < 1e-9);
    }

    #[test]
    fn invalid_params_are_rejected() {
        assert!(matches!(
            RadialWeight::make_builtin("power_disc", &[-1.0], Domain::Disc),
            Err(WeightError::InvalidParams { .. })
        ));
        assert!(matches!(
            RadialWeight::make_builtin("power_disc", &[1.0], Domain::Plane),
            Err(WeightError::InvalidForDomain { .. })
        ));
        assert!(matches!(
            RadialWeight::make_builtin("nope", &[1.0], Domain::Disc),
            Err(WeightError::UnknownFamily(_))
        ));
        assert!(matches!(
            RadialWeight::make_builtin("exp_inv_disc", &[1.0], Domain::Disc),
            Err(WeightError::InvalidParams { .. })
        ));
    }

    #[test]
    fn out_of_domain_eval_fails() {
        let v = builtin("power_disc", &[1.0], Domain::Disc);
        assert!(matches!(v.eval_log(1.0), Err(WeightError::OutOfDomain { .. })));
        assert!(matches!(v.eval_log(-0.1), Err(WeightError::OutOfDomain { .. })));
        let w = builtin("exp_plane", &[1.0], Domain::Plane);
        assert!(w.eval_log(1e9).is_ok());
    }

    #[test]
    fn profiles_are_monotone_for_all_builtins() {
        let grid = GridSpec::default();
        let weights = [
            builtin("power_disc", &[0.5], Domain::Disc),
            builtin("power_disc", &[5.0], Domain::Disc),
            builtin("exp_inv_disc", &[1.0, 1.0], Domain::Disc),
            builtin("log_power_disc", &[2.0], Domain::Disc),
            builtin("exp_plane", &[0.5], Domain::Plane),
            builtin("exp_plane", &[1.0], Domain::Plane),
            builtin("exp_plane", &[2.0], Domain::Plane),
            builtin("power_exp_plane", &[2.0, 1.0], Domain::Plane),
        ];
        for w in &weights {
            let p = sample_log_profile(w, &grid).unwrap();
            assert!(
                p.phis.windows(2).all(|ab| ab[1] >= ab[0] - 1e-12),
                "{} profile not monotone",
                w.label
            );
            assert!(p.xs.windows(2).all(|ab| ab[1] > ab[0]));
            if w.domain == Domain::Disc {
                assert!(p.xs.iter().all(|&x| x < 0.0));
            }
            validate_weight(w, &grid, &ValidationConfig::default()).unwrap();
        }
    }

    #[test]
    fn eval_log_is_monotone_in_r() {
        // spot-check on 10^3 random-ish pairs r1 < r2 via a quasi-random sweep
        let weights = [
            builtin("power_disc", &[2.0], Domain::Disc),
            builtin("exp_inv_disc", &[1.0, 2.0], Domain::Disc),
            builtin("log_power_disc", &[1.0], Domain::Disc),
        ];
        for w in &weights {
            let mut u = 0.5f64;
            for _ in 0..1000 {
                u = (u * 997.0 + 0.123_456_789).fract();
                let r1 = u * 0.999;
                let r2 = r1 + (1.0 - r1) * 0.5 * u.max(1e-3);
                let (a, b) = (w.eval_log(r1).unwrap(), w.eval_log(r2).unwrap());
                assert!(b >= a - 1e-12, "{}: v({r1}) > v({r2})", w.label);
            }
        }
    }

    #[test]
    fn resampling_at_double_resolution_agrees_on_shared_points() {
        let grid = GridSpec::default();
        let fine = grid.refined(2);
        let w = builtin("exp_plane", &[1.0], Domain::Plane);
        let coarse_p = sample_log_profile(&w, &grid).unwrap();
        let fine_p = sample_log_profile(&w, &fine).unwrap();
        // closed forms: shared grid values agree exactly
        for (x, phi) in coarse_p.xs.iter().zip(&coarse_p.phis) {
            if let Some(j) = fine_p.xs.iter().position(|fx| fx == x) {
                assert_eq!(fine_p.phis[j], *phi);
            }
        }
    }

    #[test]
    fn piecewise_interpolates_linearly_and_extends() {
        let w = RadialWeight::piecewise(
            vec![-2.0, -1.0, -0.5],
            vec![0.0, 1.0, 3.0],
            Domain::Disc,
            "pw",
        )
        .unwrap();
        assert_eq!(w.phi(-3.0), 0.0); // constant left extension
        assert!((w.phi(-1.5) - 0.5).abs() < 1e-15);
        assert!((w.phi(-0.75) - 2.0).abs() < 1e-14);
        // right extension continues the last slope (4)
        assert!((w.phi(-0.25) - 4.0).abs() < 1e-14);
        assert_eq!(w.phi_deriv(-1.0), Some(4.0)); // right derivative at a kink
        assert_eq!(w.phi_deriv(-1.2), Some(1.0));
        assert_eq!(w.phi_deriv(-2.5), Some(0.0));
    }

    #[test]
    fn piecewise_rejects_bad_data() {
        assert!(RadialWeight::piecewise(vec![-1.0], vec![0.0], Domain::Disc, "x").is_err());
        assert!(
            RadialWeight::piecewise(vec![-1.0, -1.0], vec![0.0, 1.0], Domain::Disc, "x").is_err()
        );
        assert!(
            RadialWeight::piecewise(vec![-2.0, -1.0], vec![1.0, 0.0], Domain::Disc, "x").is_err()
        );
        assert!(
            RadialWeight::piecewise(vec![-2.0, 0.5], vec![0.0, 1.0], Domain::Disc, "x").is_err()
        );
    }

    #[test]
    fn over_one_minus_r_shifts_phi_by_boundary_coord() {
        let v = builtin("power_disc", &[1.0], Domain::Disc);
        let w = RadialWeight::over_one_minus_r(&v).unwrap();
        // (1-r)^-2 at r=0.5: log = 2 ln 2
        assert!((w.eval_log(0.5).unwrap() - 2.0 * LN_2).abs() < 1e-13);
    }

    #[test]
    fn cauchy_amplified_closed_forms() {
        // disc, power: 2/(1-r) * ((1-r)/2)^-alpha = 2^{alpha+1} (1-r)^{-alpha-1}
        let v = builtin("power_disc", &[1.5], Domain::Disc);
        let a = RadialWeight::cauchy_amplified(&v);
        for &r in &[0.0f64, 0.3, 0.9, 0.999] {
            let expected = 2.5 * LN_2 - 2.5 * (1.0 - r).ln();
            assert!(
                (a.eval_log(r).unwrap() - expected).abs() < 1e-9,
                "r={r}"
            );
        }
        // plane: v(r+1) = e * v(r) for exp_plane(1)
        let v = builtin("exp_plane", &[1.0], Domain::Plane);
        let a = RadialWeight::cauchy_amplified(&v);
        for &r in &[0.0, 1.0, 7.5] {
            assert!((a.eval_log(r).unwrap() - (r + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn spec_grammar_roundtrip() {
        let w = parse_weight_spec("power_disc(2)@disc").unwrap();
        assert_eq!(w.domain, Domain::Disc);
        assert!((w.eval_log(0.5).unwrap() - 2.0 * LN_2).abs() < 1e-14);
        let w = parse_weight_spec("exp_inv_disc(1, 0.5)@disc").unwrap();
        assert_eq!(w.label, "exp_inv_disc(1,0.5)");
        assert!(parse_weight_spec("power_disc(2)").is_err());
        assert!(parse_weight_spec("power_disc(2)@torus").is_err());
        assert!(parse_weight_spec("power_disc(x)@disc").is_err());
    }

    #[test]
    fn constant_weight_fails_disc_validation() {
        let w = RadialWeight::piecewise(
            vec![-4.0, -1e-6],
            vec![1.0, 1.0],
            Domain::Disc,
            "flat",
        )
        .unwrap();
        let err = validate_weight(&w, &GridSpec::default(), &ValidationConfig::default());
        assert!(matches!(err, Err(WeightError::InvalidForDomain { .. })));
    }

    #[test]
    fn dyadic_radii_are_exact_and_on_profile_alignment() {
        let grid = GridSpec::default();
        let radii = grid.dyadic_radii();
        assert_eq!(radii[0], 0.0);
        assert_eq!(radii[1], 0.5);
        assert_eq!(radii[10], 1.0 - 2f64.powi(-10));
        // ratio evaluated at exact dyadic radii: power_disc(alpha) gives 2^alpha
        let v = builtin("power_disc", &[2.0], Domain::Disc);
        for n in 1..30 {
            let hi = v.eval_log(radii[n + 1]).unwrap();
            let lo = v.eval_log(radii[n]).unwrap();
            assert!(((hi - lo).exp() - 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn notched_plane_weight_matches_construction() {
        // two notches, widths 0.1 and 0.05, unit defect bookkeeping
        let eps = vec![0.1, 0.05];
        let d1 = (1.1f64).exp() - (1f64.exp() + 0.1);
        let d2 = d1 + ((2.05f64).exp() - (2f64.exp() + 0.05));
        let w = RadialWeight::notched_exp_plane(eps, vec![0.0, d1, d2], "notched").unwrap();
        assert!((w.phi(0.5) - 0.5f64.exp()).abs() < 1e-14);
        // on the first notch: slope 1 from phi(1) = e
        assert!((w.phi(1.05) - (0.05 + 1f64.exp())).abs() < 1e-12);
        // after it: e^x - d1
        assert!((w.phi(1.5) - (1.5f64.exp() - d1)).abs() < 1e-12);
        // right derivative at integer breakpoint is the notch slope
        assert_eq!(w.phi_deriv(1.0), Some(1.0));
        assert_eq!(w.phi_deriv(2.0), Some(1.0));
        assert!((w.phi_deriv(1.5).unwrap() - 1.5f64.exp()).abs() < 1e-12);
        // continuity at notch end
        let left = 2.05f64 - 2.0 + w.phi(2.0);
        assert!((w.phi(2.05) - left).abs() < 1e-12);
    }
}
