//! Finite models of the differentiation and integration operators and the
//! theorem-driven verdict engine.
//!
//! Test functions are polynomials with nonnegative coefficients, so the sup
//! over |z| = r is attained on the positive ray and the weighted norm is a
//! one-dimensional maximization. Monomials give certified operator-norm
//! lower bounds; the growth criteria give the sufficient and necessary
//! sides. The engine combines them in a fixed priority order and records
//! which rule justified the verdict.

use crate::convexity::{convex_minorant, is_log_convex, monomial_log_norms_refined, MonomialNorms};
use crate::criteria::{
    check_disc_d_conditions, check_disc_i_conditions, check_integral_condition,
    check_log_domination, check_necessary_derivative_bound, check_plane_d_conditions,
    check_plane_i_conditions, classify_weight, estimate_from_windows, estimate_tail, tol,
    AsymptoticEstimate, ConditionReport, CriteriaError, ExtremalKind, Trace, Trend, Verdict,
    Window,
};
use crate::numerics::log_sum_exp;
use crate::weight::{
    sample_log_profile, Domain, GridSpec, RadialWeight, WeightError, WeightSource,
};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("domain mismatch: {0} vs {1}")]
    DomainMismatch(Domain, Domain),
    #[error("polynomial has no nonzero coefficients")]
    ZeroFunction,
    #[error("coefficient {0} is negative; only nonnegative Taylor coefficients are supported")]
    NegativeCoefficient(f64),
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Convexity(#[from] crate::convexity::ConvexityError),
}

/// The two classical operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Operator {
    /// D: f -> f', mapping the v-space into the w-space.
    D,
    /// I: f -> integral from 0, mapping the w-space into the v-space.
    I,
}

impl std::fmt::Display for Operator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Operator::D => write!(f, "D"),
            Operator::I => write!(f, "I"),
        }
    }
}

impl std::str::FromStr for Operator {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "D" | "d" => Ok(Operator::D),
            "I" | "i" => Ok(Operator::I),
            other => Err(format!("unknown operator `{other}`; expected D or I")),
        }
    }
}

/// Polynomial with nonnegative Taylor coefficients a_0..a_d, so that
/// max_{|z|=r} |f(z)| = f(r).
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFunction {
    coeffs: Vec<f64>,
}

impl PolyFunction {
    pub fn new(coeffs: Vec<f64>) -> Result<Self, OperatorError> {
        if let Some(&c) = coeffs.iter().find(|c| **c < 0.0 || !c.is_finite()) {
            return Err(OperatorError::NegativeCoefficient(c));
        }
        let mut f = PolyFunction { coeffs };
        f.trim();
        Ok(f)
    }

    /// The monomial z^n.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = 1.0;
        PolyFunction { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0.0) {
            self.coeffs.pop();
        }
    }

    /// f': coefficients (k+1) a_{k+1}; the degree drops by one.
    pub fn derivative(&self) -> PolyFunction {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect();
        let mut f = PolyFunction { coeffs };
        f.trim();
        f
    }

    /// The antiderivative vanishing at 0: coefficients a_k/(k+1) shifted up.
    pub fn integral(&self) -> PolyFunction {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c / (k + 1) as f64),
        );
        let mut f = PolyFunction { coeffs };
        f.trim();
        f
    }

    /// log f(r) by log-sum-exp over k log r + log a_k.
    pub fn eval_log(&self, x: f64) -> f64 {
        let terms: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0.0)
            // the k = 0 term is x-free (0 * log 0 would be NaN at r = 0)
            .map(|(k, &c)| if k == 0 { c.ln() } else { c.ln() + k as f64 * x })
            .collect();
        log_sum_exp(&terms)
    }
}

/// log ||f||_v = sup_r (log f(r) - log v(r)), maximized over the grid and at
/// r = 0 (where the sup of a constant term may sit).
pub fn weighted_log_norm(
    f: &PolyFunction,
    v: &RadialWeight,
    grid: &GridSpec,
) -> Result<f64, OperatorError> {
    if f.is_zero() {
        return Err(OperatorError::ZeroFunction);
    }
    let p = sample_log_profile(v, grid)?;
    let mut best = f.eval_log(f64::NEG_INFINITY) - v.phi(f64::NEG_INFINITY);
    for (&x, &phi) in p.xs.iter().zip(&p.phis) {
        let val = f.eval_log(x) - phi;
        if val > best {
            best = val;
        }
    }
    Ok(best)
}

/// The Cauchy-estimate companion weight for the standard distance function:
/// on the disc `(2/(1-r)) v((1+r)/2)`, on the plane `v(r+1)`.
pub fn v_rho_weight(v: &RadialWeight) -> RadialWeight {
    RadialWeight::cauchy_amplified(v)
}

/// Sufficient bound for D from the v-space into the w-space: is
/// v_rho <= C w on the tail? Holds means D is bounded with ||D|| <= C.
pub fn sufficient_boundedness_check(
    v: &RadialWeight,
    w: &RadialWeight,
    grid: &GridSpec,
) -> Result<ConditionReport, OperatorError> {
    if v.domain != w.domain {
        return Err(OperatorError::DomainMismatch(v.domain, w.domain));
    }
    let amplified = v_rho_weight(v);
    let p = sample_log_profile(v, grid)?;
    let gaps: Vec<f64> = p.xs.iter().map(|&x| amplified.phi(x) - w.phi(x)).collect();
    let mut report = ConditionReport {
        id: "cauchy-shift-sufficiency".into(),
        description: "the Cauchy companion weight v_rho is dominated by a multiple of w".into(),
        verdict: Verdict::Inconclusive,
        value: None,
        estimate: None,
        detail: String::new(),
        trace: Some(Trace { xs: p.xs.clone(), values: gaps.clone() }),
    };
    let est = estimate_tail(&p.xs, &gaps, v.domain, ExtremalKind::Limsup)?;
    match est.trend {
        Trend::ConvergesTo(_) | Trend::DecaysToZero => {
            let sup = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            report.verdict = Verdict::Holds;
            report.value = Some(sup.exp());
            report.detail = format!("v_rho <= C w with C = {:.6e}", sup.exp());
        }
        Trend::DivergesToInfinity => {
            report.verdict = Verdict::Fails;
            report.detail = "v_rho/w is unbounded; this sufficient test gives no conclusion".into();
        }
        Trend::Oscillating => report.verdict = Verdict::Inconclusive,
    }
    report.estimate = Some(est);
    Ok(report)
}

/// Ratio trace of monomial images: how the operator moves the normalized
/// monomials from the v-normed space into the w-normed space.
#[derive(Debug, Clone, Serialize)]
pub struct RatioTrace {
    pub operator: Operator,
    /// ratio[n] = log ||op(z^n)||_w - log ||z^n||_v; None where the grid
    /// could not certify the underlying norm (grid-limited n).
    pub ratios: Vec<Option<f64>>,
    /// Trend of exp(ratio) over dyadic n-blocks.
    pub trend: Option<AsymptoticEstimate>,
}

impl RatioTrace {
    /// Certified lower bound for log of the operator norm.
    pub fn log_norm_lower_bound(&self) -> Option<f64> {
        self.ratios
            .iter()
            .flatten()
            .copied()
            .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))))
    }
}

fn lenient_refined_norms(
    v: &RadialWeight,
    grid: &GridSpec,
    n_max: usize,
) -> Result<MonomialNorms, OperatorError> {
    let p = sample_log_profile(v, grid)?;
    let lenient = crate::convexity::monomial_log_norms_lenient(&p, n_max)?;
    if !v.is_smooth_closed_form() {
        return Ok(lenient);
    }
    // the refined path errors on plane boundary hits; fall back to flags
    Ok(monomial_log_norms_refined(v, &p, n_max).unwrap_or(lenient))
}

/// Monomial norm ratios for op from the v-normed space into the w-normed
/// space: for D, ratio_n = log n + A^w_{n-1} - A^v_n (n >= 1); for I,
/// ratio_n = -log(n+1) + A^w_{n+1} - A^v_n. The sup over n is a certified
/// lower bound for the log of the operator norm.
pub fn monomial_norm_ratios(
    op: Operator,
    v: &RadialWeight,
    w: &RadialWeight,
    n_max: usize,
    grid: &GridSpec,
) -> Result<RatioTrace, OperatorError> {
    if v.domain != w.domain {
        return Err(OperatorError::DomainMismatch(v.domain, w.domain));
    }
    let source = lenient_refined_norms(v, grid, n_max + 1)?;
    let target = lenient_refined_norms(w, grid, n_max + 1)?;
    let ok = |norms: &MonomialNorms, n: usize| !norms.grid_limited[n];
    let mut ratios = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let r = match op {
            Operator::D => {
                if n == 0 {
                    None // D z^0 = 0
                } else if ok(&source, n) && ok(&target, n - 1) {
                    Some((n as f64).ln() + target.a[n - 1] - source.a[n])
                } else {
                    None
                }
            }
            Operator::I => {
                if ok(&source, n) && ok(&target, n + 1) {
                    Some(-((n + 1) as f64).ln() + target.a[n + 1] - source.a[n])
                } else {
                    None
                }
            }
        };
        ratios.push(r);
    }
    // trend of exp(ratio) over dyadic blocks of n
    let mut windows: Vec<Window> = Vec::new();
    let mut block = 0u32;
    loop {
        let lo = 1usize << block;
        if lo > n_max {
            break;
        }
        let hi = (1usize << (block + 1)).min(n_max + 1);
        let vals: Vec<f64> = (lo..hi).filter_map(|n| ratios[n]).map(f64::exp).collect();
        if !vals.is_empty() {
            windows.push(Window {
                r_lo: lo as f64,
                r_hi: hi as f64,
                value: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            });
        }
        block += 1;
    }
    let trend = estimate_from_windows(windows, ExtremalKind::Limsup).ok();
    Ok(RatioTrace { operator: op, ratios, trend })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Boundedness {
    Bounded,
    Unbounded,
    Inconclusive,
}

/// The final decision for one operator on one weight pair, with the rule
/// that produced it and the evidence chain behind it.
#[derive(Debug, Clone, Serialize)]
pub struct OperatorVerdict {
    pub operator: Operator,
    pub pair: (String, String),
    pub verdict: Boundedness,
    /// Identifier of the decision rule that fired.
    pub justification_id: String,
    pub justification: String,
    /// exp of the best monomial ratio: a certified operator-norm lower bound.
    pub norm_lower_bound: Option<f64>,
    pub evidence: Vec<ConditionReport>,
}

/// Is w structurally v/(1-r)?
fn is_boundary_amplified(v: &RadialWeight, w: &RadialWeight) -> bool {
    match &w.source {
        WeightSource::OverOneMinusR(base) => base.as_ref() == v,
        _ => false,
    }
}

fn same_weight(v: &RadialWeight, w: &RadialWeight) -> bool {
    v.domain == w.domain && v.source == w.source
}

/// The log-convex stand-in used by the equivalence criteria: v itself when
/// already log-convex, else exp of the lower convex hull of its profile,
/// whose space coincides isometrically with the v-space. The hull gap
/// decides whether verdicts transfer back to v on non-symmetric pairs.
struct MinorantInfo {
    weight: RadialWeight,
    was_convex: bool,
    gap_bounded: bool,
    gap_report: Option<ConditionReport>,
}

fn minorant_info(v: &RadialWeight, grid: &GridSpec) -> Result<MinorantInfo, OperatorError> {
    let p = sample_log_profile(v, grid)?;
    let (convex, _) = is_log_convex(&p, tol::CONVEXITY_TOL)?;
    if convex {
        return Ok(MinorantInfo {
            weight: v.clone(),
            was_convex: true,
            gap_bounded: true,
            gap_report: None,
        });
    }
    let hull = convex_minorant(&p)?;
    let weight = RadialWeight::piecewise(
        hull.breakpoints.clone(),
        hull.values.clone(),
        v.domain,
        format!("minorant[{}]", v.label),
    )?;
    let gaps: Vec<f64> = p
        .xs
        .iter()
        .zip(&p.phis)
        .map(|(&x, &phi)| phi - hull.eval(x).unwrap())
        .collect();
    let est = estimate_tail(&p.xs, &gaps, v.domain, ExtremalKind::Limsup)?;
    let gap_bounded = !matches!(est.trend, Trend::DivergesToInfinity | Trend::Oscillating);
    let sup_gap = gaps.iter().copied().fold(0f64, f64::max);
    let report = ConditionReport {
        id: "minorant-gap".into(),
        description: "log v stays within a bounded band of its convex minorant".into(),
        verdict: if gap_bounded { Verdict::Holds } else { Verdict::Fails },
        value: Some(sup_gap),
        estimate: Some(est),
        detail: format!("sup of log v - hull(log v) on the grid = {sup_gap:.6e}"),
        trace: Some(Trace { xs: p.xs, values: gaps }),
    };
    Ok(MinorantInfo { weight, was_convex: false, gap_bounded, gap_report: Some(report) })
}

struct VerdictBuilder {
    verdict: OperatorVerdict,
}

impl VerdictBuilder {
    fn new(op: Operator, v: &RadialWeight, w: &RadialWeight) -> Self {
        VerdictBuilder {
            verdict: OperatorVerdict {
                operator: op,
                pair: (v.label.clone(), w.label.clone()),
                verdict: Boundedness::Inconclusive,
                justification_id: "no-rule-applied".into(),
                justification: "no implemented criterion was decisive for this pair".into(),
                norm_lower_bound: None,
                evidence: Vec::new(),
            },
        }
    }

    fn decide(&mut self, verdict: Boundedness, id: &str, text: String) {
        self.verdict.verdict = verdict;
        self.verdict.justification_id = id.into();
        self.verdict.justification = text;
    }
}

fn minorant_note(info: &MinorantInfo) -> &'static str {
    if info.was_convex {
        ""
    } else {
        " (conditions evaluated on the norm-equivalent log-convex minorant)"
    }
}

/// Decide boundedness for the pair (v, w), where w plays the companion role:
/// D maps the v-space into the w-space, and I maps the w-space into the
/// v-space (its natural direction on these pairs). Decision order: monomial
/// witnesses, the log-convex equivalence criteria on canonical pairings
/// (through the minorant when v is not log-convex), general sufficiency,
/// then the necessity routes.
pub fn boundedness_verdict(
    op: Operator,
    v: &RadialWeight,
    w: &RadialWeight,
    grid: &GridSpec,
) -> Result<OperatorVerdict, OperatorError> {
    if v.domain != w.domain {
        return Err(OperatorError::DomainMismatch(v.domain, w.domain));
    }
    let mut b = VerdictBuilder::new(op, v, w);
    let n_max = match v.domain {
        Domain::Plane => 512,
        Domain::Disc => 256,
    };

    // monomials are genuine unit-ball test functions: a divergent ratio
    // trace is an unconditional unboundedness witness
    let ratio = match op {
        Operator::D => monomial_norm_ratios(Operator::D, v, w, n_max, grid)?,
        Operator::I => monomial_norm_ratios(Operator::I, w, v, n_max, grid)?,
    };
    b.verdict.norm_lower_bound = ratio.log_norm_lower_bound().map(f64::exp);
    if matches!(
        ratio.trend.as_ref().map(|t| t.trend),
        Some(Trend::DivergesToInfinity)
    ) {
        b.decide(
            Boundedness::Unbounded,
            "monomial-ratio-divergence",
            "the images of the normalized monomials have unbounded norms, which witnesses \
             unboundedness directly"
                .into(),
        );
        return Ok(b.verdict);
    }

    match (op, v.domain) {
        (Operator::D, Domain::Disc) => {
            if is_boundary_amplified(v, w) {
                let info = minorant_info(v, grid)?;
                if let Some(rep) = &info.gap_report {
                    b.verdict.evidence.push(rep.clone());
                }
                let reports = check_disc_d_conditions(&info.weight, grid)?;
                let decisive = [0usize, 3, 5]
                    .iter()
                    .map(|&i| reports[i].clone())
                    .find(|r| r.verdict != Verdict::Inconclusive);
                let note = minorant_note(&info);
                b.verdict.evidence.extend(reports);
                if let Some(rep) = decisive {
                    if rep.verdict == Verdict::Holds {
                        b.decide(
                            Boundedness::Bounded,
                            "disc-d-log-convex-criterion",
                            format!(
                                "for log-convex weights the boundary-slope conditions are \
                                 equivalent to boundedness of D into the v/(1-r)-space; \
                                 {} holds{note}",
                                rep.id
                            ),
                        );
                        return Ok(b.verdict);
                    }
                    if info.gap_bounded {
                        b.decide(
                            Boundedness::Unbounded,
                            "disc-d-log-convex-criterion",
                            format!(
                                "for log-convex weights the boundary-slope conditions are \
                                 equivalent to boundedness of D into the v/(1-r)-space; \
                                 {} fails{note}",
                                rep.id
                            ),
                        );
                        return Ok(b.verdict);
                    }
                }
            }
            decide_d_general(&mut b, v, w, grid)?;
        }
        (Operator::D, Domain::Plane) => {
            if same_weight(v, w) {
                let info = minorant_info(v, grid)?;
                if let Some(rep) = &info.gap_report {
                    b.verdict.evidence.push(rep.clone());
                }
                let reports = check_plane_d_conditions(&info.weight, grid)?;
                // log v = O(r) is the primary characterization, the
                // derivative bound the fallback
                let decisive = [1usize, 0]
                    .iter()
                    .map(|&i| reports[i].clone())
                    .find(|r| r.verdict != Verdict::Inconclusive);
                let note = minorant_note(&info);
                b.verdict.evidence.extend(reports);
                if let Some(rep) = decisive {
                    // symmetric pair: both sides coincide isometrically with
                    // the minorant space, so both directions transfer freely
                    let (verdict, what) = if rep.verdict == Verdict::Holds {
                        (Boundedness::Bounded, "holds")
                    } else {
                        (Boundedness::Unbounded, "fails")
                    };
                    b.decide(
                        verdict,
                        "plane-d-log-convex-criterion",
                        format!(
                            "for log-convex entire weights, D is bounded on the v-space \
                             exactly when log v(r) = O(r); {} {what}{note}",
                            rep.id
                        ),
                    );
                    return Ok(b.verdict);
                }
            }
            decide_d_general(&mut b, v, w, grid)?;
        }
        (Operator::I, Domain::Plane) => {
            if same_weight(v, w) {
                let info = minorant_info(v, grid)?;
                if let Some(rep) = &info.gap_report {
                    b.verdict.evidence.push(rep.clone());
                }
                let reports = check_plane_i_conditions(&info.weight, grid)?;
                let decisive = reports
                    .iter()
                    .find(|r| r.verdict != Verdict::Inconclusive)
                    .cloned();
                let note = minorant_note(&info);
                b.verdict.evidence.extend(reports);
                if let Some(rep) = decisive {
                    let (verdict, what) = if rep.verdict == Verdict::Holds {
                        (Boundedness::Bounded, "holds")
                    } else {
                        (Boundedness::Unbounded, "fails")
                    };
                    b.decide(
                        verdict,
                        "plane-i-log-convex-criterion",
                        format!(
                            "for log-convex entire weights, I is bounded on the v-space \
                             exactly when liminf v'/v > 0; {} {what}{note}",
                            rep.id
                        ),
                    );
                    return Ok(b.verdict);
                }
            }
            decide_i_general(&mut b, v, w, grid)?;
        }
        (Operator::I, Domain::Disc) => {
            if same_weight(v, w) {
                b.decide(
                    Boundedness::Bounded,
                    "universal-disc-integration",
                    "on the disc, integration is bounded on every weighted space with the \
                     same weight on both sides: the integral of v up to r is at most v(r)"
                        .into(),
                );
                return Ok(b.verdict);
            }
            if is_boundary_amplified(v, w) {
                let info = minorant_info(v, grid)?;
                if let Some(rep) = &info.gap_report {
                    b.verdict.evidence.push(rep.clone());
                }
                let reports = check_disc_i_conditions(&info.weight, grid)?;
                let any_holds = reports.iter().any(|r| r.verdict == Verdict::Holds);
                let all_fail = reports.iter().all(|r| r.verdict == Verdict::Fails);
                let note = minorant_note(&info);
                b.verdict.evidence.extend(reports);
                if any_holds && info.gap_bounded {
                    b.decide(
                        Boundedness::Bounded,
                        "disc-i-log-convex-sufficiency",
                        format!(
                            "for log-convex weights the boundary-slope conditions make I \
                             bounded from the v/(1-r)-space into the v-space{note}"
                        ),
                    );
                    return Ok(b.verdict);
                }
                // necessity routes that need no convexity assumption
                let tags = classify_weight(v, grid)?;
                if tags.regular == Some(0.0) {
                    b.decide(
                        Boundedness::Unbounded,
                        "regular-zero-limit-necessity",
                        "v is regular with limit 0 of (1-r)v'/v, which forces \
                         log v = o(log(1/(1-r))) and rules out a bounded I on this pair"
                            .into(),
                    );
                    return Ok(b.verdict);
                }
                let domrep = check_log_domination(v, grid)?;
                let dom_fails = domrep.verdict == Verdict::Fails;
                b.verdict.evidence.push(domrep);
                if dom_fails {
                    b.decide(
                        Boundedness::Unbounded,
                        "log-domination-necessity",
                        "log(1/(1-r)) is not O(log v), which is necessary for I to map \
                         the v/(1-r)-space boundedly into the v-space"
                            .into(),
                    );
                    return Ok(b.verdict);
                }
                if all_fail && info.was_convex {
                    // deliberately inconclusive: whether the slope conditions
                    // are necessary for log-convex weights is an open question
                    b.decide(
                        Boundedness::Inconclusive,
                        "disc-i-open-necessity",
                        "all boundary-slope conditions fail, but their necessity for \
                         bounded integration on log-convex weights is open; no necessity \
                         route applied"
                            .into(),
                    );
                    return Ok(b.verdict);
                }
            }
            decide_i_general(&mut b, v, w, grid)?;
        }
    }
    Ok(b.verdict)
}

/// General differentiation routes: Cauchy-shift sufficiency, then the
/// associated-derivative necessity.
fn decide_d_general(
    b: &mut VerdictBuilder,
    v: &RadialWeight,
    w: &RadialWeight,
    grid: &GridSpec,
) -> Result<(), OperatorError> {
    let suff = sufficient_boundedness_check(v, w, grid)?;
    let suff_holds = suff.verdict == Verdict::Holds;
    let c = suff.value;
    b.verdict.evidence.push(suff);
    if suff_holds {
        b.decide(
            Boundedness::Bounded,
            "cauchy-shift-sufficiency",
            format!(
                "the Cauchy estimate gives ||f'||_w <= C ||f||_v with C = {:.6e}",
                c.unwrap_or(f64::NAN)
            ),
        );
        return Ok(());
    }
    let nec = check_necessary_derivative_bound(v, w, grid)?;
    let nec_fails = nec.verdict == Verdict::Fails;
    b.verdict.evidence.push(nec);
    if nec_fails {
        b.decide(
            Boundedness::Unbounded,
            "associated-derivative-necessity",
            "the derivative of the log-convex minorant outgrows w, ruling out a bounded D \
             (up to the minorant-for-associated-weight surrogate)"
                .into(),
        );
    }
    Ok(())
}

/// General integration routes: class-based two-sided criterion when the
/// source weight is in a covered class, else integral sufficiency.
fn decide_i_general(
    b: &mut VerdictBuilder,
    v: &RadialWeight,
    w: &RadialWeight,
    grid: &GridSpec,
) -> Result<(), OperatorError> {
    let integral = check_integral_condition(w, v, grid)?;
    let int_verdict = integral.verdict;
    let int_value = integral.value;
    b.verdict.evidence.push(integral);

    let tags = classify_weight(w, grid)?;
    let source_class_covered = match w.domain {
        Domain::Plane => tags.ck_weight,
        Domain::Disc => tags.bbt_weight || tags.h_weight,
    };
    if source_class_covered && int_verdict != Verdict::Inconclusive {
        let (verdict, what) = if int_verdict == Verdict::Holds {
            (Boundedness::Bounded, "holds")
        } else {
            (Boundedness::Unbounded, "fails")
        };
        b.decide(
            verdict,
            "source-class-integral-criterion",
            format!(
                "the source weight is in a growth class with comparable unit-ball \
                 minorant functions, so I is bounded exactly when the integral ratio \
                 stays bounded; it {what}"
            ),
        );
        return Ok(());
    }
    if int_verdict == Verdict::Holds {
        b.decide(
            Boundedness::Bounded,
            "integral-ratio-sufficiency",
            format!(
                "(1/v(r)) * integral of w stays bounded (estimate {:.6e}), which bounds \
                 I directly",
                int_value.unwrap_or(f64::NAN)
            ),
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::parse_weight_spec;

    fn grid() -> GridSpec {
        GridSpec::default()
    }

    fn weight(spec: &str) -> RadialWeight {
        parse_weight_spec(spec).unwrap()
    }

    #[test]
    fn derivative_and_integral_coefficients() {
        let f = PolyFunction::new(vec![0.0, 0.0, 1.0]).unwrap(); // z^2
        assert_eq!(f.derivative().coeffs(), &[0.0, 2.0]);
        let c = PolyFunction::new(vec![5.0]).unwrap();
        assert!(c.derivative().is_zero());
        let e = PolyFunction::new(vec![1.0, 1.0, 0.5, 1.0 / 6.0]).unwrap();
        assert_eq!(e.derivative().coeffs(), &[1.0, 1.0, 0.5]);
        let one = PolyFunction::new(vec![1.0]).unwrap();
        assert_eq!(one.integral().coeffs(), &[0.0, 1.0]);
        let lin = PolyFunction::new(vec![0.0, 2.0]).unwrap();
        assert_eq!(lin.integral().coeffs(), &[0.0, 0.0, 1.0]);
        assert!(PolyFunction::new(vec![1.0, -2.0]).is_err());
    }

    #[test]
    fn derivative_after_integral_is_identity() {
        let polys = [
            vec![1.0],
            vec![0.0, 2.0],
            vec![1.0, 1.0, 0.5, 1.0 / 6.0],
            vec![3.5, 0.0, 7.25, 0.125, 9.0],
        ];
        for coeffs in polys {
            let f = PolyFunction::new(coeffs).unwrap();
            assert_eq!(f.integral().derivative(), f);
        }
    }

    #[test]
    fn integral_after_derivative_drops_the_constant() {
        let f = PolyFunction::new(vec![4.0, 1.0, 2.0]).unwrap();
        let g = f.derivative().integral();
        assert_eq!(g.coeffs(), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn weighted_norm_of_monomials_equals_legendre_norms() {
        for spec in ["power_disc(1)@disc", "exp_plane(1)@plane"] {
            let v = weight(spec);
            let p = sample_log_profile(&v, &grid()).unwrap();
            let norms = crate::convexity::monomial_log_norms_lenient(&p, 64).unwrap();
            for n in 1..=64usize {
                if norms.grid_limited[n] {
                    continue;
                }
                let f = PolyFunction::monomial(n);
                let direct = weighted_log_norm(&f, &v, &grid()).unwrap();
                assert_eq!(direct, norms.a[n], "{spec}, n = {n}");
            }
        }
    }

    #[test]
    fn weighted_norm_closed_forms() {
        // constant against a disc power weight: sup at r = 0 gives norm 1
        let v = weight("power_disc(2)@disc");
        let f = PolyFunction::new(vec![1.0]).unwrap();
        assert_eq!(weighted_log_norm(&f, &v, &grid()).unwrap(), 0.0);

        // f = z against e^r: max of r e^{-r} at r = 1 gives log-norm -1
        let v = weight("exp_plane(1)@plane");
        let f = PolyFunction::new(vec![0.0, 1.0]).unwrap();
        let norm = weighted_log_norm(&f, &v, &grid()).unwrap();
        assert!((norm - (-1.0)).abs() < 1e-3, "{norm}");

        assert!(matches!(
            weighted_log_norm(&PolyFunction::new(vec![0.0]).unwrap(), &v, &grid()),
            Err(OperatorError::ZeroFunction)
        ));
    }

    #[test]
    fn sufficiency_check_examples() {
        // disc: v = power, w = v/(1-r): v_rho/w bounded by 2^{alpha+1}
        let v = weight("power_disc(1.5)@disc");
        let w = RadialWeight::over_one_minus_r(&v).unwrap();
        let rep = sufficient_boundedness_check(&v, &w, &grid()).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert!(rep.value.unwrap() <= 2f64.powf(2.5) + 1e-6);

        // plane: v = w = e^r gives constant e
        let v = weight("exp_plane(1)@plane");
        let rep = sufficient_boundedness_check(&v, &v, &grid()).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert!((rep.value.unwrap() - std::f64::consts::E).abs() < 0.01 * std::f64::consts::E);

        // plane: v = w = e^{r^2}: the shift is unbounded, no conclusion
        let v = weight("exp_plane(2)@plane");
        let rep = sufficient_boundedness_check(&v, &v, &grid()).unwrap();
        assert_eq!(rep.verdict, Verdict::Fails);
    }

    #[test]
    fn d_ratio_for_exp_plane_tends_to_one() {
        let v = weight("exp_plane(1)@plane");
        let tr = monomial_norm_ratios(Operator::D, &v, &v, 256, &grid()).unwrap();
        let r200 = tr.ratios[200].unwrap().exp();
        assert!((r200 - 1.0).abs() < 0.02, "exp(ratio_200) = {r200}");
        match tr.trend.unwrap().trend {
            Trend::ConvergesTo(c) => assert!((c - 1.0).abs() < 0.05),
            other => panic!("expected convergence to 1, got {other:?}"),
        }
    }

    #[test]
    fn d_and_i_ratios_invert_exactly_when_weights_match() {
        let v = weight("exp_plane(1)@plane");
        let d = monomial_norm_ratios(Operator::D, &v, &v, 256, &grid()).unwrap();
        let i = monomial_norm_ratios(Operator::I, &v, &v, 256, &grid()).unwrap();
        for n in 0..=199usize {
            let (Some(ri), Some(rd)) = (i.ratios[n], d.ratios[n + 1]) else {
                continue;
            };
            let prod = ri.exp() * rd.exp();
            assert!((prod - 1.0).abs() < 1e-12, "n = {n}: {prod}");
        }
    }

    #[test]
    fn i_ratio_diverges_for_slow_exponential() {
        let v = weight("exp_plane(0.5)@plane");
        let tr = monomial_norm_ratios(Operator::I, &v, &v, 512, &grid()).unwrap();
        assert!(matches!(
            tr.trend.unwrap().trend,
            Trend::DivergesToInfinity
        ));
    }

    #[test]
    fn verdict_disc_d_canonical() {
        let v = weight("power_disc(1)@disc");
        let w = RadialWeight::over_one_minus_r(&v).unwrap();
        let out = boundedness_verdict(Operator::D, &v, &w, &grid()).unwrap();
        assert_eq!(out.verdict, Boundedness::Bounded, "{}", out.justification);

        let v = weight("exp_inv_disc(1,1)@disc");
        let w = RadialWeight::over_one_minus_r(&v).unwrap();
        let out = boundedness_verdict(Operator::D, &v, &w, &grid()).unwrap();
        assert_eq!(out.verdict, Boundedness::Unbounded, "{}", out.justification);
    }

    #[test]
    fn verdict_plane_pairs() {
        let e1 = weight("exp_plane(1)@plane");
        let out = boundedness_verdict(Operator::D, &e1, &e1, &grid()).unwrap();
        assert_eq!(out.verdict, Boundedness::Bounded);
        let out = boundedness_verdict(Operator::I, &e1, &e1, &grid()).unwrap();
        assert_eq!(out.verdict, Boundedness::Bounded);

        let e2 = weight("exp_plane(2)@plane");
        let out = boundedness_verdict(Operator::D, &e2, &e2, &grid()).unwrap();
        assert_eq!(out.verdict, Boundedness::Unbounded);
        let out = boundedness_verdict(Operator::I, &e2, &e2, &grid()).unwrap();
        assert_eq!(out.verdict, Boundedness::Bounded, "{}", out.justification);

        let eh = weight("exp_plane(0.5)@plane");
        let out = boundedness_verdict(Operator::D, &eh, &eh, &grid()).unwrap();
        assert_eq!(out.verdict, Boundedness::Bounded);
        let out = boundedness_verdict(Operator::I, &eh, &eh, &grid()).unwrap();
        assert_eq!(out.verdict, Boundedness::Unbounded, "{}", out.justification);
    }

    #[test]
    fn verdict_disc_i_universal_same_weight() {
        for spec in ["power_disc(2)@disc", "exp_inv_disc(1,1)@disc", "log_power_disc(1)@disc"] {
            let v = weight(spec);
            let out = boundedness_verdict(Operator::I, &v, &v, &grid()).unwrap();
            assert_eq!(out.verdict, Boundedness::Bounded, "{spec}");
            assert_eq!(out.justification_id, "universal-disc-integration");
        }
    }

    #[test]
    fn verdict_disc_i_canonical() {
        let v = weight("exp_inv_disc(1,1)@disc");
        let w = RadialWeight::over_one_minus_r(&v).unwrap();
        let out = boundedness_verdict(Operator::I, &v, &w, &grid()).unwrap();
        assert_eq!(out.verdict, Boundedness::Bounded, "{}", out.justification);

        // log-power weight: regular with limit 0, so I cannot be bounded
        let v = weight("log_power_disc(2)@disc");
        let w = RadialWeight::over_one_minus_r(&v).unwrap();
        let out = boundedness_verdict(Operator::I, &v, &w, &grid()).unwrap();
        assert_eq!(out.verdict, Boundedness::Unbounded, "{}", out.justification);
    }

    #[test]
    fn domain_mismatch_is_rejected() {
        let v = weight("power_disc(1)@disc");
        let w = weight("exp_plane(1)@plane");
        assert!(matches!(
            boundedness_verdict(Operator::D, &v, &w, &grid()),
            Err(OperatorError::DomainMismatch(..))
        ));
    }

    #[test]
    fn sufficiency_never_contradicts_the_necessary_bound() {
        // when the engine answers Bounded via sufficiency, the necessary
        // derivative ratio must not diverge on the same pair
        let discs = ["power_disc(0.5)@disc", "power_disc(2)@disc", "exp_inv_disc(1,1)@disc"];
        for spec in discs {
            let v = weight(spec);
            let w = RadialWeight::over_one_minus_r(&v).unwrap();
            let suff = sufficient_boundedness_check(&v, &w, &grid()).unwrap();
            if suff.verdict == Verdict::Holds {
                let nec = check_necessary_derivative_bound(&v, &w, &grid()).unwrap();
                assert_ne!(nec.verdict, Verdict::Fails, "{spec}: contradiction");
            }
        }
    }
}
