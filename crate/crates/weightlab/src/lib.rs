//! Numerical analysis of radial weights on the unit disc and the complex
//! plane, and of the boundedness of the differentiation and integration
//! operators on the associated weighted sup-norm spaces of holomorphic
//! functions.
//!
//! The library keeps every weight in log space as `phi(x) = log v(e^x)`,
//! classifies weights (log-convexity, dyadic growth classes, regularity),
//! computes largest convex minorants and Legendre-transform monomial norms,
//! estimates the limsup/liminf growth conditions that govern the operators
//! `D: f -> f'` and `I: f -> ∫_0^z f`, and combines them into
//! bounded/unbounded/inconclusive verdicts with the rule that justified
//! them. The `weightlab` binary exposes all of it as a CLI with
//! deterministic JSON/CSV reports.

pub mod convexity;
pub mod counterexamples;
pub mod criteria;
pub mod numerics;
pub mod operators;
pub mod report;
pub mod weight;

pub mod cli;

pub use convexity::{
    associated_envelope, convex_minorant, is_log_convex, monomial_log_norms,
    monomial_log_norms_refined, right_derivative, MonomialNorms, PiecewiseLinearConvex,
};
pub use criteria::{
    classify_weight, estimate_tail, AsymptoticEstimate, ConditionReport, Trend, Verdict,
    WeightClassTags,
};
pub use operators::{boundedness_verdict, Operator, OperatorVerdict, PolyFunction};
pub use weight::{
    parse_weight_spec, sample_log_profile, validate_weight, Domain, GridSpec, LogProfile,
    RadialWeight, WeightError,
};
