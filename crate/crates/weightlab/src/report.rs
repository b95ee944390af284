//! Machine-readable analysis reports.
//!
//! Reports are deterministic: identical inputs produce byte-identical JSON.
//! Floats are rounded to 12 significant digits before serialization, field
//! order is fixed (alphabetical within each object), nothing time- or
//! platform-dependent is recorded, and non-finite values serialize as null
//! with the trend classification carrying their meaning.

use crate::convexity::monomial_log_norms_lenient;
use crate::counterexamples::{CounterexampleBundle, ExampleKind};
use crate::criteria::{
    check_disc_d_conditions, check_disc_i_conditions, check_epimorphism_plane,
    check_log_domination, check_plane_d_conditions, check_plane_i_conditions, classify_weight,
    tol, ConditionReport, CriteriaError, Trace, WeightClassTags,
};
use crate::operators::{
    boundedness_verdict, monomial_norm_ratios, Operator, OperatorError, OperatorVerdict,
    RatioTrace,
};
use crate::weight::{
    sample_log_profile, validate_weight, Domain, GridSpec, RadialWeight, ValidationConfig,
    WeightError,
};
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Convexity(#[from] crate::convexity::ConvexityError),
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightInput {
    pub spec: String,
    pub label: String,
    pub domain: Domain,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridInfo {
    pub depth: u32,
    pub points_per_level: u32,
    pub grid_points: usize,
}

/// The thresholds the asymptotic machinery ran with, echoed for
/// reproducibility.
#[derive(Debug, Clone, Serialize)]
pub struct ToleranceInfo {
    pub trend_windows: usize,
    pub lookback: usize,
    pub rel_tol: f64,
    pub drift_fraction: f64,
    pub convexity_tol: f64,
    pub integral_oversample: u32,
}

impl Default for ToleranceInfo {
    fn default() -> Self {
        ToleranceInfo {
            trend_windows: tol::TREND_WINDOWS,
            lookback: tol::LOOKBACK,
            rel_tol: tol::REL_TOL,
            drift_fraction: tol::DRIFT_FRACTION,
            convexity_tol: tol::CONVEXITY_TOL,
            integral_oversample: tol::INTEGRAL_OVERSAMPLE,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightClassEntry {
    pub label: String,
    pub log_convex: bool,
    pub moderate_growth: bool,
    pub rapidly_growing: bool,
    pub h_weight: bool,
    pub ck_weight: bool,
    pub bbt_weight: bool,
    pub is_regular: bool,
    /// The regular limit when finite; None when not regular or infinite.
    pub regular_limit: Option<f64>,
    pub regular_limit_is_infinite: bool,
    pub hl_condition: crate::criteria::Verdict,
}

impl WeightClassEntry {
    fn from_tags(label: &str, tags: &WeightClassTags) -> Self {
        WeightClassEntry {
            label: label.to_string(),
            log_convex: tags.log_convex,
            moderate_growth: tags.moderate_growth,
            rapidly_growing: tags.rapidly_growing,
            h_weight: tags.h_weight,
            ck_weight: tags.ck_weight,
            bbt_weight: tags.bbt_weight,
            is_regular: tags.regular.is_some(),
            regular_limit: tags.regular.filter(|l| l.is_finite()),
            regular_limit_is_infinite: tags.regular.is_some_and(|l| l.is_infinite()),
            hl_condition: tags.hl_condition,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NormsTable {
    pub n_max: usize,
    pub a: Vec<f64>,
    pub x_arg: Vec<f64>,
    pub grid_limited: Vec<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleSummary {
    pub kind: String,
    pub n_max: usize,
    pub l: Option<f64>,
    pub total_step_sum: Option<f64>,
    pub minorant_limit: Option<f64>,
    pub sandwich_constant: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub schema_version: &'static str,
    pub command: String,
    pub inputs: Vec<WeightInput>,
    pub operator: Option<String>,
    pub grid: GridInfo,
    pub tolerances: ToleranceInfo,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub weight_classes: Vec<WeightClassEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub conditions: Vec<ConditionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<OperatorVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norms: Option<NormsTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_trend: Option<RatioTrace>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexampleSummary>,
}

/// A finished analysis: the document plus the raw traces for CSV output.
#[derive(Debug, Clone)]
pub struct AnalysisOutput {
    pub document: ReportDocument,
    /// (file stem, trace) pairs; every trace x lies on the evaluation grid.
    pub traces: Vec<(String, Trace)>,
}

fn grid_info(grid: &GridSpec, domain: Domain) -> GridInfo {
    GridInfo {
        depth: grid.depth,
        points_per_level: grid.points_per_level,
        grid_points: grid.xs(domain).len(),
    }
}

fn collect_traces(reports: &[ConditionReport], traces: &mut Vec<(String, Trace)>) {
    for rep in reports {
        if let Some(trace) = &rep.trace {
            traces.push((rep.id.clone(), trace.clone()));
        }
    }
}

/// Classification plus the domain-appropriate condition batteries.
pub fn analyze(
    spec: &str,
    v: &RadialWeight,
    grid: &GridSpec,
) -> Result<AnalysisOutput, ReportError> {
    validate_weight(v, grid, &ValidationConfig::default())?;
    let tags = classify_weight(v, grid)?;
    let mut conditions = Vec::new();
    match v.domain {
        Domain::Disc => {
            conditions.extend(check_disc_d_conditions(v, grid)?);
            conditions.extend(check_disc_i_conditions(v, grid)?);
            conditions.push(check_log_domination(v, grid)?);
        }
        Domain::Plane => {
            conditions.extend(check_plane_d_conditions(v, grid)?);
            conditions.extend(check_plane_i_conditions(v, grid)?);
            conditions.push(check_epimorphism_plane(v, grid)?);
        }
    }
    let mut traces = Vec::new();
    collect_traces(&conditions, &mut traces);
    let document = ReportDocument {
        schema_version: SCHEMA_VERSION,
        command: "analyze".into(),
        inputs: vec![WeightInput {
            spec: spec.to_string(),
            label: v.label.clone(),
            domain: v.domain,
        }],
        operator: None,
        grid: grid_info(grid, v.domain),
        tolerances: ToleranceInfo::default(),
        weight_classes: vec![WeightClassEntry::from_tags(&v.label, &tags)],
        conditions,
        verdict: None,
        norms: None,
        ratio_trend: None,
        counterexample: None,
    };
    Ok(AnalysisOutput { document, traces })
}

/// Full evidence chain plus the boundedness verdict for one pair.
pub fn verdict(
    op: Operator,
    specs: (&str, &str),
    v: &RadialWeight,
    w: &RadialWeight,
    grid: &GridSpec,
) -> Result<AnalysisOutput, ReportError> {
    validate_weight(v, grid, &ValidationConfig::default())?;
    validate_weight(w, grid, &ValidationConfig::default())?;
    let out = boundedness_verdict(op, v, w, grid)?;
    let mut traces = Vec::new();
    collect_traces(&out.evidence, &mut traces);
    let document = ReportDocument {
        schema_version: SCHEMA_VERSION,
        command: "verdict".into(),
        inputs: vec![
            WeightInput { spec: specs.0.into(), label: v.label.clone(), domain: v.domain },
            WeightInput { spec: specs.1.into(), label: w.label.clone(), domain: w.domain },
        ],
        operator: Some(op.to_string()),
        grid: grid_info(grid, v.domain),
        tolerances: ToleranceInfo::default(),
        weight_classes: Vec::new(),
        conditions: Vec::new(),
        verdict: Some(out),
        norms: None,
        ratio_trend: None,
        counterexample: None,
    };
    Ok(AnalysisOutput { document, traces })
}

/// Monomial-norm table, and the image-ratio trace when an operator and a
/// second weight are given.
pub fn norms(
    spec: &str,
    v: &RadialWeight,
    companion: Option<(Operator, &str, &RadialWeight)>,
    n_max: usize,
    grid: &GridSpec,
) -> Result<AnalysisOutput, ReportError> {
    validate_weight(v, grid, &ValidationConfig::default())?;
    let p = sample_log_profile(v, grid)?;
    let norms = crate::convexity::monomial_log_norms_refined(v, &p, n_max)
        .or_else(|_| monomial_log_norms_lenient(&p, n_max))?;
    let table = NormsTable {
        n_max,
        a: norms.a.clone(),
        x_arg: norms.x_arg.clone(),
        grid_limited: norms.grid_limited.clone(),
    };
    let mut inputs = vec![WeightInput {
        spec: spec.to_string(),
        label: v.label.clone(),
        domain: v.domain,
    }];
    let mut ratio_trend = None;
    let mut operator = None;
    let mut traces: Vec<(String, Trace)> = Vec::new();
    if let Some((op, w_spec, w)) = companion {
        validate_weight(w, grid, &ValidationConfig::default())?;
        let ratio = monomial_norm_ratios(op, v, w, n_max, grid)?;
        inputs.push(WeightInput {
            spec: w_spec.to_string(),
            label: w.label.clone(),
            domain: w.domain,
        });
        operator = Some(op.to_string());
        let xs: Vec<f64> = (0..=n_max).map(|n| n as f64).collect();
        let values: Vec<f64> = ratio
            .ratios
            .iter()
            .map(|r| r.map_or(f64::NAN, f64::exp))
            .collect();
        traces.push(("ratio".into(), Trace { xs, values }));
        ratio_trend = Some(ratio);
    }
    let document = ReportDocument {
        schema_version: SCHEMA_VERSION,
        command: "norms".into(),
        inputs,
        operator,
        grid: grid_info(grid, v.domain),
        tolerances: ToleranceInfo::default(),
        weight_classes: Vec::new(),
        conditions: Vec::new(),
        verdict: None,
        norms: Some(table),
        ratio_trend,
        counterexample: None,
    };
    Ok(AnalysisOutput { document, traces })
}

/// Counterexample bundle: designed-gap assertions, the generic condition
/// battery on the raw weight, the engine verdict on the natural pairing,
/// and plot data for phi vs its minorant.
pub fn counterexample(bundle: &CounterexampleBundle) -> Result<AnalysisOutput, ReportError> {
    let grid = &bundle.grid;
    let mut conditions = bundle.designed_reports()?;
    let verdict_out = match bundle.kind {
        ExampleKind::DiscDifferentiation => {
            conditions.extend(check_disc_d_conditions(&bundle.v, grid)?);
            let w = RadialWeight::over_one_minus_r(&bundle.v)?;
            Some(boundedness_verdict(Operator::D, &bundle.v, &w, grid)?)
        }
        ExampleKind::PlaneDifferentiation => {
            Some(boundedness_verdict(Operator::D, &bundle.v_bar, &bundle.v_bar, grid)?)
        }
        ExampleKind::PlaneIntegration => {
            conditions.extend(check_plane_i_conditions(&bundle.v, grid)?);
            Some(boundedness_verdict(Operator::I, &bundle.v, &bundle.v, grid)?)
        }
    };
    let mut traces = Vec::new();
    // phi vs its minorant on the bundle grid
    let p = sample_log_profile(&bundle.v, grid)?;
    let phis = p.phis.clone();
    let minorant: Vec<f64> = p.xs.iter().map(|&x| bundle.v_bar.phi(x)).collect();
    traces.push(("phi".into(), Trace { xs: p.xs.clone(), values: phis }));
    traces.push(("phi_bar".into(), Trace { xs: p.xs.clone(), values: minorant }));
    collect_traces(&conditions, &mut traces);
    let kind_name = match bundle.kind {
        ExampleKind::DiscDifferentiation => "disc-differentiation-sawtooth",
        ExampleKind::PlaneDifferentiation => "plane-differentiation-sawtooth",
        ExampleKind::PlaneIntegration => "plane-integration-notched",
    };
    let document = ReportDocument {
        schema_version: SCHEMA_VERSION,
        command: "counterexample".into(),
        inputs: vec![WeightInput {
            spec: kind_name.to_string(),
            label: bundle.v.label.clone(),
            domain: bundle.v.domain,
        }],
        operator: None,
        grid: grid_info(grid, bundle.v.domain),
        tolerances: ToleranceInfo::default(),
        weight_classes: Vec::new(),
        conditions,
        verdict: verdict_out,
        norms: None,
        ratio_trend: None,
        counterexample: Some(CounterexampleSummary {
            kind: kind_name.to_string(),
            n_max: bundle.n_max(),
            l: bundle.l,
            total_step_sum: bundle.total,
            minorant_limit: bundle.minorant_limit,
            sandwich_constant: bundle.sandwich_constant,
        }),
    };
    Ok(AnalysisOutput { document, traces })
}

/// Round every float in the JSON tree to 12 significant digits.
fn round_floats(value: &mut Value) {
    match value {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.is_f64() {
                    let rounded = crate::numerics::round_sig12(f);
                    *value = serde_json::Number::from_f64(rounded)
                        .map(Value::Number)
                        .unwrap_or(Value::Null);
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Serialize a report deterministically: 12-significant-digit floats,
/// alphabetical keys, trailing newline.
pub fn to_deterministic_json(doc: &ReportDocument) -> String {
    let mut value = serde_json::to_value(doc).expect("report serialization cannot fail");
    round_floats(&mut value);
    let mut text = serde_json::to_string_pretty(&value).expect("valid JSON tree");
    text.push('\n');
    text
}

/// Format one float for CSV output (shortest representation of the value
/// rounded to 12 significant digits).
pub fn format_csv_float(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{}", crate::numerics::round_sig12(v))
}

/// Two-column trace CSV.
pub fn trace_to_csv(trace: &Trace) -> String {
    let mut out = String::from("x,value\n");
    for (x, v) in trace.xs.iter().zip(&trace.values) {
        out.push_str(&format_csv_float(*x));
        out.push(',');
        out.push_str(&format_csv_float(*v));
        out.push('\n');
    }
    out
}

/// Monomial-norm table CSV: n, A_n, x_n, grid-limited flag.
pub fn norms_to_csv(table: &NormsTable) -> String {
    let mut out = String::from("n,a,x,grid_limited\n");
    for n in 0..=table.n_max {
        out.push_str(&format!(
            "{},{},{},{}\n",
            n,
            format_csv_float(table.a[n]),
            format_csv_float(table.x_arg[n]),
            table.grid_limited[n]
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::parse_weight_spec;

    #[test]
    fn analyze_report_is_deterministic() {
        let v = parse_weight_spec("power_disc(2)@disc").unwrap();
        let grid = GridSpec::default();
        let a = analyze("power_disc(2)@disc", &v, &grid).unwrap();
        let b = analyze("power_disc(2)@disc", &v, &grid).unwrap();
        assert_eq!(
            to_deterministic_json(&a.document),
            to_deterministic_json(&b.document)
        );
    }

    #[test]
    fn analyze_reports_expected_classes() {
        let v = parse_weight_spec("power_disc(2)@disc").unwrap();
        let out = analyze("power_disc(2)@disc", &v, &GridSpec::default()).unwrap();
        let entry = &out.document.weight_classes[0];
        assert!(entry.log_convex);
        assert!(entry.moderate_growth);
        assert!(entry.is_regular);
        assert!((entry.regular_limit.unwrap() - 2.0).abs() < 1e-9);
        // the condition list covers both operator batteries plus log-domination
        assert_eq!(out.document.conditions.len(), 6 + 7 + 1);
        // traces exist and sit on the grid
        assert!(!out.traces.is_empty());
    }

    #[test]
    fn json_floats_are_rounded() {
        let v = parse_weight_spec("exp_plane(1)@plane").unwrap();
        let out = analyze("exp_plane(1)@plane", &v, &GridSpec::default()).unwrap();
        let text = to_deterministic_json(&out.document);
        // 12 significant digits means no 17-digit float tails
        assert!(!text.contains("000000000000001"));
        assert!(text.starts_with("{\n"));
        assert!(text.ends_with("\n"));
    }

    #[test]
    fn csv_formatting_is_stable() {
        let t = Trace { xs: vec![0.5, 1.0], values: vec![1.0 / 3.0, f64::INFINITY] };
        let csv = trace_to_csv(&t);
        assert_eq!(csv, "x,value\n0.5,0.333333333333\n1,inf\n");
    }
}
