//! Browser demo bindings: three interactive operations over the weightlab
//! core, each returning a JSON payload ready for plotting.
//!
//! The pure logic lives in `api` and is exercised by host-side tests; the
//! thin `wasm_bindgen` wrappers only translate errors into `JsValue`.

use wasm_bindgen::prelude::*;

/// Weight analysis for the profile explorer: the sampled log-profile, its
/// largest convex minorant, class flags, and the condition battery.
#[wasm_bindgen]
pub fn analyze_weight(spec: &str, depth: u32, points_per_level: u32) -> Result<String, JsValue> {
    api::analyze_weight(spec, depth, points_per_level).map_err(|e| JsValue::from_str(&e))
}

/// Monomial norm table A_n with maximizers, plus the image-ratio traces of
/// both operators against the same weight.
#[wasm_bindgen]
pub fn monomial_norms(
    spec: &str,
    n_max: usize,
    depth: u32,
    points_per_level: u32,
) -> Result<String, JsValue> {
    api::monomial_norms(spec, n_max, depth, points_per_level).map_err(|e| JsValue::from_str(&e))
}

/// Boundedness verdict for D or I on a weight pair, with the evidence chain.
#[wasm_bindgen]
pub fn operator_verdict(
    op: &str,
    v_spec: &str,
    w_spec: &str,
    depth: u32,
    points_per_level: u32,
) -> Result<String, JsValue> {
    api::operator_verdict(op, v_spec, w_spec, depth, points_per_level)
        .map_err(|e| JsValue::from_str(&e))
}

pub mod api {
    use serde::Serialize;
    use weightlab::convexity::convex_minorant;
    use weightlab::criteria::{
        check_disc_d_conditions, check_disc_i_conditions, check_epimorphism_plane,
        check_log_domination, check_plane_d_conditions, check_plane_i_conditions, classify_weight,
        ConditionReport,
    };
    use weightlab::operators::{boundedness_verdict, monomial_norm_ratios, Operator};
    use weightlab::report::to_deterministic_json;
    use weightlab::weight::{
        parse_weight_spec, sample_log_profile, validate_weight, Domain, GridSpec, RadialWeight,
        ValidationConfig,
    };

    fn grid(depth: u32, points_per_level: u32) -> Result<GridSpec, String> {
        GridSpec::new(depth, points_per_level).map_err(|e| e.to_string())
    }

    fn weight(spec: &str) -> Result<RadialWeight, String> {
        parse_weight_spec(spec).map_err(|e| e.to_string())
    }

    fn companion(w_spec: &str, v: &RadialWeight) -> Result<RadialWeight, String> {
        match w_spec {
            "same" => Ok(v.clone()),
            "auto:v-over-1-minus-r" => {
                RadialWeight::over_one_minus_r(v).map_err(|e| e.to_string())
            }
            other => weight(other),
        }
    }

    #[derive(Serialize)]
    struct Curve {
        x: Vec<f64>,
        y: Vec<f64>,
    }

    #[derive(Serialize)]
    struct ConditionSummary {
        id: String,
        description: String,
        verdict: String,
        value: Option<f64>,
        trend: Option<String>,
    }

    fn summarize(rep: &ConditionReport) -> ConditionSummary {
        ConditionSummary {
            id: rep.id.clone(),
            description: rep.description.clone(),
            verdict: format!("{:?}", rep.verdict),
            value: rep.value.filter(|v| v.is_finite()),
            trend: rep.estimate.as_ref().map(|e| format!("{:?}", e.trend)),
        }
    }

    #[derive(Serialize)]
    struct AnalyzePayload {
        label: String,
        domain: String,
        profile: Curve,
        minorant: Curve,
        log_convex: bool,
        classes: Vec<String>,
        conditions: Vec<ConditionSummary>,
    }

    pub fn analyze_weight(
        spec: &str,
        depth: u32,
        points_per_level: u32,
    ) -> Result<String, String> {
        let g = grid(depth, points_per_level)?;
        let v = weight(spec)?;
        validate_weight(&v, &g, &ValidationConfig::default()).map_err(|e| e.to_string())?;
        let p = sample_log_profile(&v, &g).map_err(|e| e.to_string())?;
        let hull = convex_minorant(&p).map_err(|e| e.to_string())?;
        let minorant_y: Vec<f64> = p
            .xs
            .iter()
            .map(|&x| hull.eval(x).unwrap_or(f64::NAN))
            .collect();
        let tags = classify_weight(&v, &g).map_err(|e| e.to_string())?;
        let mut classes = Vec::new();
        for (flag, name) in [
            (tags.log_convex, "log-convex"),
            (tags.moderate_growth, "moderate-growth"),
            (tags.rapidly_growing, "rapidly-growing"),
            (tags.h_weight, "h-class"),
            (tags.ck_weight, "ck-class"),
            (tags.bbt_weight, "bbt-class"),
        ] {
            if flag {
                classes.push(name.to_string());
            }
        }
        if let Some(l) = tags.regular {
            classes.push(format!("regular(L={l:.4})"));
        }
        let mut conditions = Vec::new();
        match v.domain {
            Domain::Disc => {
                conditions.extend(check_disc_d_conditions(&v, &g).map_err(|e| e.to_string())?);
                conditions.extend(check_disc_i_conditions(&v, &g).map_err(|e| e.to_string())?);
                conditions.push(check_log_domination(&v, &g).map_err(|e| e.to_string())?);
            }
            Domain::Plane => {
                conditions.extend(check_plane_d_conditions(&v, &g).map_err(|e| e.to_string())?);
                conditions.extend(check_plane_i_conditions(&v, &g).map_err(|e| e.to_string())?);
                conditions.push(check_epimorphism_plane(&v, &g).map_err(|e| e.to_string())?);
            }
        }
        let payload = AnalyzePayload {
            label: v.label.clone(),
            domain: v.domain.to_string(),
            profile: Curve { x: p.xs.clone(), y: p.phis.clone() },
            minorant: Curve { x: p.xs, y: minorant_y },
            log_convex: tags.log_convex,
            classes,
            conditions: conditions.iter().map(summarize).collect(),
        };
        serde_json::to_string(&payload).map_err(|e| e.to_string())
    }

    #[derive(Serialize)]
    struct NormsPayload {
        label: String,
        n: Vec<usize>,
        a: Vec<f64>,
        x_arg: Vec<f64>,
        grid_limited: Vec<bool>,
        /// exp of the image ratios against the same weight (NaN where the
        /// grid could not certify the norm; serialized as null).
        ratio_d: Vec<f64>,
        ratio_i: Vec<f64>,
    }

    pub fn monomial_norms(
        spec: &str,
        n_max: usize,
        depth: u32,
        points_per_level: u32,
    ) -> Result<String, String> {
        let g = grid(depth, points_per_level)?;
        let v = weight(spec)?;
        let n_max = n_max.clamp(1, 4096);
        let p = sample_log_profile(&v, &g).map_err(|e| e.to_string())?;
        let norms = weightlab::convexity::monomial_log_norms_refined(&v, &p, n_max)
            .or_else(|_| weightlab::convexity::monomial_log_norms_lenient(&p, n_max))
            .map_err(|e| e.to_string())?;
        let to_exp = |r: Option<f64>| r.map_or(f64::NAN, f64::exp);
        let ratio_d =
            monomial_norm_ratios(Operator::D, &v, &v, n_max, &g).map_err(|e| e.to_string())?;
        let ratio_i =
            monomial_norm_ratios(Operator::I, &v, &v, n_max, &g).map_err(|e| e.to_string())?;
        let payload = NormsPayload {
            label: v.label.clone(),
            n: (0..=n_max).collect(),
            a: norms.a,
            x_arg: norms.x_arg,
            grid_limited: norms.grid_limited,
            ratio_d: ratio_d.ratios.iter().map(|&r| to_exp(r)).collect(),
            ratio_i: ratio_i.ratios.iter().map(|&r| to_exp(r)).collect(),
        };
        serde_json::to_string(&payload).map_err(|e| e.to_string())
    }

    pub fn operator_verdict(
        op: &str,
        v_spec: &str,
        w_spec: &str,
        depth: u32,
        points_per_level: u32,
    ) -> Result<String, String> {
        let g = grid(depth, points_per_level)?;
        let op: Operator = op.parse()?;
        let v = weight(v_spec)?;
        let w = companion(w_spec, &v)?;
        validate_weight(&v, &g, &ValidationConfig::default()).map_err(|e| e.to_string())?;
        // sanity-check the pair before building the full report
        boundedness_verdict(op, &v, &w, &g).map_err(|e| e.to_string())?;
        let report = weightlab::report::verdict(op, (v_spec, w_spec), &v, &w, &g)
            .map_err(|e| e.to_string())?;
        Ok(to_deterministic_json(&report.document))
    }
}

#[cfg(test)]
mod tests {
    use super::api;

    #[test]
    fn analyze_payload_has_curves_and_classes() {
        let json = api::analyze_weight("power_disc(2)@disc", 30, 8).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(doc["domain"], "disc");
        assert!(doc["log_convex"].as_bool().unwrap());
        let xs = doc["profile"]["x"].as_array().unwrap();
        let ys = doc["profile"]["y"].as_array().unwrap();
        assert_eq!(xs.len(), ys.len());
        assert!(xs.len() > 200);
        // the minorant of a log-convex weight coincides with the profile
        let m = doc["minorant"]["y"].as_array().unwrap();
        let diff = (0..ys.len())
            .map(|i| (ys[i].as_f64().unwrap() - m[i].as_f64().unwrap()).abs())
            .fold(0.0f64, f64::max);
        assert!(diff < 1e-6, "max profile/minorant gap {diff}");
        assert!(doc["classes"]
            .as_array()
            .unwrap()
            .iter()
            .any(|c| c == "moderate-growth"));
        assert!(doc["conditions"].as_array().unwrap().len() >= 13);
    }

    #[test]
    fn norms_payload_matches_closed_form() {
        let json = api::monomial_norms("exp_plane(1)@plane", 64, 40, 8).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
        let a = doc["a"].as_array().unwrap();
        for n in [1usize, 10, 50] {
            let closed = n as f64 * (n as f64).ln() - n as f64;
            assert!((a[n].as_f64().unwrap() - closed).abs() < 1e-6);
        }
        let rd = doc["ratio_d"].as_array().unwrap();
        // ratio_d[0] is undefined (D z^0 = 0) and serializes as null
        assert!(rd[0].is_null());
        assert!((rd[64].as_f64().unwrap() - 1.0).abs() < 0.1);
    }

    #[test]
    fn verdict_payload_reports_rule_and_code() {
        let json = api::operator_verdict("D", "exp_plane(2)@plane", "same", 40, 8).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(doc["verdict"]["verdict"], "Unbounded");
        assert_eq!(doc["schema_version"], "1");
        assert!(api::operator_verdict("Q", "exp_plane(1)@plane", "same", 40, 8).is_err());
        assert!(api::operator_verdict("D", "nope", "same", 40, 8).is_err());
    }
}
