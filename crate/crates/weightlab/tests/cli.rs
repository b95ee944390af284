//! End-to-end tests of the `weightlab` binary: exit codes, deterministic
//! report bytes, CSV trace alignment, and the weight-spec surfaces.

use std::collections::BTreeSet;
use std::process::{Command, Output};
use tempfile::TempDir;

fn weightlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weightlab"))
        .args(args)
        .env_remove("WEIGHTLAB_GRID_DEPTH")
        .output()
        .expect("binary runs")
}

#[test]
fn verdict_exit_codes_follow_the_contract() {
    // bounded -> 0
    let out = weightlab(&["verdict", "D", "power_disc(1)@disc", "auto:v-over-1-minus-r"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    // unbounded -> 1
    let out = weightlab(&["verdict", "D", "exp_plane(2)@plane", "same"]);
    assert_eq!(out.status.code(), Some(1));
    // bounded integration with the canonical disc companion -> 0
    let out = weightlab(&["verdict", "I", "exp_inv_disc(1,1)@disc", "auto:v-over-1-minus-r"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    // parse errors -> 3
    let out = weightlab(&["verdict", "D", "power_disc(oops)@disc", "same"]);
    assert_eq!(out.status.code(), Some(3));
    // domain mismatch -> 3
    let out = weightlab(&["verdict", "D", "power_disc(1)@disc", "exp_plane(1)@plane"]);
    assert_eq!(out.status.code(), Some(3));
    // unknown subcommand -> 3
    let out = weightlab(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn inconclusive_verdict_exits_two() {
    // a log-convex staircase whose boundary slopes swing between huge and
    // tiny: no implemented criterion is decisive for D on this pair
    let dir = TempDir::new().unwrap();
    let mut xs = vec![-1.0];
    let mut phis = vec![0.0];
    let mut m = 0i32;
    for k in 0..5i32 {
        let m_next = m + 2 * k + 3;
        let x_next = -(2f64.powi(-m_next));
        let slope = 2f64.powi(m + k);
        let phi = phis.last().unwrap() + slope * (x_next - xs.last().unwrap());
        xs.push(x_next);
        phis.push(phi);
        m = m_next;
    }
    let file = dir.path().join("staircase.json");
    std::fs::write(
        &file,
        serde_json::json!({"xs": xs, "phis": phis, "domain": "disc"}).to_string(),
    )
    .unwrap();
    let spec = format!("piecewise:{}", file.display());
    let out = weightlab(&[
        "verdict",
        "D",
        &spec,
        "auto:v-over-1-minus-r",
        "--grid-depth",
        "35",
    ]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "stdout: {} stderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn analyze_reports_are_byte_identical_across_runs() {
    let dir1 = TempDir::new().unwrap();
    let dir2 = TempDir::new().unwrap();
    for dir in [&dir1, &dir2] {
        let out = weightlab(&[
            "analyze",
            "power_disc(2)@disc",
            "--out",
            dir.path().to_str().unwrap(),
            "--csv",
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dir1.path().join("report.json")).unwrap();
    let b = std::fs::read(dir2.path().join("report.json")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "reports differ between identical runs");
    // CSV traces too
    let a = std::fs::read(dir1.path().join("disc-d.i.csv")).unwrap();
    let b = std::fs::read(dir2.path().join("disc-d.i.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn analyze_json_structure_and_classes() {
    let out = weightlab(&["analyze", "exp_plane(1)@plane", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["schema_version"], "1");
    assert_eq!(doc["command"], "analyze");
    let classes = &doc["weight_classes"][0];
    assert_eq!(classes["ck_weight"], true);
    assert_eq!(classes["log_convex"], true);
    let conditions = doc["conditions"].as_array().unwrap();
    assert!(conditions.iter().any(|c| c["id"] == "plane-d.iii" && c["verdict"] == "Holds"));
    assert!(conditions.iter().any(|c| c["id"] == "plane-epi" && c["value"] == 1.0));
}

#[test]
fn analyze_rejects_invalid_weights() {
    let out = weightlab(&["analyze", "power_disc(-1)@disc"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("alpha must be positive"), "{err}");
}

#[test]
fn csv_trace_x_values_lie_on_the_declared_grid() {
    let dir = TempDir::new().unwrap();
    let out = weightlab(&[
        "analyze",
        "power_disc(1)@disc",
        "--out",
        dir.path().to_str().unwrap(),
        "--csv",
        "--grid-depth",
        "20",
    ]);
    assert_eq!(out.status.code(), Some(0));
    // reconstruct the declared grid, rounded exactly like the CSV writer
    let grid = weightlab::weight::GridSpec::new(20, 8).unwrap();
    let xs: BTreeSet<String> = grid
        .xs(weightlab::weight::Domain::Disc)
        .into_iter()
        .map(weightlab::report::format_csv_float)
        .collect();
    let csv = std::fs::read_to_string(dir.path().join("disc-d.i.csv")).unwrap();
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let x = line.split(',').next().unwrap();
        assert!(xs.contains(x), "trace x = {x} is not a grid point");
        rows += 1;
    }
    assert!(rows >= 150, "only {rows} trace rows");
}

#[test]
fn norms_table_and_ratio_trace() {
    let out = weightlab(&["norms", "power_disc(1)@disc", "--N", "1", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let a1 = doc["norms"]["a"][1].as_f64().unwrap();
    assert!((a1 - 0.25f64.ln()).abs() < 1e-9, "A_1 = {a1}");

    let dir = TempDir::new().unwrap();
    let out = weightlab(&[
        "norms",
        "exp_plane(1)@plane",
        "--N",
        "256",
        "--op",
        "D",
        "--w",
        "same",
        "--json",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for n in 1..=50usize {
        let a = doc["norms"]["a"][n].as_f64().unwrap();
        let closed = n as f64 * (n as f64).ln() - n as f64;
        assert!((a - closed).abs() < 1e-6, "A_{n} = {a} vs {closed}");
    }
    // ratio trend is recorded and heads to 1
    let trend = &doc["ratio_trend"]["trend"]["trend"];
    assert_eq!(trend["kind"], "ConvergesTo");
    assert!((trend["value"].as_f64().unwrap() - 1.0).abs() < 0.2);
    // the norms.csv artifact exists with the flag column
    let csv = std::fs::read_to_string(dir.path().join("norms.csv")).unwrap();
    assert!(csv.starts_with("n,a,x,grid_limited\n"));
    assert_eq!(csv.lines().count(), 258);
    // --op without --w is a usage error
    let out = weightlab(&["norms", "exp_plane(1)@plane", "--op", "D"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn counterexample_commands() {
    let dir = TempDir::new().unwrap();
    let out = weightlab(&[
        "counterexample",
        "ex1",
        "--json",
        "--csv",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let summary = &doc["counterexample"];
    assert!((summary["minorant_limit"].as_f64().unwrap() - 4.0).abs() < 1e-9);
    assert!((summary["l"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(doc["verdict"]["verdict"], "Bounded");
    // plot data for phi vs its minorant
    assert!(dir.path().join("phi.csv").exists());
    assert!(dir.path().join("phi_bar.csv").exists());

    let out = weightlab(&["counterexample", "ex3", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let c = doc["counterexample"]["sandwich_constant"].as_f64().unwrap();
    assert!((c - 0.452_826_603_472_177_9).abs() < 1e-12);
    assert_eq!(doc["verdict"]["verdict"], "Bounded");

    // equal sequences violate the interlacing property
    let out = weightlab(&["counterexample", "ex1", "--a", "3^-n", "--b", "3^-n"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("property"), "{err}");

    let out = weightlab(&["counterexample", "ex9"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn grid_depth_env_var_is_the_default() {
    let out = Command::new(env!("CARGO_BIN_EXE_weightlab"))
        .args(["analyze", "power_disc(1)@disc", "--json"])
        .env("WEIGHTLAB_GRID_DEPTH", "16")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["grid"]["depth"], 16);
    // an explicit flag still wins
    let out = Command::new(env!("CARGO_BIN_EXE_weightlab"))
        .args(["analyze", "power_disc(1)@disc", "--json", "--grid-depth", "24"])
        .env("WEIGHTLAB_GRID_DEPTH", "16")
        .output()
        .unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["grid"]["depth"], 24);
}

#[test]
fn csv_without_out_is_a_usage_error() {
    let out = weightlab(&["analyze", "power_disc(1)@disc", "--csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--out"));
}

#[test]
fn help_exits_zero() {
    let out = weightlab(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("analyze"));
    assert!(text.contains("verdict"));
    assert!(text.contains("counterexample"));
    assert!(text.contains("norms"));
}
