//! Command-line front end.
//!
//! Exit codes: for `verdict`, 0 = Bounded, 1 = Unbounded, 2 = Inconclusive;
//! every other successful command exits 0; any error exits 3.

use crate::counterexamples::{
    build_example_d_disc, build_example_d_plane, build_example_i_plane, default_disc_sequences,
    default_notch_widths, default_plane_sequences, CounterexampleBundle, CounterexampleError,
    SequenceExpr, SequencePair,
};
use crate::operators::{Boundedness, Operator};
use crate::report::{self, AnalysisOutput, ReportError};
use crate::weight::{parse_weight_spec, Domain, GridSpec, RadialWeight, WeightError};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Counterexample(#[from] CounterexampleError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write `{path}`: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Parser, Debug)]
#[command(
    name = "weightlab",
    about = "Growth analysis of radial weights and boundedness of the differentiation \
             and integration operators on weighted spaces of holomorphic functions",
    after_help = "Weight specs: `family(p1,p2,...)@disc|plane` with families power_disc(alpha), \
                  exp_inv_disc(beta,p), log_power_disc(alpha), exp_plane(p), \
                  power_exp_plane(sigma,p); or `piecewise:<path>.json` with fields \
                  {\"xs\":[...],\"phis\":[...],\"domain\":\"disc\"|\"plane\"}. The second \
                  weight of a pair may be `same` or `auto:v-over-1-minus-r`."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct CommonOpts {
    /// Dyadic grid depth J (default 40, or the WEIGHTLAB_GRID_DEPTH env var).
    #[arg(long, global = true)]
    grid_depth: Option<u32>,
    /// Samples per dyadic level (default 8).
    #[arg(long, global = true)]
    points_per_level: Option<u32>,
    /// Print the full JSON report to stdout instead of the summary.
    #[arg(long, global = true)]
    json: bool,
    /// Also write per-condition trace CSVs (requires --out).
    #[arg(long, global = true)]
    csv: bool,
    /// Directory for report.json and CSV traces.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a weight and run its full condition battery.
    Analyze {
        /// Weight spec, e.g. "power_disc(2)@disc".
        spec: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Decide boundedness of D (v-space into w-space) or I (w-space into
    /// v-space) for a weight pair.
    Verdict {
        /// Operator: D or I.
        op: Operator,
        /// The weight v.
        v_spec: String,
        /// The companion weight w; `same` or `auto:v-over-1-minus-r` derive
        /// it from v.
        w_spec: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Build one of the designed counterexample weights and verify its gap.
    Counterexample {
        /// Which construction: ex1 (disc sawtooth), ex2 (plane sawtooth),
        /// ex3 (notched entire weight).
        which: String,
        /// Override the a_n sequence, e.g. "3^-n".
        #[arg(long)]
        a: Option<String>,
        /// Override the b_n sequence, e.g. "2^-n - 3^-n".
        #[arg(long)]
        b: Option<String>,
        /// Override the notch widths for ex3, e.g. "e^-2n".
        #[arg(long)]
        eps: Option<String>,
        /// Truncation depth.
        #[arg(long)]
        n_max: Option<u32>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Monomial norm table A_n, optionally with an operator ratio trace.
    Norms {
        /// The weight v.
        spec: String,
        /// Companion weight for the ratio trace.
        #[arg(long)]
        w: Option<String>,
        /// Operator for the ratio trace: D or I.
        #[arg(long)]
        op: Option<Operator>,
        /// Largest monomial degree (default: 512 on the plane, 256 on the disc).
        #[arg(long = "N")]
        n_max: Option<usize>,
        #[command(flatten)]
        common: CommonOpts,
    },
}

/// Entry point; returns the process exit code.
pub fn run(args: impl IntoIterator<Item = String>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprint!("{e}");
            return 3;
        }
        Err(e) => {
            // --help / --version
            print!("{e}");
            return 0;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            3
        }
    }
}

fn grid_from(common: &CommonOpts) -> Result<GridSpec, CliError> {
    let env_depth = std::env::var("WEIGHTLAB_GRID_DEPTH")
        .ok()
        .and_then(|s| s.parse::<u32>().ok());
    let depth = common.grid_depth.or(env_depth).unwrap_or(40);
    let points = common.points_per_level.unwrap_or(8);
    Ok(GridSpec::new(depth, points)?)
}

/// Resolve a w-spec that may reference v.
fn resolve_companion(w_spec: &str, v: &RadialWeight) -> Result<RadialWeight, CliError> {
    match w_spec {
        "same" => Ok(v.clone()),
        "auto:v-over-1-minus-r" => Ok(RadialWeight::over_one_minus_r(v)?),
        other => Ok(parse_weight_spec(other)?),
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Analyze { spec, common } => {
            let grid = grid_from(&common)?;
            let v = parse_weight_spec(&spec)?;
            let out = report::analyze(&spec, &v, &grid)?;
            emit(&out, &common)?;
            if !common.json {
                summarize_analyze(&out);
            }
            Ok(0)
        }
        Command::Verdict { op, v_spec, w_spec, common } => {
            let grid = grid_from(&common)?;
            let v = parse_weight_spec(&v_spec)?;
            let w = resolve_companion(&w_spec, &v)?;
            let out = report::verdict(op, (&v_spec, &w_spec), &v, &w, &grid)?;
            emit(&out, &common)?;
            let verdict = out.document.verdict.as_ref().expect("verdict command");
            if !common.json {
                println!(
                    "{op}: ({}, {}) -> {:?} [{}]",
                    verdict.pair.0, verdict.pair.1, verdict.verdict, verdict.justification_id
                );
                println!("  {}", verdict.justification);
                if let Some(nb) = verdict.norm_lower_bound {
                    println!("  operator norm >= {nb:.6e}");
                }
            }
            Ok(match verdict.verdict {
                Boundedness::Bounded => 0,
                Boundedness::Unbounded => 1,
                Boundedness::Inconclusive => 2,
            })
        }
        Command::Counterexample { which, a, b, eps, n_max, common } => {
            let bundle = build_bundle(&which, a, b, eps, n_max)?;
            let out = report::counterexample(&bundle)?;
            emit(&out, &common)?;
            if !common.json {
                summarize_counterexample(&out);
            }
            Ok(0)
        }
        Command::Norms { spec, w, op, n_max, common } => {
            let grid = grid_from(&common)?;
            let v = parse_weight_spec(&spec)?;
            let n_max = n_max.unwrap_or(match v.domain {
                Domain::Plane => 512,
                Domain::Disc => 256,
            });
            let companion = match (op, &w) {
                (Some(op), Some(w_spec)) => {
                    let w = resolve_companion(w_spec, &v)?;
                    Some((op, w_spec.clone(), w))
                }
                (None, None) => None,
                _ => {
                    return Err(CliError::Usage(
                        "--op and --w must be given together".into(),
                    ))
                }
            };
            let companion_ref = companion
                .as_ref()
                .map(|(op, spec, w)| (*op, spec.as_str(), w));
            let out = report::norms(&spec, &v, companion_ref, n_max, &grid)?;
            // the norms table doubles as a CSV artifact
            if let Some(dir) = &common.out {
                let table = out.document.norms.as_ref().expect("norms command");
                write_file(&dir.join("norms.csv"), &report::norms_to_csv(table))?;
            }
            emit(&out, &common)?;
            if !common.json {
                summarize_norms(&out);
            }
            Ok(0)
        }
    }
}

fn build_bundle(
    which: &str,
    a: Option<String>,
    b: Option<String>,
    eps: Option<String>,
    n_max: Option<u32>,
) -> Result<CounterexampleBundle, CliError> {
    let seq_override = |text: &Option<String>| -> Result<Option<SequenceExpr>, CliError> {
        text.as_deref()
            .map(SequenceExpr::parse)
            .transpose()
            .map_err(CliError::from)
    };
    let a_expr = seq_override(&a)?;
    let b_expr = seq_override(&b)?;
    let eps_expr = seq_override(&eps)?;
    match which {
        "ex1" => {
            let n = n_max.unwrap_or(30);
            let seq = match (&a_expr, &b_expr) {
                (None, None) => default_disc_sequences(n),
                _ => custom_pair(&a_expr, &b_expr, default_disc_sequences(n), n),
            };
            Ok(build_example_d_disc(&seq)?)
        }
        "ex2" => {
            let n = n_max.unwrap_or(12);
            let seq = match (&a_expr, &b_expr) {
                (None, None) => default_plane_sequences(n),
                _ => custom_pair(&a_expr, &b_expr, default_plane_sequences(n), n),
            };
            Ok(build_example_d_plane(&seq)?)
        }
        "ex3" => {
            let n = n_max.unwrap_or(30);
            let widths = match &eps_expr {
                None => default_notch_widths(n),
                Some(expr) => (1..=n).map(|k| expr.eval(k)).collect(),
            };
            Ok(build_example_i_plane(&widths)?)
        }
        other => Err(CliError::Usage(format!(
            "unknown counterexample `{other}`; expected ex1, ex2 or ex3"
        ))),
    }
}

fn custom_pair(
    a: &Option<SequenceExpr>,
    b: &Option<SequenceExpr>,
    defaults: SequencePair,
    n_max: u32,
) -> SequencePair {
    let a_of = |n: u32| match a {
        Some(expr) => expr.eval(n),
        None => defaults.a[(n - 1) as usize],
    };
    let b_of = |n: u32| match b {
        Some(expr) => expr.eval(n),
        None => defaults.b[(n - 1) as usize],
    };
    SequencePair::tabulate(a_of, b_of, n_max)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| CliError::Io {
            path: parent.display().to_string(),
            reason: e.to_string(),
        })?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

/// Write the JSON (stdout and/or report.json) and the CSV traces.
fn emit(out: &AnalysisOutput, common: &CommonOpts) -> Result<(), CliError> {
    if common.csv && common.out.is_none() {
        return Err(CliError::Usage("--csv needs --out <dir>".into()));
    }
    let json = report::to_deterministic_json(&out.document);
    if common.json {
        print!("{json}");
    }
    if let Some(dir) = &common.out {
        write_file(&dir.join("report.json"), &json)?;
        if common.csv {
            for (stem, trace) in &out.traces {
                let name = format!("{}.csv", stem.replace(['/', ' '], "_"));
                write_file(&dir.join(name), &report::trace_to_csv(trace))?;
            }
        }
    }
    Ok(())
}

fn summarize_analyze(out: &AnalysisOutput) {
    let doc = &out.document;
    let input = &doc.inputs[0];
    println!("weight {} on the {}", input.label, input.domain);
    for entry in &doc.weight_classes {
        let mut classes = Vec::new();
        if entry.log_convex {
            classes.push("log-convex".to_string());
        }
        if entry.moderate_growth {
            classes.push("moderate-growth".to_string());
        }
        if entry.rapidly_growing {
            classes.push("rapidly-growing".to_string());
        }
        if entry.h_weight {
            classes.push("h-class".to_string());
        }
        if entry.ck_weight {
            classes.push("ck-class".to_string());
        }
        if entry.bbt_weight {
            classes.push("bbt-class".to_string());
        }
        if entry.is_regular {
            match entry.regular_limit {
                Some(l) => classes.push(format!("regular(L={l:.6})")),
                None => classes.push("regular(L=inf)".to_string()),
            }
        }
        println!("  classes: {}", if classes.is_empty() { "none".into() } else { classes.join(", ") });
        println!("  maximizer coverage: {:?}", entry.hl_condition);
    }
    for cond in &doc.conditions {
        let value = cond
            .value
            .map(|v| format!(" value={v:.6e}"))
            .unwrap_or_default();
        println!("  [{:?}] {}: {}{}", cond.verdict, cond.id, cond.description, value);
    }
}

fn summarize_norms(out: &AnalysisOutput) {
    let doc = &out.document;
    let table = doc.norms.as_ref().expect("norms command");
    println!(
        "monomial norms for {} up to n = {}",
        doc.inputs[0].label, table.n_max
    );
    let show: Vec<usize> = [0usize, 1, 2, 5, 10, 50, 100, 256, 512]
        .into_iter()
        .filter(|&n| n <= table.n_max)
        .collect();
    for n in show {
        println!(
            "  A_{n} = {:.9} at x = {:.6}{}",
            table.a[n],
            table.x_arg[n],
            if table.grid_limited[n] { " (grid-limited)" } else { "" }
        );
    }
    if let Some(ratio) = &doc.ratio_trend {
        if let Some(trend) = &ratio.trend {
            println!("  image-ratio trend: {:?}", trend.trend);
        }
        if let Some(lb) = ratio.log_norm_lower_bound() {
            println!("  operator norm >= {:.6e}", lb.exp());
        }
    }
}

fn summarize_counterexample(out: &AnalysisOutput) {
    let doc = &out.document;
    let summary = doc.counterexample.as_ref().expect("counterexample command");
    println!("{} (n_max = {})", summary.kind, summary.n_max);
    if let Some(l) = summary.l {
        println!("  tail-ratio limit L = {l:.9}");
    }
    if let Some(m) = summary.total_step_sum {
        println!("  total step sum M = {m:.12}");
    }
    if let Some(lim) = summary.minorant_limit {
        println!("  designed minorant limit 2(L+1) = {lim:.9}");
    }
    if let Some(c) = summary.sandwich_constant {
        println!("  sandwich constant C = {c:.12}");
    }
    for cond in &doc.conditions {
        println!("  [{:?}] {}: {}", cond.verdict, cond.id, cond.description);
    }
    if let Some(v) = &doc.verdict {
        println!(
            "  engine: {} on ({}, {}) -> {:?} [{}]",
            v.operator, v.pair.0, v.pair.1, v.verdict, v.justification_id
        );
    }
}
