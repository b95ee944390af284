//! The designed counterexample weights, built from parameter sequences.
//!
//! Three constructions share a pattern: a piecewise log-profile whose raw
//! slopes oscillate (so a derivative condition fails), while its largest
//! convex minorant is tame (so the operator is in fact bounded on the same
//! space). Each bundle carries the raw weight, the minorant weight, the
//! derived constants, and the per-segment traces that exhibit the designed
//! gap between the two.

use crate::criteria::{
    estimate_from_windows, ConditionReport, CriteriaError, ExtremalKind, Trace, Trend, Verdict,
    Window,
};
use crate::numerics::{boundary_coord_from_x, LN_2};
use crate::weight::{Domain, GridSpec, RadialWeight, WeightError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CounterexampleError {
    #[error("sequence property ({property}) fails at n = {index}: {detail}")]
    SequencePropertyViolation {
        index: usize,
        property: &'static str,
        detail: String,
    },
    #[error("cannot parse sequence expression `{0}`: {1}")]
    ExpressionParse(String, String),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
}

fn violation(
    index: usize,
    property: &'static str,
    detail: String,
) -> CounterexampleError {
    CounterexampleError::SequencePropertyViolation { index, property, detail }
}

/// A pair of positive sequences (a_n), (b_n), tabulated for n = 1..=n_max.
#[derive(Debug, Clone)]
pub struct SequencePair {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl SequencePair {
    pub fn tabulate(a: impl Fn(u32) -> f64, b: impl Fn(u32) -> f64, n_max: u32) -> Self {
        SequencePair {
            a: (1..=n_max).map(&a).collect(),
            b: (1..=n_max).map(&b).collect(),
        }
    }

    pub fn n_max(&self) -> usize {
        self.a.len()
    }

    fn check_positive(&self) -> Result<(), CounterexampleError> {
        for n in 1..=self.n_max() {
            let (a, b) = (self.a[n - 1], self.b[n - 1]);
            if !a.is_finite() || a <= 0.0 {
                return Err(violation(n, "positivity", format!("a_{n} = {a}")));
            }
            if !b.is_finite() || b <= 0.0 {
                return Err(violation(n, "positivity", format!("b_{n} = {b}")));
            }
        }
        Ok(())
    }

    /// a_n < b_n for n >= 2 (property 2 of both constructions).
    fn check_interlacing(&self) -> Result<(), CounterexampleError> {
        for n in 2..=self.n_max() {
            if self.a[n - 1] >= self.b[n - 1] {
                return Err(violation(
                    n,
                    "2: a_n < b_n",
                    format!("a_{n} = {} >= b_{n} = {}", self.a[n - 1], self.b[n - 1]),
                ));
            }
        }
        Ok(())
    }

    /// a_n + b_n decreasing to 0 (property 3 of both constructions).
    fn check_step_decay(&self) -> Result<(), CounterexampleError> {
        let c: Vec<f64> = self.steps();
        for n in 1..c.len() {
            if c[n] > c[n - 1] * (1.0 + 1e-12) {
                return Err(violation(
                    n + 1,
                    "3: a_n + b_n decreasing",
                    format!("step grows from {} to {}", c[n - 1], c[n]),
                ));
            }
        }
        let last = *c.last().unwrap();
        if last > 0.5 * c[0] {
            return Err(violation(
                c.len(),
                "3: a_n + b_n -> 0",
                format!("final step {last} has not decayed (first step {})", c[0]),
            ));
        }
        Ok(())
    }

    fn steps(&self) -> Vec<f64> {
        self.a.iter().zip(&self.b).map(|(a, b)| a + b).collect()
    }
}

/// Default disc sequences a_n = 3^-n, b_n = 2^-n - 3^-n.
pub fn default_disc_sequences(n_max: u32) -> SequencePair {
    SequencePair::tabulate(
        |n| 3f64.powi(-(n as i32)),
        |n| 2f64.powi(-(n as i32)) - 3f64.powi(-(n as i32)),
        n_max,
    )
}

/// Default plane sequences a_n = 3^-n, b_n = log(1 + 1/n) - 3^-n.
pub fn default_plane_sequences(n_max: u32) -> SequencePair {
    SequencePair::tabulate(
        |n| 3f64.powi(-(n as i32)),
        |n| (1.0 / n as f64).ln_1p() - 3f64.powi(-(n as i32)),
        n_max,
    )
}

/// Default notch widths eps_k = e^{-2k}.
pub fn default_notch_widths(n_max: u32) -> Vec<f64> {
    (1..=n_max).map(|k| (-2.0 * k as f64).exp()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleKind {
    DiscDifferentiation,
    PlaneDifferentiation,
    PlaneIntegration,
}

/// A constructed counterexample: the raw weight, its minorant companion,
/// the derived constants, and the segment data for the designed traces.
#[derive(Debug, Clone)]
pub struct CounterexampleBundle {
    pub kind: ExampleKind,
    pub v: RadialWeight,
    pub v_bar: RadialWeight,
    /// Grid matched to the construction's support (asymptotics manifest
    /// before the truncation point; sampling past it would dilute them).
    pub grid: GridSpec,
    /// Tail-ratio limit L of the step sequences (disc/plane constructions).
    pub l: Option<f64>,
    /// Total step sum M (disc construction).
    pub total: Option<f64>,
    /// Designed limit 2(L+1) of the minorant boundary-derivative maxima.
    pub minorant_limit: Option<f64>,
    /// Accumulated notch defect C (plane integration construction).
    pub sandwich_constant: Option<f64>,
    /// (x = S_n, phi_bar(S_n)) anchor points of the closed-form minorant.
    pub anchors: Vec<(f64, f64)>,
    // segment data behind the designed traces
    s: Vec<f64>, // S_0..=S_n_max
    a: Vec<f64>,
    b: Vec<f64>,
    eps: Vec<f64>,
}

/// Tail-ratio limit of property (5) for the disc construction: the ratio of
/// the remaining step mass to the current step must stabilize.
fn tail_ratio_limit(steps: &[f64], tails: &[f64]) -> Result<f64, CounterexampleError> {
    let n = steps.len();
    let k = 5.min(n);
    let ratios: Vec<f64> = (n - k..n).map(|i| tails[i] / steps[i]).collect();
    let m = ratios.iter().sum::<f64>() / k as f64;
    if !m.is_finite() || m <= 0.0 {
        return Err(violation(n, "5: tail ratio in (0, inf)", format!("ratio = {m}")));
    }
    for (i, r) in ratios.iter().enumerate() {
        if (r - m).abs() > 0.05 * m {
            return Err(violation(
                n - k + i + 1,
                "5: tail ratio stabilizes",
                format!("ratio {r} departs from the window mean {m}"),
            ));
        }
    }
    Ok(m)
}

/// Sawtooth profile breakpoints shared by the two differentiation
/// constructions: the flat head, then per segment the steep a-kink and the
/// b-kink, with values 2n-1 and 2n.
fn sawtooth_breakpoints(s: &[f64], a: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n_max = a.len();
    let mut xs = Vec::with_capacity(2 * n_max);
    let mut phis = Vec::with_capacity(2 * n_max);
    // head: phi = 1 up to S_0 + a_1, then slope 1/b_1 into (S_1, 2)
    xs.push(s[0] + a[0]);
    phis.push(1.0);
    xs.push(s[1]);
    phis.push(2.0);
    for n in 2..=n_max {
        xs.push(s[n - 1] + a[n - 1]);
        phis.push(2.0 * n as f64 - 1.0);
        xs.push(s[n]);
        phis.push(2.0 * n as f64);
    }
    (xs, phis)
}

/// Closed-form largest convex minorant of the sawtooth: flat at 1 up to
/// S_1 - b_1 = S_0 + a_1, then the chords through (S_n, 2n). (The n = 1
/// piece follows the profile's own b_1-segment; a chord from (S_0, 0) would
/// overshoot the flat head whenever a_1 > b_1.)
fn sawtooth_minorant(s: &[f64], b1: f64) -> (Vec<f64>, Vec<f64>) {
    let n_max = s.len() - 1;
    let mut xs = Vec::with_capacity(n_max + 1);
    let mut phis = Vec::with_capacity(n_max + 1);
    xs.push(s[1] - b1);
    phis.push(1.0);
    for (n, &sn) in s.iter().enumerate().skip(1).take(n_max) {
        xs.push(sn);
        phis.push(2.0 * n as f64);
    }
    (xs, phis)
}

/// The sawtooth weight for the disc: S_n = -(sum of the remaining steps),
/// increasing to 0. Properties (1)-(5) are verified up to n_max.
pub fn build_example_d_disc(
    seq: &SequencePair,
) -> Result<CounterexampleBundle, CounterexampleError> {
    seq.check_positive()?;
    seq.check_interlacing()?;
    seq.check_step_decay()?;
    let n_max = seq.n_max();
    let steps = seq.steps();

    // property (1): the step sum converges; certify with a geometric tail
    let ratios: Vec<f64> = (1..n_max).map(|i| steps[i] / steps[i - 1]).collect();
    let q = ratios[n_max.saturating_sub(6)..]
        .iter()
        .copied()
        .fold(0f64, f64::max);
    if q >= 0.95 {
        return Err(violation(
            n_max,
            "1: sum of steps converges",
            format!("late step ratios reach {q}; no convergent tail certified"),
        ));
    }
    let geometric = ratios[n_max.saturating_sub(10)..]
        .windows(2)
        .all(|ab| (ab[0] - ab[1]).abs() < 1e-9);
    let remainder = steps[n_max - 1] * q / (1.0 - q);

    // tails[i] = sum of steps after index i, plus the certified remainder
    let mut tails = vec![0.0; n_max];
    let mut acc = remainder;
    for (tail, &step) in tails.iter_mut().zip(&steps).rev() {
        *tail = acc;
        acc += step;
    }
    let total = acc; // full sum including remainder

    // property (4): a_n/b_n -> 0
    let ab_last = seq.a[n_max - 1] / seq.b[n_max - 1];
    if ab_last > 0.01 {
        return Err(violation(
            n_max,
            "4: a_n/b_n -> 0",
            format!("final ratio {ab_last} has not decayed"),
        ));
    }
    let l = tail_ratio_limit(&steps, &tails)?;

    // S_0..S_nmax; S_n = -(remaining mass after n steps)
    let mut s = Vec::with_capacity(n_max + 1);
    s.push(-total);
    s.extend(tails.iter().map(|t| -t));

    let (xs, phis) = sawtooth_breakpoints(&s, &seq.a);
    let v = RadialWeight::piecewise(xs, phis, Domain::Disc, "example-d-disc")?;
    let (mxs, mphis) = sawtooth_minorant(&s, seq.b[0]);
    let anchors: Vec<(f64, f64)> = (1..=n_max).map(|n| (s[n], 2.0 * n as f64)).collect();
    let v_bar = RadialWeight::piecewise(mxs, mphis, Domain::Disc, "example-d-disc-minorant")?;

    let depth = (boundary_coord_from_x(s[n_max]) / LN_2).floor() as u32;
    let grid = GridSpec::new(depth.clamp(8, 48), 8)?;

    Ok(CounterexampleBundle {
        kind: ExampleKind::DiscDifferentiation,
        v,
        v_bar,
        grid,
        l: Some(l),
        total: Some(total),
        minorant_limit: Some(2.0 * (l + 1.0)),
        sandwich_constant: None,
        anchors,
        s,
        a: seq.a.clone(),
        b: seq.b.clone(),
        eps: Vec::new(),
    })
    .inspect(|_| {
        debug_assert!(geometric || remainder > 0.0);
    })
}

/// The sawtooth weight for the plane: S_n = sum of the first n steps,
/// diverging, with the exponentially-weighted properties (4) and (5).
pub fn build_example_d_plane(
    seq: &SequencePair,
) -> Result<CounterexampleBundle, CounterexampleError> {
    seq.check_positive()?;
    seq.check_interlacing()?;
    seq.check_step_decay()?;
    let n_max = seq.n_max();
    let steps = seq.steps();

    let mut s = Vec::with_capacity(n_max + 1);
    s.push(0.0);
    let mut acc = 0.0;
    for &c in &steps {
        acc += c;
        s.push(acc);
    }

    // property (1): the step sum diverges (keeps growing along the tail)
    if s[n_max] - s[n_max - 5.min(n_max - 1)] < 1e-3 {
        return Err(violation(
            n_max,
            "1: sum of steps diverges",
            "partial sums have stabilized; this construction needs divergence".into(),
        ));
    }
    // property (4): a_n e^{S_{n-1}} -> 0
    let p4: Vec<f64> = (1..=n_max).map(|n| seq.a[n - 1] * s[n - 1].exp()).collect();
    if *p4.last().unwrap() > 0.01 * p4[0].max(1e-300) && *p4.last().unwrap() > 1e-3 {
        return Err(violation(
            n_max,
            "4: a_n exp(S_{n-1}) -> 0",
            format!("final value {}", p4.last().unwrap()),
        ));
    }
    // property (5): (a_n+b_n) e^{S_{n-1}} -> L in (0, inf)
    let p5: Vec<f64> = (1..=n_max).map(|n| steps[n - 1] * s[n - 1].exp()).collect();
    let k = 5.min(n_max);
    let l = p5[n_max - k..].iter().sum::<f64>() / k as f64;
    if !l.is_finite() || l <= 0.0 {
        return Err(violation(n_max, "5: limit in (0, inf)", format!("estimate {l}")));
    }
    for (i, val) in p5[n_max - k..].iter().enumerate() {
        if (val - l).abs() > 0.05 * l {
            return Err(violation(
                n_max - k + i + 1,
                "5: (a_n+b_n) exp(S_{n-1}) stabilizes",
                format!("value {val} departs from the window mean {l}"),
            ));
        }
    }

    let (xs, phis) = sawtooth_breakpoints(&s, &seq.a);
    let v = RadialWeight::piecewise(xs, phis, Domain::Plane, "example-d-plane")?;
    let (mxs, mphis) = sawtooth_minorant(&s, seq.b[0]);
    let anchors: Vec<(f64, f64)> = (1..=n_max).map(|n| (s[n], 2.0 * n as f64)).collect();
    let v_bar = RadialWeight::piecewise(mxs, mphis, Domain::Plane, "example-d-plane-minorant")?;

    let depth = (((s[n_max] + 1.0) / LN_2).ceil() as u32).clamp(8, 48);
    let grid = GridSpec::new(depth, 8)?;

    Ok(CounterexampleBundle {
        kind: ExampleKind::PlaneDifferentiation,
        v,
        v_bar,
        grid,
        l: Some(l),
        total: None,
        minorant_limit: None,
        sandwich_constant: None,
        anchors,
        s,
        a: seq.a.clone(),
        b: seq.b.clone(),
        eps: Vec::new(),
    })
}

/// The notched entire weight: phi follows e^x except for a unit-slope notch
/// of width eps_k after each integer k, so liminf v'/v = 0 while v stays
/// within a fixed multiplicative band of e^r.
pub fn build_example_i_plane(eps: &[f64]) -> Result<CounterexampleBundle, CounterexampleError> {
    let n_max = eps.len();
    if n_max < 6 {
        return Err(violation(n_max, "length", "need at least 6 notch widths".into()));
    }
    for (i, &e) in eps.iter().enumerate() {
        if !e.is_finite() || e <= 0.0 || e >= 1.0 {
            return Err(violation(i + 1, "eps in (0,1)", format!("eps_{} = {e}", i + 1)));
        }
        if i > 0 && e > eps[i - 1] {
            return Err(violation(i + 1, "eps decreasing", format!("eps grows to {e}")));
        }
    }
    // defects Delta_k = e^k (e^{eps_k} - 1) - eps_k, summed to the constant C
    let mut delta_prefix = Vec::with_capacity(n_max + 1);
    delta_prefix.push(0.0);
    let mut c_partials = Vec::with_capacity(n_max);
    for (i, &e) in eps.iter().enumerate() {
        let k = (i + 1) as f64;
        let delta = k.exp() * e.exp_m1() - e;
        if !delta.is_finite() {
            return Err(violation(i + 1, "sum of defects converges", "defect overflows".into()));
        }
        delta_prefix.push(delta_prefix[i] + delta);
        c_partials.push(delta_prefix[i + 1]);
    }
    let c = *c_partials.last().unwrap();
    // the defect sum must have stabilized well before the truncation
    let drift = c - c_partials[n_max - 5.min(n_max - 1)];
    if drift > 1e-9 * c.max(1e-300) {
        return Err(violation(
            n_max,
            "sum e^k (e^{eps_k} - 1) converges",
            format!("defect sum still moves by {drift:.3e} over the last window"),
        ));
    }

    // truncate the constructed notches where they stay representable: past
    // n + eps_n == n in floating point there is nothing left to encode
    let n_repr = (1..=n_max)
        .take_while(|&n| n as f64 + eps[n - 1] > n as f64)
        .count()
        .max(6);
    let v = RadialWeight::notched_exp_plane(
        eps[..n_repr].to_vec(),
        delta_prefix[..=n_repr].to_vec(),
        "example-i-plane",
    )?;
    let v_bar = RadialWeight::make_builtin("exp_plane", &[1.0], Domain::Plane)?;

    let depth = (((n_repr as f64 - 0.5) / LN_2).floor() as u32).clamp(8, 48);
    let grid = GridSpec::new(depth, 8)?;

    Ok(CounterexampleBundle {
        kind: ExampleKind::PlaneIntegration,
        v,
        v_bar,
        grid,
        l: None,
        total: None,
        minorant_limit: None,
        sandwich_constant: Some(c),
        anchors: Vec::new(),
        s: Vec::new(),
        a: Vec::new(),
        b: Vec::new(),
        eps: eps.to_vec(),
    })
}

impl CounterexampleBundle {
    /// Truncation depth of the construction.
    pub fn n_max(&self) -> usize {
        if self.eps.is_empty() {
            self.a.len()
        } else {
            self.eps.len()
        }
    }

    /// Per-segment windows (in r) of the construction.
    fn segment_window(&self, n: usize) -> (f64, f64) {
        (self.s[n - 1].exp(), self.s[n].exp())
    }

    /// The designed-gap reports: construction-aware traces evaluated on the
    /// segments themselves, where the oscillation lives.
    pub fn designed_reports(&self) -> Result<Vec<ConditionReport>, CriteriaError> {
        match self.kind {
            ExampleKind::DiscDifferentiation => self.disc_d_reports(),
            ExampleKind::PlaneDifferentiation => self.plane_d_reports(),
            ExampleKind::PlaneIntegration => self.plane_i_reports(),
        }
    }

    fn disc_d_reports(&self) -> Result<Vec<ConditionReport>, CriteriaError> {
        let n_max = self.a.len();
        // minorant: per-segment max of (1-r) vbar'/vbar is
        // slope_n (e^{-S_{n-1}} - 1), tending to 2(L+1)
        let mut minorant_windows = Vec::new();
        for n in 2..=n_max {
            let slope = 2.0 / (self.a[n - 1] + self.b[n - 1]);
            let value = slope * (-self.s[n - 1]).exp_m1();
            let (r_lo, r_hi) = self.segment_window(n);
            minorant_windows.push(Window { r_lo, r_hi, value });
        }
        let minorant_values: Vec<f64> = minorant_windows.iter().map(|w| w.value).collect();
        let est = estimate_from_windows(minorant_windows, ExtremalKind::Limsup)?;
        let mut minorant_report = ConditionReport {
            id: "example-d-disc.minorant-limit".into(),
            description: "per-segment maxima of (1-r) vbar'/vbar approach 2(L+1)".into(),
            verdict: match est.trend {
                Trend::ConvergesTo(_) => Verdict::Holds,
                Trend::Oscillating => Verdict::Inconclusive,
                _ => Verdict::Fails,
            },
            value: est.limit_value(),
            estimate: Some(est),
            detail: format!("designed limit 2(L+1) = {}", self.minorant_limit.unwrap()),
            trace: Some(Trace {
                xs: (2..=n_max).map(|n| self.s[n - 1]).collect(),
                values: minorant_values,
            }),
        };
        if let Some(val) = minorant_report.value {
            let target = self.minorant_limit.unwrap();
            if (val - target).abs() > 0.05 * target {
                minorant_report.verdict = Verdict::Inconclusive;
                minorant_report.detail =
                    format!("windowed limit {val} is more than 5% from 2(L+1) = {target}");
            }
        }

        // raw weight: at the midpoint of each steep sub-segment the value of
        // (1-r) v'/v is at least b_n/a_n, which explodes
        let mut raw_windows = Vec::new();
        for n in 2..=n_max {
            let x = self.s[n - 1] + 0.5 * self.a[n - 1];
            let value = (-x).exp_m1() / self.a[n - 1];
            let (r_lo, r_hi) = self.segment_window(n);
            raw_windows.push(Window { r_lo, r_hi, value });
        }
        let raw_values: Vec<f64> = raw_windows.iter().map(|w| w.value).collect();
        let est = estimate_from_windows(raw_windows, ExtremalKind::Limsup)?;
        let raw_report = ConditionReport {
            id: "example-d-disc.raw-divergence".into(),
            description: "(1-r) v'/v sampled inside the steep sub-segments diverges".into(),
            verdict: if est.trend == Trend::DivergesToInfinity {
                Verdict::Holds
            } else {
                Verdict::Fails
            },
            value: None,
            estimate: Some(est),
            detail: "each sample is bounded below by b_n/a_n".into(),
            trace: Some(Trace {
                xs: (2..=n_max).map(|n| self.s[n - 1] + 0.5 * self.a[n - 1]).collect(),
                values: raw_values,
            }),
        };
        Ok(vec![minorant_report, raw_report])
    }

    fn plane_d_reports(&self) -> Result<Vec<ConditionReport>, CriteriaError> {
        let n_max = self.a.len();
        // raw v'/v peaks on the steep sub-segments: e^{-S_{n-1}}/a_n -> inf
        let mut peak_windows = Vec::new();
        for n in 2..=n_max {
            let value = (-self.s[n - 1]).exp() / self.a[n - 1];
            let (r_lo, r_hi) = self.segment_window(n);
            peak_windows.push(Window { r_lo, r_hi, value });
        }
        let est = estimate_from_windows(peak_windows, ExtremalKind::Limsup)?;
        let peaks = ConditionReport {
            id: "example-d-plane.raw-derivative-peaks".into(),
            description: "v'/v on the steep sub-segments diverges".into(),
            verdict: if est.trend == Trend::DivergesToInfinity {
                Verdict::Holds
            } else {
                Verdict::Fails
            },
            value: None,
            estimate: Some(est),
            detail: "peak on segment n is e^{-S_{n-1}}/a_n".into(),
            trace: None,
        };

        // while the liminf of v'/v stays finite: at the segment ends the
        // slope is 1/b_n and v'/v = e^{-S_n}/b_n
        let mut floor_windows = Vec::new();
        for n in 2..=n_max {
            let value = (-self.s[n]).exp() / self.b[n - 1];
            let (r_lo, r_hi) = self.segment_window(n);
            floor_windows.push(Window { r_lo, r_hi, value });
        }
        let est = estimate_from_windows(floor_windows, ExtremalKind::Liminf)?;
        let floors = ConditionReport {
            id: "example-d-plane.raw-derivative-floor".into(),
            description: "v'/v along the shallow sub-segments stays bounded".into(),
            verdict: match est.trend {
                Trend::ConvergesTo(_) => Verdict::Holds,
                _ => Verdict::Inconclusive,
            },
            value: est.limit_value(),
            estimate: Some(est),
            detail: "the same derivative whose peaks diverge has finite liminf".into(),
            trace: None,
        };

        // log v outgrows x: phi(S_n)/S_n = 2n/S_n -> inf
        let mut growth_windows = Vec::new();
        for n in 2..=n_max {
            let value = 2.0 * n as f64 / self.s[n];
            let (r_lo, r_hi) = self.segment_window(n);
            growth_windows.push(Window { r_lo, r_hi, value });
        }
        let est = estimate_from_windows(growth_windows, ExtremalKind::Limsup)?;
        let growth = ConditionReport {
            id: "example-d-plane.log-growth".into(),
            description: "log v(e^t) grows faster than t (a valid entire weight)".into(),
            verdict: if est.trend == Trend::DivergesToInfinity {
                Verdict::Holds
            } else {
                Verdict::Fails
            },
            value: None,
            estimate: Some(est),
            detail: String::new(),
            trace: None,
        };

        // yet the minorant satisfies log vbar(r) = O(r):
        // phibar(S_n)/e^{S_n} = 2n e^{-S_n} stays bounded
        let mut ratio_windows = Vec::new();
        for n in 2..=n_max {
            let value = 2.0 * n as f64 * (-self.s[n]).exp();
            let (r_lo, r_hi) = self.segment_window(n);
            ratio_windows.push(Window { r_lo, r_hi, value });
        }
        let est = estimate_from_windows(ratio_windows, ExtremalKind::Limsup)?;
        let ratio = ConditionReport {
            id: "example-d-plane.minorant-log-over-r".into(),
            description: "log vbar(r)/r stays bounded, so D is bounded on the vbar-space".into(),
            verdict: match est.trend {
                Trend::ConvergesTo(_) | Trend::DecaysToZero => Verdict::Holds,
                Trend::DivergesToInfinity => Verdict::Fails,
                Trend::Oscillating => Verdict::Inconclusive,
            },
            value: est.limit_value(),
            estimate: Some(est),
            detail: "evaluated at the segment ends; the designed limit is 2/L".into(),
            trace: None,
        };
        Ok(vec![peaks, floors, growth, ratio])
    }

    fn plane_i_reports(&self) -> Result<Vec<ConditionReport>, CriteriaError> {
        let n_max = self.eps.len();
        // on the notches v'/v = e^{-x} with x = n + eps_n/2 -> 0
        let mut windows = Vec::new();
        for n in 1..=n_max {
            let x = n as f64 + 0.5 * self.eps[n - 1];
            windows.push(Window {
                r_lo: (n as f64).exp(),
                r_hi: (n as f64 + 1.0).exp(),
                value: (-x).exp(),
            });
        }
        let values: Vec<f64> = windows.iter().map(|w| w.value).collect();
        let est = estimate_from_windows(windows, ExtremalKind::Liminf)?;
        let liminf = ConditionReport {
            id: "example-i-plane.derivative-liminf".into(),
            description: "v'/v along the notch midpoints decays to zero".into(),
            verdict: if est.trend == Trend::DecaysToZero {
                Verdict::Holds
            } else {
                Verdict::Fails
            },
            value: est.limit_value(),
            estimate: Some(est),
            detail: "the notch at x = n has unit slope, so v'/v = e^{-x} there".into(),
            trace: Some(Trace {
                xs: (1..=n_max).map(|n| n as f64 + 0.5 * self.eps[n - 1]).collect(),
                values,
            }),
        };

        // the sandwich e^x - C <= phi(x) <= e^x on the bundle grid
        let c = self.sandwich_constant.unwrap();
        let xs = self.grid.xs(Domain::Plane);
        let mut max_gap = 0f64;
        let mut ok = true;
        for &x in &xs {
            let gap = x.exp() - self.v.phi(x);
            if !(-1e-9..=c + 1e-9).contains(&gap) {
                ok = false;
            }
            max_gap = max_gap.max(gap.abs());
        }
        let sandwich = ConditionReport {
            id: "example-i-plane.sandwich".into(),
            description: "e^x - C <= log v(e^x) <= e^x on the grid".into(),
            verdict: if ok { Verdict::Holds } else { Verdict::Fails },
            value: Some(max_gap),
            estimate: None,
            detail: format!("C = {c:.12e}; largest observed gap {max_gap:.6e}"),
            trace: None,
        };
        Ok(vec![liminf, sandwich])
    }
}

/// Minimal sequence-expression language for the CLI: a sum of signed terms,
/// each a constant, `B^-Cn` (B a number or `e`), or `log(1+1/n)`.
#[derive(Debug, Clone)]
pub struct SequenceExpr {
    terms: Vec<(f64, Term)>,
    source: String,
}

#[derive(Debug, Clone)]
enum Term {
    Constant(f64),
    /// base^(coeff * n)
    Power { base: f64, coeff: f64 },
    LogOnePlusInv,
}

impl SequenceExpr {
    pub fn parse(text: &str) -> Result<Self, CounterexampleError> {
        let err = |reason: &str| {
            CounterexampleError::ExpressionParse(text.to_string(), reason.to_string())
        };
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(err("empty expression"));
        }
        let mut terms = Vec::new();
        let mut rest = compact.as_str();
        let mut sign = 1.0;
        if let Some(r) = rest.strip_prefix('-') {
            sign = -1.0;
            rest = r;
        } else if let Some(r) = rest.strip_prefix('+') {
            rest = r;
        }
        while !rest.is_empty() {
            // a term extends to the next top-level +/- ; a sign right after
            // `^` belongs to the exponent, and the log token owns its
            // parentheses (nothing else nests)
            let end = if let Some(stripped) = rest.strip_prefix("log(1+1/n)") {
                rest.len() - stripped.len()
            } else {
                let bytes = rest.as_bytes();
                (1..bytes.len())
                    .find(|&i| {
                        (bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'^'
                    })
                    .unwrap_or(rest.len())
            };
            let (tok, tail) = rest.split_at(end);
            let term = Self::parse_term(tok).map_err(|e| err(&e))?;
            terms.push((sign, term));
            rest = tail;
            if let Some(r) = rest.strip_prefix('-') {
                sign = -1.0;
                rest = r;
            } else if let Some(r) = rest.strip_prefix('+') {
                sign = 1.0;
                rest = r;
            } else if !rest.is_empty() {
                return Err(err(&format!("unexpected `{rest}`")));
            } else {
                break;
            }
            if rest.is_empty() {
                return Err(err("dangling sign"));
            }
        }
        Ok(SequenceExpr { terms, source: text.to_string() })
    }

    fn parse_term(tok: &str) -> Result<Term, String> {
        if tok == "log(1+1/n)" {
            return Ok(Term::LogOnePlusInv);
        }
        if let Some((base_str, exp_str)) = tok.split_once('^') {
            let base = if base_str == "e" {
                std::f64::consts::E
            } else {
                base_str
                    .parse::<f64>()
                    .map_err(|_| format!("bad base `{base_str}`"))?
            };
            if base <= 0.0 {
                return Err(format!("base must be positive, got {base}"));
            }
            let exp_str = exp_str.trim();
            let (coeff_sign, body) = match exp_str.strip_prefix('-') {
                Some(b) => (-1.0, b),
                None => (1.0, exp_str),
            };
            if let Some(coeff_str) = body.strip_suffix('n') {
                let coeff = if coeff_str.is_empty() {
                    1.0
                } else {
                    coeff_str
                        .parse::<f64>()
                        .map_err(|_| format!("bad exponent `{exp_str}`"))?
                };
                return Ok(Term::Power { base, coeff: coeff_sign * coeff });
            }
            let fixed = body
                .parse::<f64>()
                .map_err(|_| format!("bad exponent `{exp_str}`"))?;
            return Ok(Term::Constant(base.powf(coeff_sign * fixed)));
        }
        tok.parse::<f64>()
            .map(Term::Constant)
            .map_err(|_| format!("cannot parse term `{tok}`"))
    }

    pub fn eval(&self, n: u32) -> f64 {
        self.terms
            .iter()
            .map(|(sign, term)| {
                sign * match term {
                    Term::Constant(c) => *c,
                    Term::Power { base, coeff } => base.powf(coeff * n as f64),
                    Term::LogOnePlusInv => (1.0 / n as f64).ln_1p(),
                }
            })
            .sum()
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}
