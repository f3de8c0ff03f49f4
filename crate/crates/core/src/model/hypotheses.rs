use serde::{Deserialize, Serialize};

use super::kirchhoff::KirchhoffSpec;
use super::nonlinearity::Nonlinearity;
use super::params::ModelParams;
use crate::error::{Error, Result};

/// Smallest sample count accepted by [`check_hypotheses`].
pub const MIN_SAMPLES: usize = 100;

/// Relative slack for sampled monotonicity and inequality checks.
pub const CHECK_RTOL: f64 = 1e-12;

const T_MIN: f64 = 1e-6;
const KIRCHHOFF_T_MAX: f64 = 1e4;
const NONLINEAR_T_CAP: f64 = 1e3;
const PAIR_GRID: usize = 40;
const SMALL_T_PAIRS: usize = 10;

/// Outcome of one sampled hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub description: String,
    pub passed: bool,
    pub samples: usize,
    /// Smallest relative margin observed; negative means violated.
    pub worst_margin: f64,
    /// Sample point(s) attaining `worst_margin`.
    pub witness: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Tracker {
    name: &'static str,
    description: &'static str,
    samples: usize,
    worst: f64,
    witness: Vec<f64>,
    threshold: f64,
}

impl Tracker {
    fn new(name: &'static str, description: &'static str) -> Self {
        Tracker {
            name,
            description,
            samples: 0,
            worst: f64::INFINITY,
            witness: Vec::new(),
            threshold: -CHECK_RTOL,
        }
    }

    fn strict(mut self) -> Self {
        self.threshold = 0.0;
        self
    }

    fn record(&mut self, margin: f64, witness: &[f64]) {
        self.samples += 1;
        if margin < self.worst || margin.is_nan() {
            self.worst = margin;
            self.witness = witness.to_vec();
        }
    }

    /// Records `lhs <= rhs` as the relative margin `(rhs - lhs) / scale`.
    fn leq(&mut self, lhs: f64, rhs: f64, witness: &[f64]) {
        let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        self.record((rhs - lhs) / scale, witness);
    }

    fn finish(self) -> HypothesisCheck {
        let passed = self.samples > 0 && self.worst >= self.threshold;
        HypothesisCheck {
            name: self.name.into(),
            description: self.description.into(),
            passed,
            samples: self.samples,
            worst_margin: self.worst,
            witness: self.witness,
        }
    }
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn nondecreasing(tr: &mut Tracker, ts: &[f64], values: &[f64]) {
    for i in 1..ts.len() {
        tr.leq(values[i - 1], values[i], &[ts[i - 1], ts[i]]);
    }
}

/// Samples every structural hypothesis on `g` and `f` for the given
/// parameters, with `theta = p`.
pub fn check_hypotheses(params: &ModelParams, sample_count: usize) -> Result<HypothesisReport> {
    params.validate()?;
    let f = params.nonlinearity()?;
    check_hypotheses_with(
        &params.kirchhoff,
        &f,
        params.q,
        params.theta(),
        sample_count,
    )
}

/// As [`check_hypotheses`] for an arbitrary nonlinearity.
pub fn check_hypotheses_with(
    kirchhoff: &KirchhoffSpec,
    f: &dyn Nonlinearity,
    q: f64,
    theta: f64,
    sample_count: usize,
) -> Result<HypothesisReport> {
    if sample_count < MIN_SAMPLES {
        return Err(Error::Precondition(format!(
            "sample_count must be at least {MIN_SAMPLES}, got {sample_count}"
        )));
    }
    let mut checks = kirchhoff_checks(kirchhoff, sample_count);
    checks.extend(nonlinearity_checks(f, q, theta, sample_count)?);
    Ok(HypothesisReport { checks })
}

fn kirchhoff_checks(k: &KirchhoffSpec, n: usize) -> Vec<HypothesisCheck> {
    let ts = log_space(T_MIN, KIRCHHOFF_T_MAX, n);
    let g: Vec<f64> = ts.iter().map(|&t| k.g_unchecked(t)).collect();
    let big_g: Vec<f64> = ts.iter().map(|&t| k.primitive_unchecked(t)).collect();
    let g1 = k.g_unchecked(1.0);

    let mut inc = Tracker::new("g_increasing", "g nondecreasing with g(0) = g0 > 0");
    inc.record(k.g_unchecked(0.0) - k.g0(), &[0.0]);
    inc.record(if k.g0() > 0.0 { 1.0 } else { -1.0 }, &[0.0]);
    nondecreasing(&mut inc, &ts, &g);

    let mut ratio = Tracker::new("g_over_t_nonincreasing", "g(t)/t nonincreasing on t > 0");
    let gt: Vec<f64> = ts.iter().zip(&g).map(|(t, g)| -g / t).collect();
    nondecreasing(&mut ratio, &ts, &gt);

    let mut sup = Tracker::new("G_superadditive", "G(s + t) >= G(s) + G(t)");
    let pairs = log_space(T_MIN, KIRCHHOFF_T_MAX, PAIR_GRID);
    for &s in &pairs {
        for &t in &pairs {
            let lhs = k.primitive_unchecked(s) + k.primitive_unchecked(t);
            sup.leq(lhs, k.primitive_unchecked(s + t), &[s, t]);
        }
    }

    let mut lin = Tracker::new("g_linear_bound", "g(t) <= g(1) + g(1) t");
    let mut quad = Tracker::new("G_quadratic_bound", "G(t) <= g(1) t + g(1) t^2 / 2");
    for (i, &t) in ts.iter().enumerate() {
        lin.leq(g[i], g1 + g1 * t, &[t]);
        quad.leq(big_g[i], g1 * t + 0.5 * g1 * t * t, &[t]);
    }

    let mut h = Tracker::new(
        "h_nondecreasing_positive",
        "G(t)/2 - g(t) t / 4 nondecreasing and positive on t > 0",
    );
    let hv: Vec<f64> = (0..n)
        .map(|i| 0.5 * big_g[i] - 0.25 * g[i] * ts[i])
        .collect();
    nondecreasing(&mut h, &ts, &hv);
    for (i, &t) in ts.iter().enumerate() {
        h.record(if hv[i] > 0.0 { 1.0 } else { -1.0 }, &[t]);
    }

    vec![
        inc.finish(),
        ratio.finish(),
        sup.finish(),
        lin.finish(),
        quad.finish(),
        h.finish(),
    ]
}

fn nonlinearity_checks(
    f: &dyn Nonlinearity,
    q: f64,
    theta: f64,
    n: usize,
) -> Result<Vec<HypothesisCheck>> {
    let hi = (0.99 * f.t_max()).min(NONLINEAR_T_CAP);
    let ts = log_space(T_MIN, hi, n);
    let mut fv = Vec::with_capacity(n);
    let mut big_f = Vec::with_capacity(n);
    for &t in &ts {
        fv.push(f.f(t)?);
        big_f.push(f.F(t)?);
    }
    let cp = f.cp();
    let p = f.p();

    let mut odd = Tracker::new("f_odd", "f(-t) = -f(t) and F(-t) = F(t)");
    for (i, &t) in ts.iter().enumerate() {
        let exact = f.f(-t)? == -fv[i] && f.F(-t)? == big_f[i] && f.f(0.0)? == 0.0;
        odd.record(if exact { 0.0 } else { -1.0 }, &[t]);
    }

    let mut ar = Tracker::new("ambrosetti_rabinowitz", "0 < theta F(t) <= t f(t)");
    for (i, &t) in ts.iter().enumerate() {
        ar.leq(theta * big_f[i], t * fv[i], &[t]);
        ar.record(if big_f[i] > 0.0 { 1.0 } else { -1.0 }, &[t]);
    }

    let mut mono_q = Tracker::new(
        "f_over_t_q_increasing",
        "f(t)/|t|^{q-1} increasing on each half-line",
    );
    let pos: Vec<f64> = ts
        .iter()
        .zip(&fv)
        .map(|(t, f)| f / t.powf(q - 1.0))
        .collect();
    nondecreasing(&mut mono_q, &ts, &pos);
    let neg_ts: Vec<f64> = ts.iter().rev().map(|t| -t).collect();
    let mut neg = Vec::with_capacity(n);
    for &t in &neg_ts {
        neg.push(f.f(t)? / t.abs().powf(q - 1.0));
    }
    nondecreasing(&mut mono_q, &neg_ts, &neg);

    // |f(t)/t| ~ c t^k near zero with k > 0
    let mut origin = Tracker::new("f_over_t_vanishes_at_zero", "f(t)/t -> 0 as t -> 0").strict();
    for i in 1..=SMALL_T_PAIRS.min(n - 1) {
        let (a, b) = (ts[i - 1], ts[i]);
        let slope = ((fv[i] / b).abs().ln() - (fv[i - 1] / a).abs().ln()) / (b / a).ln();
        origin.record(
            if slope > 0.0 {
                slope
            } else {
                slope.min(-f64::EPSILON)
            },
            &[a, b],
        );
    }

    let mut lower = Tracker::new("f_power_lower_bound", "sgn(t) f(t) >= Cp |t|^{p-1}");
    for (i, &t) in ts.iter().enumerate() {
        let bound = cp * t.powf(p - 1.0);
        lower.leq(bound, fv[i], &[t]);
        lower.leq(bound, -f.f(-t)?, &[-t]);
    }

    let mut cubic = Tracker::new("f_over_t3_increasing", "f(t)/t^3 increasing on t > 0");
    let c: Vec<f64> = ts.iter().zip(&fv).map(|(t, f)| f / (t * t * t)).collect();
    nondecreasing(&mut cubic, &ts, &c);

    let mut diff = Tracker::new(
        "tf_minus_qF_increasing",
        "t f(t) - q F(t) increasing on t > 0",
    );
    let d: Vec<f64> = (0..n).map(|i| ts[i] * fv[i] - q * big_f[i]).collect();
    nondecreasing(&mut diff, &ts, &d);

    Ok(vec![
        odd.finish(),
        ar.finish(),
        mono_q.finish(),
        origin.finish(),
        lower.finish(),
        cubic.finish(),
        diff.finish(),
    ])
}
