//! The verification suite run by `verify`.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::energy::EnergyFunctional;
use crate::error::Result;
use crate::model::{check_hypotheses_with, Nonlinearity, MIN_SAMPLES};
use crate::nehari::project;
use crate::radial::{
    full_sobolev_norm, pointwise_bound_coeff, random_profile, w_inner, w_norm, GridScheme,
    RadialFunction, RadialGrid, WeightedSpace,
};
use crate::run::{prepare, Prepared};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

/// One named check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteCheck {
    pub name: String,
    pub status: Status,
    pub samples: usize,
    /// Worst observed margin; negative means violated.
    pub margin: f64,
    /// Inputs at the worst sample.
    pub witness: Vec<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: RunConfig,
    pub checks: Vec<SuiteCheck>,
    /// Conjunction over the non-skipped checks.
    pub overall: bool,
}

impl SuiteReport {
    pub fn get(&self, name: &str) -> Option<&SuiteCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &SuiteCheck> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }
}

/// Deliberate defects, used to confirm that the suite notices them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Faults {
    /// Negates the Laplacian seen by the closed-form Laplacian check.
    pub flip_laplacian_sign: bool,
    /// Claims twice the `Cp` that `f` is built with. Since
    /// `f(t) >= (Cp + 1) t^{p-1}` this is violated for every `Cp > 1`.
    pub weaken_cp: bool,
}

pub const RANDOM_PROFILES: usize = 100;
pub const DERIVATIVE_PAIRS: usize = 50;
pub const FIBER_SAMPLES: usize = 20;
pub const PROJECTION_DIRECTIONS: usize = 200;
pub const SWEEP_POINTS: usize = 500;
pub const ADAMS_PROFILES: usize = 50;
pub const HYPOTHESIS_SAMPLES: usize = 400;

const FD_STEP: f64 = 1e-5;

struct Acc {
    name: &'static str,
    samples: usize,
    worst: f64,
    witness: Vec<f64>,
}

impl Acc {
    fn new(name: &'static str) -> Self {
        Acc {
            name,
            samples: 0,
            worst: f64::INFINITY,
            witness: Vec::new(),
        }
    }

    fn record(&mut self, margin: f64, witness: &[f64]) {
        self.samples += 1;
        if !(margin >= self.worst) {
            self.worst = margin;
            self.witness = witness.to_vec();
        }
    }

    fn finish(self, detail: impl Into<String>) -> SuiteCheck {
        let status = if self.samples > 0 && self.worst >= 0.0 {
            Status::Pass
        } else {
            Status::Fail
        };
        SuiteCheck {
            name: self.name.into(),
            status,
            samples: self.samples,
            margin: self.worst,
            witness: self.witness,
            detail: detail.into(),
        }
    }
}

fn skip(name: &str, detail: impl Into<String>) -> SuiteCheck {
    SuiteCheck {
        name: name.into(),
        status: Status::Skip,
        samples: 0,
        margin: f64::NAN,
        witness: Vec::new(),
        detail: detail.into(),
    }
}

fn errored(name: &str, e: impl std::fmt::Display) -> SuiteCheck {
    SuiteCheck {
        name: name.into(),
        status: Status::Fail,
        samples: 0,
        margin: f64::NEG_INFINITY,
        witness: Vec::new(),
        detail: format!("error: {e}"),
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Random profile normalized to unit `W` norm.
fn unit_profile(space: &WeightedSpace, rng: &mut ChaCha8Rng) -> Result<RadialFunction> {
    let u = random_profile(space.grid(), rng);
    let norm = w_norm(&u, space.beta())?;
    Ok(u.scaled(1.0 / norm))
}

/// Runs the whole suite for `config`.
pub fn run_suite(config: &RunConfig, faults: Faults) -> Result<SuiteReport> {
    let prep = prepare(config, false)?;
    let seed = config.search.seed;
    let mut checks = Vec::new();

    checks.push(weighted_norm_closed_form(&prep));
    checks.push(laplacian_closed_form(&prep, faults));
    checks.push(ball_volume(&prep));
    checks.push(or_error(
        "pointwise_estimate",
        pointwise_estimate(&prep, seed),
    ));
    checks.push(or_error("norm_equivalence", norm_equivalence(&prep, seed)));
    checks.push(or_error(
        "inner_product_bilinearity",
        bilinearity(&prep, seed),
    ));
    checks.extend(hypotheses(&prep, faults));

    let functional = EnergyFunctional::full(Arc::clone(&prep.space), &prep.params)?;
    checks.push(or_error(
        "weak_action_consistency",
        weak_action_consistency(&functional, seed),
    ));
    checks.push(or_error(
        "fibering_derivative_consistency",
        fibering_derivative_consistency(&functional, seed),
    ));
    match projection_sweeps(&functional, seed) {
        Ok(list) => checks.extend(list),
        Err(e) => checks.push(errored("projection_sweeps", e)),
    }
    checks.push(adams_sampling(&prep, seed));

    let overall = checks.iter().all(|c| c.status != Status::Fail);
    Ok(SuiteReport {
        config: prep.config,
        checks,
        overall,
    })
}

fn or_error(name: &str, r: Result<SuiteCheck>) -> SuiteCheck {
    r.unwrap_or_else(|e| errored(name, e))
}

fn clamped_bump(grid: &Arc<RadialGrid>) -> RadialFunction {
    RadialFunction::from_fn(Arc::clone(grid), |r| (1.0 - r * r).powi(2))
}

/// Discretization error budget for a quantity of unit size.
fn fd_budget(grid: &RadialGrid, spectral: f64, h2_factor: f64) -> f64 {
    match grid.scheme() {
        GridScheme::SpectralEven => spectral,
        GridScheme::UniformFd => {
            let h = 1.0 / (grid.n() as f64 - 0.5);
            h2_factor * h * h
        }
    }
}

/// `|(1 - r^2)^2|` at `beta = 0` equals `4 pi`.
fn weighted_norm_closed_form(prep: &Prepared) -> SuiteCheck {
    let name = "weighted_norm_closed_form";
    let grid = prep.space.grid();
    let tol = fd_budget(grid, 1e-8, 150.0);
    let mut acc = Acc::new(name);
    match w_norm(&clamped_bump(grid), 0.0) {
        Ok(v) => acc.record(tol - (v - 4.0 * PI).abs(), &[v]),
        Err(e) => return errored(name, e),
    }
    acc.finish(format!(
        "|u| of (1-r^2)^2 at beta = 0 against 4 pi, tolerance {tol:e}"
    ))
}

/// Laplacian of `(1 - r^2)^2` equals `-16 + 24 r^2`.
fn laplacian_closed_form(prep: &Prepared, faults: Faults) -> SuiteCheck {
    let grid = prep.space.grid();
    let tol = fd_budget(grid, 1e-10, 100.0);
    let mut lap = clamped_bump(grid).laplacian();
    if faults.flip_laplacian_sign {
        lap = lap.scaled(-1.0);
    }
    let mut acc = Acc::new("laplacian_closed_form");
    for (&r, &v) in grid.nodes().iter().zip(lap.values()) {
        acc.record(tol - (v - (-16.0 + 24.0 * r * r)).abs(), &[r, v]);
    }
    acc.finish(format!(
        "nodal Laplacian against -16 + 24 r^2, tolerance {tol:e}"
    ))
}

fn ball_volume(prep: &Prepared) -> SuiteCheck {
    let grid = prep.space.grid();
    let one = RadialFunction::from_fn(Arc::clone(grid), |_| 1.0);
    let v = grid.ball_integral(one.values());
    let mut acc = Acc::new("ball_volume");
    acc.record(1e-12 - (v - PI * PI / 2.0).abs(), &[v]);
    acc.finish("volume of the unit ball against pi^2 / 2, tolerance 1e-12")
}

fn pointwise_estimate(prep: &Prepared, seed: u64) -> Result<SuiteCheck> {
    let name = "pointwise_estimate";
    let beta = prep.space.beta();
    if beta == 0.0 {
        return Ok(skip(name, "coefficient undefined at beta = 0"));
    }
    let mut rng = rng(seed, 101);
    let mut acc = Acc::new(name);
    for k in 0..RANDOM_PROFILES {
        let u = unit_profile(&prep.space, &mut rng)?;
        for (&r, &v) in prep.space.grid().nodes().iter().zip(u.values()) {
            let c = if r < 1.0 {
                pointwise_bound_coeff(r, beta)?
            } else {
                0.0
            };
            acc.record(c + 1e-7 - v.abs(), &[k as f64, r, v]);
        }
    }
    Ok(acc.finish("|u(r)| <= c(r) |u| + 1e-7 at every node, unit-norm profiles"))
}

fn norm_equivalence(prep: &Prepared, seed: u64) -> Result<SuiteCheck> {
    let beta = prep.space.beta();
    let mut rng = rng(seed, 102);
    let mut acc = Acc::new("norm_equivalence");
    let mut max_ratio: f64 = 0.0;
    for k in 0..RANDOM_PROFILES {
        let u = unit_profile(&prep.space, &mut rng)?;
        let ratio = full_sobolev_norm(&u, beta)? / w_norm(&u, beta)?;
        let margin = if ratio.is_finite() { ratio - 1.0 } else { -1.0 };
        acc.record(margin, &[k as f64, ratio]);
        max_ratio = max_ratio.max(ratio);
    }
    Ok(acc.finish(format!(
        "full Sobolev norm / |u| finite and >= 1; largest ratio {max_ratio:.6e}"
    )))
}

fn bilinearity(prep: &Prepared, seed: u64) -> Result<SuiteCheck> {
    let beta = prep.space.beta();
    let mut rng = rng(seed, 103);
    let mut acc = Acc::new("inner_product_bilinearity");
    for _ in 0..RANDOM_PROFILES / 4 {
        let u = unit_profile(&prep.space, &mut rng)?;
        let v = unit_profile(&prep.space, &mut rng)?;
        let z = unit_profile(&prep.space, &mut rng)?;
        let a: f64 = rng.random_range(-3.0..3.0);
        let b: f64 = rng.random_range(-3.0..3.0);
        let lhs = w_inner(&u.combine(a, &v, b)?, &z, beta)?;
        let rhs = a * w_inner(&u, &z, beta)? + b * w_inner(&v, &z, beta)?;
        acc.record(
            1e-10 * (1.0 + rhs.abs()) - (lhs - rhs).abs(),
            &[a, b, lhs, rhs],
        );
    }
    Ok(acc.finish("<au + bv, z> = a<u, z> + b<v, z> within 1e-10"))
}

/// Wraps `f`, reporting a power coefficient it does not satisfy.
#[derive(Debug)]
struct WeakenedCp<N> {
    inner: N,
    claimed: f64,
}

impl<N: Nonlinearity> Nonlinearity for WeakenedCp<N> {
    fn f(&self, t: f64) -> Result<f64> {
        self.inner.f(t)
    }
    fn f_prime(&self, t: f64) -> Result<f64> {
        self.inner.f_prime(t)
    }
    #[allow(non_snake_case)]
    fn F(&self, t: f64) -> Result<f64> {
        self.inner.F(t)
    }
    fn cp(&self) -> f64 {
        self.claimed
    }
    fn p(&self) -> f64 {
        self.inner.p()
    }
    fn t_max(&self) -> f64 {
        self.inner.t_max()
    }
}

fn hypotheses(prep: &Prepared, faults: Faults) -> Vec<SuiteCheck> {
    let params = prep.params;
    let report = if faults.weaken_cp {
        params.nonlinearity().and_then(|inner| {
            let f = WeakenedCp {
                inner,
                claimed: 2.0 * params.cp,
            };
            check_hypotheses_with(
                &params.kirchhoff,
                &f,
                params.q,
                params.theta(),
                HYPOTHESIS_SAMPLES,
            )
        })
    } else {
        params.nonlinearity().and_then(|f| {
            check_hypotheses_with(
                &params.kirchhoff,
                &f,
                params.q,
                params.theta(),
                HYPOTHESIS_SAMPLES.max(MIN_SAMPLES),
            )
        })
    };
    match report {
        Ok(r) => r
            .checks
            .into_iter()
            .map(|c| SuiteCheck {
                name: format!("hypothesis.{}", c.name),
                status: if c.passed { Status::Pass } else { Status::Fail },
                samples: c.samples,
                margin: c.worst_margin,
                witness: c.witness,
                detail: c.description,
            })
            .collect(),
        Err(e) => vec![errored("hypotheses", e)],
    }
}

fn weak_action_consistency(functional: &EnergyFunctional, seed: u64) -> Result<SuiteCheck> {
    let space = functional.space();
    let mut rng = rng(seed, 201);
    let mut acc = Acc::new("weak_action_consistency");
    for k in 0..DERIVATIVE_PAIRS {
        let u = unit_profile(space, &mut rng)?;
        let phi = unit_profile(space, &mut rng)?;
        let wa = functional.weak_action(&u, &phi)?;
        let plus = functional.energy(&u.combine(1.0, &phi, FD_STEP)?)?.total;
        let minus = functional.energy(&u.combine(1.0, &phi, -FD_STEP)?)?.total;
        let fd = (plus - minus) / (2.0 * FD_STEP);
        let rel = (wa - fd).abs() / (1.0 + wa.abs());
        acc.record(1e-6 - rel, &[k as f64, wa, fd]);
    }
    Ok(acc.finish("weak action against centered differences of J, step 1e-5, relative 1e-6"))
}

fn fibering_derivative_consistency(functional: &EnergyFunctional, seed: u64) -> Result<SuiteCheck> {
    let space = functional.space();
    let mut rng = rng(seed, 202);
    let mut acc = Acc::new("fibering_derivative_consistency");
    let u = unit_profile(space, &mut rng)?;
    let t_u = project(functional, &u)?.t_u;
    for i in 0..FIBER_SAMPLES {
        let t = t_u * 2f64.powf(-2.0 + 2.5 * i as f64 / (FIBER_SAMPLES - 1) as f64);
        let h = FD_STEP * t;
        let d = functional.fibering_deriv(&u, t)?;
        let j = |x: f64| functional.fibering(&u, x);
        let fd = (8.0 * (j(t + h)? - j(t - h)?) - (j(t + 2.0 * h)? - j(t - 2.0 * h)?)) / (12.0 * h);
        // both sides carry the scale of t d/dt J(tu)
        let scale = t * d.abs() + functional.fibering(&u, t)?.abs();
        let rel = t * (d - fd).abs() / scale.max(f64::MIN_POSITIVE);
        acc.record(1e-7 - rel, &[t, d, fd]);
    }
    Ok(acc.finish(
        "d/dt J(tu) against five-point centered differences at 20 points in [t_u/4, 1.41 t_u], \
         relative 1e-7",
    ))
}

fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
}

fn projection_sweeps(functional: &EnergyFunctional, seed: u64) -> Result<Vec<SuiteCheck>> {
    let space = functional.space();
    let mut rng = rng(seed, 301);
    let g0 = functional.kirchhoff().g0();
    let coercivity = (0.25 - 1.0 / functional.power()) * g0;

    let mut unique = Acc::new("projection_unique_sign_change");
    let mut maximum = Acc::new("fibering_maximum_at_projection");
    let mut t_leq_one = Acc::new("negative_residual_implies_scale_at_most_one");
    let mut coercive = Acc::new("nehari_coercivity");
    for k in 0..PROJECTION_DIRECTIONS {
        let u = unit_profile(space, &mut rng)?;
        let point = project(functional, &u)?;
        let t_u = point.t_u;

        let mut changes = 0;
        let mut prev: Option<f64> = None;
        for t in log_grid(1e-6 * t_u, 1e3 * t_u, SWEEP_POINTS) {
            let d = match functional.fibering_deriv(&u, t) {
                Ok(d) => d,
                // beyond the exponential guard the derivative is hugely negative
                Err(crate::Error::Range { .. }) => f64::NEG_INFINITY,
                Err(e) => return Err(e),
            };
            if let Some(p) = prev {
                if (p > 0.0) != (d > 0.0) {
                    changes += 1;
                }
            }
            prev = Some(d);
        }
        unique.record(
            if changes == 1 { 0.0 } else { -1.0 },
            &[k as f64, changes as f64],
        );

        let peak = point.energy;
        for t in log_grid(0.1 * t_u, 10.0 * t_u, 21) {
            match functional.fibering(&u, t) {
                Ok(v) => {
                    let margin = (peak - v) / peak.abs().max(f64::MIN_POSITIVE) + 1e-12;
                    maximum.record(margin, &[k as f64, t, v]);
                }
                Err(crate::Error::Range { .. }) => {}
                Err(e) => return Err(e),
            }
        }

        let s = t_u * rng.random_range(0.1f64..10.0);
        let v = u.scaled(s);
        let residual = match functional.nehari_residual(&v) {
            Ok(r) => r,
            Err(crate::Error::Range { .. }) => f64::NEG_INFINITY,
            Err(e) => return Err(e),
        };
        if residual <= 0.0 {
            let t_v = project(functional, &v)?.t_u;
            t_leq_one.record(1.0 + 1e-10 - t_v, &[k as f64, s, t_v]);
        }

        let bound = coercivity * point.norm * point.norm;
        coercive.record(
            point.energy - bound + 1e-9,
            &[k as f64, point.energy, bound],
        );
    }
    Ok(vec![
        unique.finish(format!(
            "one sign change of d/dt J(tu) on {SWEEP_POINTS} log-spaced t in [1e-6, 1e3] t_u"
        )),
        maximum.finish("J(t_u u) >= J(tu) for t in [0.1, 10] t_u"),
        t_leq_one.finish("<J'(v), v> <= 0 implies t_v <= 1"),
        coercive.finish("J(t_u u) >= (1/4 - 1/q) g0 |t_u u|^2 - 1e-9"),
    ])
}

/// `log int_B exp(alpha |u|^gamma) dx` by log-sum-exp over the quadrature.
pub fn log_exponential_integral(
    space: &WeightedSpace,
    u: &RadialFunction,
    alpha: f64,
    gamma: f64,
) -> f64 {
    let terms: Vec<f64> = u
        .values()
        .iter()
        .zip(space.mass_weights())
        .filter(|(_, &m)| m > 0.0)
        .map(|(v, m)| m.ln() + alpha * v.abs().powf(gamma))
        .collect();
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

fn adams_sampling(prep: &Prepared, seed: u64) -> SuiteCheck {
    let name = "adams_sampling";
    let beta = prep.space.beta();
    if beta == 0.0 {
        return skip(name, "alpha_beta undefined at beta = 0");
    }
    let run = || -> Result<SuiteCheck> {
        let alpha = prep.params.alpha_beta()?;
        let gamma = prep.params.gamma()?;
        let mut rng = rng(seed, 401);
        let mut acc = Acc::new(name);
        let mut sup = f64::NEG_INFINITY;
        for k in 0..ADAMS_PROFILES {
            let u = unit_profile(&prep.space, &mut rng)?;
            let log_i = log_exponential_integral(&prep.space, &u, alpha, gamma);
            let direct = prep
                .space
                .mass_weights()
                .iter()
                .zip(u.values())
                .map(|(m, v)| m * (alpha * v.abs().powf(gamma)).exp())
                .sum::<f64>();
            let margin = if log_i.is_finite() { 0.0 } else { -1.0 };
            acc.record(margin, &[k as f64, log_i, direct]);
            sup = sup.max(log_i);
        }
        Ok(acc.finish(format!(
            "int_B exp(alpha_beta |u|^gamma) finite for unit-norm profiles; \
             largest log value {sup:.6e}"
        )))
    };
    or_error(name, run())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::GridConfig;

    #[test]
    fn log_integral_of_zero_is_log_volume() {
        let grid = RadialGrid::new(16, GridScheme::SpectralEven).unwrap();
        let space = WeightedSpace::new(Arc::clone(&grid), 0.5).unwrap();
        let u = RadialFunction::zeros(grid);
        let v = log_exponential_integral(&space, &u, 10.0, 2.0);
        assert!((v - (PI * PI / 2.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn small_suite_passes_and_detects_faults() {
        let cfg = RunConfig {
            grid: GridConfig {
                n: 24,
                scheme: GridScheme::SpectralEven,
            },
            auto_cp: false,
            ..Default::default()
        };
        let ok = run_suite(&cfg, Faults::default()).unwrap();
        let bad: Vec<_> = ok.failures().collect();
        assert!(ok.overall, "{bad:#?}");
        let flipped = run_suite(
            &cfg,
            Faults {
                flip_laplacian_sign: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(!flipped.overall);
        assert_eq!(
            flipped.get("laplacian_closed_form").unwrap().status,
            Status::Fail
        );
    }
}
