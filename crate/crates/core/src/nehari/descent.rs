use std::collections::VecDeque;
use std::sync::Arc;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::projection::{project_from, NehariPoint};
use crate::energy::EnergyFunctional;
use crate::error::{invalid, Error, Result};
use crate::radial::{random_profile, RadialFunction, WeightedSpace};

const MIN_STEP: f64 = 1e-14;
const MEMORY: usize = 8;
const ARMIJO: f64 = 1e-4;

/// Multi-start search settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub starts: usize,
    pub max_iter: usize,
    /// A start converges once `|v| <= tol g(|u|^2) |u|` for the Sobolev
    /// gradient `v` at the projected point `u`; iteration continues towards
    /// `|v| <= tol min(g(|u|^2) |u|, 1 + |u|)` while the energy still drops.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            starts: 8,
            max_iter: 2000,
            tol: 1e-6,
            seed: 1,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(invalid("starts", "must be at least 1"));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be at least 1"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(invalid(
                "tol",
                format!("must be positive, got {}", self.tol),
            ));
        }
        Ok(())
    }
}

/// Per-start diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartReport {
    pub index: usize,
    pub energy: f64,
    pub gradient_norm: f64,
    pub norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Projected energies of the accepted iterates, starting point first.
    pub energy_trace: Vec<f64>,
    /// Smallest `|t_u u|` over every projected point evaluated.
    pub min_norm: f64,
    /// Smallest `J(u) - (1/4 - 1/s) g0 |u|^2` over every projected point.
    pub coercivity_margin: f64,
    /// Smallest projected energy evaluated, accepted or not.
    pub min_evaluated: f64,
    pub error: Option<String>,
}

/// Best Nehari point over all starts.
#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub minimizer: NehariPoint,
    pub m: f64,
    pub gradient_norm: f64,
    pub starts: usize,
    pub start_energies: Vec<f64>,
    pub converged: bool,
    pub best_start: usize,
    /// Smallest Nehari norm seen in the run.
    pub kappa: f64,
    pub coercivity_margin: f64,
    pub min_evaluated: f64,
    pub reports: Vec<StartReport>,
}

struct Tracker {
    min_norm: f64,
    coercivity_margin: f64,
    min_evaluated: f64,
    coercivity: f64,
}

impl Tracker {
    fn see(&mut self, p: &NehariPoint) {
        self.min_norm = self.min_norm.min(p.norm);
        self.coercivity_margin = self
            .coercivity_margin
            .min(p.energy - self.coercivity * p.norm * p.norm);
        self.min_evaluated = self.min_evaluated.min(p.energy);
    }
}

fn normalized(
    functional: &EnergyFunctional,
    c: &DVector<f64>,
) -> Result<(DVector<f64>, RadialFunction)> {
    let space = functional.space();
    let norm = space.coefficient_norm_sq(c).sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Precondition(format!(
            "cannot normalize direction of norm {norm}"
        )));
    }
    let c = c / norm;
    let u = RadialFunction::from_coefficients(Arc::clone(space.grid()), &c);
    Ok((c, u))
}

/// Coefficients of the clamped random start for `(seed, index)`.
pub fn start_direction(
    functional: &EnergyFunctional,
    seed: u64,
    index: usize,
) -> Result<RadialFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let raw = random_profile(functional.space().grid(), &mut rng);
    Ok(normalized(functional, &raw.clamped_coefficients())?.1)
}

/// Limited-memory quasi-Newton history in the `W` inner product.
struct History {
    pairs: VecDeque<(DVector<f64>, DVector<f64>, f64)>,
}

impl History {
    fn new() -> Self {
        History {
            pairs: VecDeque::with_capacity(MEMORY),
        }
    }

    fn push(&mut self, space: &WeightedSpace, s: DVector<f64>, y: DVector<f64>) {
        let sy = space.coefficient_inner(&s, &y);
        if !(sy > 0.0 && sy.is_finite()) {
            return;
        }
        if self.pairs.len() == MEMORY {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, 1.0 / sy));
    }

    /// Two-loop recursion; `None` until a pair is stored.
    fn direction(&self, space: &WeightedSpace, g: &DVector<f64>) -> Option<DVector<f64>> {
        let (s_last, y_last, _) = self.pairs.back()?;
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * space.coefficient_inner(s, &q);
            q -= y * a;
            alphas.push(a);
        }
        let gamma =
            space.coefficient_inner(s_last, y_last) / space.coefficient_inner(y_last, y_last);
        q *= gamma;
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.into_iter().rev()) {
            let b = rho * space.coefficient_inner(y, &q);
            q += s * (a - b);
        }
        Some(-q)
    }
}

fn run_start(
    functional: &EnergyFunctional,
    cfg: &SearchConfig,
    index: usize,
) -> Result<(StartReport, NehariPoint)> {
    let space = functional.space();
    let g0 = functional.kirchhoff().g0();
    let mut tracker = Tracker {
        min_norm: f64::INFINITY,
        coercivity_margin: f64::INFINITY,
        min_evaluated: f64::INFINITY,
        coercivity: (0.25 - 1.0 / functional.power()) * g0,
    };
    let scaled = |p: &NehariPoint| functional.kirchhoff().g_unchecked(p.norm * p.norm) * p.norm;
    // iterate towards the stricter test; convergence needs the scaled one
    let target = |p: &NehariPoint| cfg.tol * scaled(p).min(1.0 + p.norm);
    let threshold = |p: &NehariPoint| cfg.tol * scaled(p);
    // gradient of x -> J(t_x x) on the unit sphere is t_x v
    let reduced = |p: &NehariPoint| -> Result<(f64, DVector<f64>)> {
        let grad = functional.sobolev_gradient(&p.projected)?;
        Ok((grad.norm, grad.coefficients * p.t_u))
    };

    let start = start_direction(functional, cfg.seed, index)?;
    let mut x = start.clamped_coefficients();
    let mut point = project_from(functional, &start, 1.0)?;
    tracker.see(&point);
    let mut trace = vec![point.energy];
    let (mut gradient_norm, mut g) = reduced(&point)?;
    let mut history = History::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        if gradient_norm <= target(&point) {
            converged = true;
            break;
        }
        iterations += 1;
        let steepest_step = 1.0
            / (functional.kirchhoff().g_unchecked(point.norm * point.norm) * point.t_u * point.t_u);
        let mut accepted = None;
        for quasi_newton in [true, false] {
            let (mut d, mut alpha) = match history.direction(space, &g) {
                Some(d) if quasi_newton => (d, 1.0),
                _ if quasi_newton => continue,
                _ => (-&g, steepest_step),
            };
            d -= &x * space.coefficient_inner(&d, &x);
            let slope = space.coefficient_inner(&g, &d);
            if !(slope < 0.0) {
                continue;
            }
            while alpha * space.coefficient_norm_sq(&d).sqrt() >= MIN_STEP {
                let (trial_x, dir) = normalized(functional, &(&x + &d * alpha))?;
                let trial = project_from(functional, &dir, point.t_u)?;
                tracker.see(&trial);
                if trial.energy < point.energy
                    && trial.energy <= point.energy + ARMIJO * alpha * slope
                {
                    accepted = Some((trial_x, trial));
                    break;
                }
                alpha *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
            history.pairs.clear();
        }
        let Some((trial_x, trial)) = accepted else {
            break;
        };
        let (norm, trial_g) = reduced(&trial)?;
        history.push(space, &trial_x - &x, &trial_g - &g);
        x = trial_x;
        g = trial_g;
        gradient_norm = norm;
        point = trial;
        trace.push(point.energy);
    }
    if !converged {
        converged = gradient_norm <= threshold(&point);
    }

    let report = StartReport {
        index,
        energy: point.energy,
        gradient_norm,
        norm: point.norm,
        iterations,
        converged,
        energy_trace: trace,
        min_norm: tracker.min_norm,
        coercivity_margin: tracker.coercivity_margin,
        min_evaluated: tracker.min_evaluated,
        error: None,
    };
    Ok((report, point))
}

/// Multi-start projected Sobolev-gradient descent (L-BFGS in the `W` metric) for `inf_N J`.
///
/// Starts run in parallel; each draws its direction from the ChaCha8 stream
/// `(seed, index)`, so results do not depend on the schedule.
pub fn ground_state(
    functional: &EnergyFunctional,
    cfg: &SearchConfig,
) -> Result<GroundStateResult> {
    cfg.validate()?;
    let outcomes: Vec<(StartReport, Option<NehariPoint>)> = (0..cfg.starts)
        .into_par_iter()
        .map(|index| match run_start(functional, cfg, index) {
            Ok((report, point)) => (report, Some(point)),
            Err(e) => (
                StartReport {
                    index,
                    energy: f64::NAN,
                    gradient_norm: f64::NAN,
                    norm: f64::NAN,
                    iterations: 0,
                    converged: false,
                    energy_trace: Vec::new(),
                    min_norm: f64::NAN,
                    coercivity_margin: f64::NAN,
                    min_evaluated: f64::NAN,
                    error: Some(e.to_string()),
                },
                None,
            ),
        })
        .collect();

    let best = outcomes.iter().filter(|(_, p)| p.is_some()).min_by(|a, b| {
        a.0.energy
            .total_cmp(&b.0.energy)
            .then(a.0.index.cmp(&b.0.index))
    });
    let Some((best_report, Some(best_point))) = best else {
        let reasons: Vec<String> = outcomes
            .iter()
            .filter_map(|(r, _)| r.error.clone())
            .collect();
        return Err(Error::Precondition(format!(
            "every start failed: {}",
            reasons.join("; ")
        )));
    };

    let ok = outcomes.iter().filter(|(_, p)| p.is_some()).map(|(r, _)| r);
    let kappa = ok.clone().map(|r| r.min_norm).fold(f64::INFINITY, f64::min);
    let coercivity_margin = ok
        .clone()
        .map(|r| r.coercivity_margin)
        .fold(f64::INFINITY, f64::min);
    let min_evaluated = ok
        .clone()
        .map(|r| r.min_evaluated)
        .fold(f64::INFINITY, f64::min);

    Ok(GroundStateResult {
        minimizer: best_point.clone(),
        m: best_point.energy,
        gradient_norm: best_report.gradient_norm,
        starts: cfg.starts,
        start_energies: outcomes.iter().map(|(r, _)| r.energy).collect(),
        converged: best_report.converged,
        best_start: best_report.index,
        kappa,
        coercivity_margin,
        min_evaluated,
        reports: outcomes.into_iter().map(|(r, _)| r).collect(),
    })
}

/// Ground state of the auxiliary pure-power problem.
#[derive(Debug, Clone)]
pub struct AuxResult {
    pub w_p: RadialFunction,
    pub m_p: f64,
    /// `|w_p|_p^p`.
    pub p_norm_p: f64,
    pub search: GroundStateResult,
}

/// [`ground_state`] applied to `J_p(u) = G(|u|^2)/2 - |u|_p^p / p`.
pub fn aux_ground_state(functional: &EnergyFunctional, cfg: &SearchConfig) -> Result<AuxResult> {
    if functional.nonlinearity().is_some() {
        return Err(Error::Precondition(
            "auxiliary functional must not carry a nonlinearity".into(),
        ));
    }
    if functional.power() <= 4.0 {
        return Err(invalid(
            "p",
            format!("must exceed 4, got {}", functional.power()),
        ));
    }
    let search = ground_state(functional, cfg)?;
    let w_p = search.minimizer.projected.clone();
    let p_norm_p = functional.fiber(&w_p)?.power_moment();
    Ok(AuxResult {
        w_p,
        m_p: search.m,
        p_norm_p,
        search,
    })
}
