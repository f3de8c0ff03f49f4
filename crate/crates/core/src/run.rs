//! Command pipelines: resolve `Cp`, solve, and collect serializable reports.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::energy::EnergyFunctional;
use crate::error::{invalid, Error, Result};
use crate::model::{KirchhoffSpec, ModelParams};
use crate::nehari::{
    aux_ground_state, ground_state, level_bounds, min_admissible_cp, tau_statement, AuxResult,
    BoundsReport, GroundStateResult, StartReport,
};
use crate::radial::{RadialFunction, RadialGrid, WeightedSpace};

/// Auto `Cp` is this multiple of the smallest admissible value.
pub const AUTO_CP_FACTOR: f64 = 1.1;

/// `Cp` used when auto-Cp is requested at `beta = 0`, where no threshold
/// exists.
pub const FALLBACK_CP: f64 = 2.0;

/// Tolerance factors of the ground-state quality checks.
pub const GRADIENT_CHECK: f64 = 1e-6;
pub const RESIDUAL_CHECK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CpMode {
    Explicit,
    Auto,
    /// Auto requested at `beta = 0`; [`FALLBACK_CP`] used.
    Fallback,
}

/// How the `Cp` of a run was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpResolution {
    pub mode: CpMode,
    pub cp: f64,
    /// Smallest admissible `Cp`, when computed.
    pub threshold: Option<f64>,
}

/// Validated config with its grid, space and final parameters.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: RunConfig,
    pub space: Arc<WeightedSpace>,
    pub params: ModelParams,
    pub cp: CpResolution,
    /// Present whenever the auxiliary problem was solved.
    pub aux: Option<AuxResult>,
}

/// Validates `config`, builds the space and resolves `Cp`.
///
/// The auxiliary problem is solved when auto-Cp needs it or `with_aux` is
/// set.
pub fn prepare(config: &RunConfig, with_aux: bool) -> Result<Prepared> {
    config.validate()?;
    let grid = RadialGrid::new(config.grid.n, config.grid.scheme)?;
    let space = WeightedSpace::new(grid, config.params.beta)?;
    let mut params = config.params;
    let degenerate = params.beta == 0.0;
    let need_aux = with_aux || (config.auto_cp && !degenerate);
    let aux = if need_aux {
        let fun = EnergyFunctional::auxiliary(Arc::clone(&space), &params)?;
        Some(aux_ground_state(&fun, &config.search)?)
    } else {
        None
    };
    let cp = match (&aux, config.auto_cp) {
        (_, false) => CpResolution {
            mode: CpMode::Explicit,
            cp: params.cp,
            threshold: None,
        },
        (Some(aux), true) if !degenerate => {
            let threshold = min_admissible_cp(aux.m_p, &params, tau_statement(&params, aux.m_p))?;
            CpResolution {
                mode: CpMode::Auto,
                cp: AUTO_CP_FACTOR * threshold,
                threshold: Some(threshold),
            }
        }
        _ => CpResolution {
            mode: CpMode::Fallback,
            cp: FALLBACK_CP,
            threshold: None,
        },
    };
    params.cp = cp.cp;
    params.validate()?;
    Ok(Prepared {
        config: *config,
        space,
        params,
        cp,
        aux,
    })
}

/// Scalar summary of a multi-start search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub energy: f64,
    pub gradient_norm: f64,
    pub norm: f64,
    pub t_u: f64,
    pub nehari_residual: f64,
    pub converged: bool,
    /// `gradient_norm <= 1e-6 (1 + norm)`.
    pub gradient_ok: bool,
    /// `|nehari_residual| <= 1e-10 (1 + norm^2)`.
    pub residual_ok: bool,
    /// `|nehari_residual| <= 1e-10 (1 + g(norm^2) norm^2)`, the size of
    /// the individual terms of the residual.
    pub residual_scaled_ok: bool,
    pub best_start: usize,
    /// Smallest Nehari norm seen.
    pub kappa: f64,
    pub start_energies: Vec<f64>,
    pub starts: Vec<StartReport>,
}

impl SearchSummary {
    pub fn from_result(r: &GroundStateResult, kirchhoff: &KirchhoffSpec) -> Self {
        let p = &r.minimizer;
        let s = p.norm * p.norm;
        SearchSummary {
            energy: r.m,
            gradient_norm: r.gradient_norm,
            norm: p.norm,
            t_u: p.t_u,
            nehari_residual: p.residual,
            converged: r.converged,
            gradient_ok: r.gradient_norm <= GRADIENT_CHECK * (1.0 + p.norm),
            residual_ok: p.residual.abs() <= RESIDUAL_CHECK * (1.0 + s),
            residual_scaled_ok: p.residual.abs()
                <= RESIDUAL_CHECK * (1.0 + kirchhoff.g_unchecked(s) * s),
            best_start: r.best_start,
            kappa: r.kappa,
            start_energies: r.start_energies.clone(),
            starts: r.reports.clone(),
        }
    }

    /// Converged with a small scaled Nehari residual. `gradient_ok` and
    /// `residual_ok` are reported separately since they are out of reach
    /// in floating point at large scales.
    pub fn ok(&self) -> bool {
        self.converged && self.residual_scaled_ok
    }
}

/// Grid facts recorded in every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub n: usize,
    pub scheme: crate::radial::GridScheme,
    pub dim: usize,
    pub gram_condition: f64,
}

impl GridSummary {
    fn of(space: &WeightedSpace) -> Self {
        GridSummary {
            n: space.grid().n(),
            scheme: space.grid().scheme(),
            dim: space.grid().dim(),
            gram_condition: space.condition_estimate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxSummary {
    pub m_p: f64,
    /// `|w_p|_p^p`.
    pub p_norm_p: f64,
    /// `pq/(p-q) m_p`.
    pub p_norm_cap: f64,
    pub p_norm_ok: bool,
    pub search: SearchSummary,
}

impl AuxSummary {
    pub fn from_result(aux: &AuxResult, params: &ModelParams) -> Self {
        let (p, q) = (params.p, params.q);
        let cap = p * q / (p - q) * aux.m_p;
        AuxSummary {
            m_p: aux.m_p,
            p_norm_p: aux.p_norm_p,
            p_norm_cap: cap,
            p_norm_ok: aux.p_norm_p <= cap + crate::nehari::BOUND_SLACK,
            search: SearchSummary::from_result(&aux.search, &params.kirchhoff),
        }
    }
}

/// Payload of the `solve` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub config: RunConfig,
    pub params: ModelParams,
    pub cp: CpResolution,
    pub grid: GridSummary,
    pub m: f64,
    pub ground_state: SearchSummary,
}

impl SolveReport {
    pub fn ok(&self) -> bool {
        self.m > 0.0 && self.ground_state.ok()
    }
}

/// Payload of the `aux` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxReport {
    pub config: RunConfig,
    pub params: ModelParams,
    pub grid: GridSummary,
    pub aux: AuxSummary,
}

impl AuxReport {
    pub fn ok(&self) -> bool {
        self.aux.m_p > 0.0 && self.aux.search.ok() && self.aux.p_norm_ok
    }
}

/// Payload of the `bounds` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRun {
    pub config: RunConfig,
    pub params: ModelParams,
    pub cp: CpResolution,
    pub grid: GridSummary,
    pub aux: AuxSummary,
    pub ground_state: SearchSummary,
    pub bounds: BoundsReport,
}

impl BoundsRun {
    pub fn ok(&self) -> bool {
        self.aux.search.ok() && self.ground_state.ok() && self.bounds.all_ok()
    }
}

/// Ground state of the full problem together with its minimizer profile.
pub fn solve(config: &RunConfig) -> Result<(SolveReport, RadialFunction)> {
    let prep = prepare(config, false)?;
    let fun = EnergyFunctional::full(Arc::clone(&prep.space), &prep.params)?;
    let gs = ground_state(&fun, &prep.config.search)?;
    let report = SolveReport {
        config: prep.config,
        params: prep.params,
        cp: prep.cp,
        grid: GridSummary::of(&prep.space),
        m: gs.m,
        ground_state: SearchSummary::from_result(&gs, &prep.params.kirchhoff),
    };
    Ok((report, gs.minimizer.projected))
}

/// Auxiliary pure-power ground state and its profile.
pub fn aux(config: &RunConfig) -> Result<(AuxReport, RadialFunction)> {
    let prep = prepare(config, true)?;
    let aux = prep
        .aux
        .as_ref()
        .ok_or_else(|| Error::Precondition("auxiliary problem was not solved".into()))?;
    let report = AuxReport {
        config: prep.config,
        params: prep.params,
        grid: GridSummary::of(&prep.space),
        aux: AuxSummary::from_result(aux, &prep.params),
    };
    Ok((report, aux.w_p.clone()))
}

/// Auxiliary and main ground states plus every level inequality.
///
/// Requires `beta > 0`: the Adams constant, and with it the level caps,
/// are undefined at `beta = 0`.
pub fn bounds(config: &RunConfig) -> Result<(BoundsRun, RadialFunction)> {
    if config.params.beta == 0.0 {
        return Err(invalid(
            "beta",
            "must lie in (0, 1) for the level bounds, got 0",
        ));
    }
    let prep = prepare(config, true)?;
    let aux = prep
        .aux
        .as_ref()
        .ok_or_else(|| Error::Precondition("auxiliary problem was not solved".into()))?;
    let fun = EnergyFunctional::full(Arc::clone(&prep.space), &prep.params)?;
    let gs = ground_state(&fun, &prep.config.search)?;
    let report = BoundsRun {
        config: prep.config,
        params: prep.params,
        cp: prep.cp,
        grid: GridSummary::of(&prep.space),
        aux: AuxSummary::from_result(aux, &prep.params),
        ground_state: SearchSummary::from_result(&gs, &prep.params.kirchhoff),
        bounds: level_bounds(gs.m, aux, &prep.params)?,
    };
    Ok((report, gs.minimizer.projected))
}

/// True for errors caused by the configuration rather than the numerics.
pub fn is_config_error(e: &Error) -> bool {
    matches!(e, Error::InvalidArgument { .. } | Error::Config(_))
}
