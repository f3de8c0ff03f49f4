use serde::{Deserialize, Serialize};

use super::descent::AuxResult;
use crate::error::Result;
use crate::model::ModelParams;

/// Absolute slack used by every level-bound comparison.
pub const BOUND_SLACK: f64 = 1e-8;

/// Level quantities and the inequalities relating them.
///
/// Caps named `*_statement` use the `tau` of the main theorem, `*_proof`
/// the `tau` obtained in the level estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub m: f64,
    pub m_p: f64,
    pub p_norm_p: f64,
    pub cp: f64,
    pub g0: f64,
    pub g1: f64,
    pub alpha_beta: f64,
    pub tau_statement: f64,
    pub tau_proof: f64,
    /// Smallest admissible `Cp` (with `tau_statement`).
    pub cp_threshold: f64,
    pub cp_threshold_proof: f64,
    /// `g0 (q-4)/(4q) (alpha_beta / (2(alpha0 + delta)))^{1-beta}`.
    pub adams_level_cap: f64,
    /// `pq/(p-q) m_p`.
    pub aux_norm_cap: f64,
    /// `tau (2 tau/Cp)^{2/(p-2)} (p-2)/p |w_p|_p^p`.
    pub norm_level_cap_statement: f64,
    pub norm_level_cap_proof: f64,
    /// `tau (2 tau/Cp)^{2/(p-2)} q(p-2)/(p-q) m_p`.
    pub aux_level_cap_statement: f64,
    pub aux_level_cap_proof: f64,
    /// `|w_p|_p^p <= aux_norm_cap`.
    pub aux_norm_ok: bool,
    /// `m <= norm_level_cap_proof`.
    pub norm_level_ok: bool,
    /// `m <= aux_level_cap_proof`.
    pub aux_level_ok: bool,
    /// `Cp > cp_threshold`.
    pub cp_admissible: bool,
    /// `m <= adams_level_cap`; evaluated only when `cp_admissible`.
    pub adams_level_ok: Option<bool>,
    /// `norm_level_cap <= aux_level_cap` for both `tau` variants.
    pub chain_ok: bool,
}

impl BoundsReport {
    pub fn all_ok(&self) -> bool {
        self.aux_norm_ok
            && self.norm_level_ok
            && self.aux_level_ok
            && self.chain_ok
            && self.adams_level_ok.unwrap_or(true)
    }
}

/// `tau = g(1)/(2 g0) + g(1)/g0^2 * p/(p-4) * m_p`.
pub fn tau_statement(params: &ModelParams, m_p: f64) -> f64 {
    let g0 = params.g0();
    let g1 = params.kirchhoff.g_unchecked(1.0);
    g1 / (2.0 * g0) + g1 / (g0 * g0) * params.p / (params.p - 4.0) * m_p
}

/// `tau = g(1)/(2 g0) + g(1)/(4 g0^2) * pq/(p-q) * m_p`.
pub fn tau_proof(params: &ModelParams, m_p: f64) -> f64 {
    let g0 = params.g0();
    let g1 = params.kirchhoff.g_unchecked(1.0);
    let (p, q) = (params.p, params.q);
    g1 / (2.0 * g0) + g1 / (4.0 * g0 * g0) * p * q / (p - q) * m_p
}

/// `max_{xi > 0} (a xi^2 - cp xi^p / p) = a (2a/cp)^{2/(p-2)} (p-2)/p`.
pub fn power_max(a: f64, cp: f64, p: f64) -> f64 {
    a * (2.0 * a / cp).powf(2.0 / (p - 2.0)) * (p - 2.0) / p
}

/// `max{1, 2 tau^{p/2} (4q^2(p-2) m_p / (g0(q-4)(p-q)) (2(alpha0+delta)/alpha_beta)^{1-beta})^{(p-2)/2}}`.
pub fn min_admissible_cp(m_p: f64, params: &ModelParams, tau: f64) -> Result<f64> {
    let (p, q, beta) = (params.p, params.q, params.beta);
    let ab = params.alpha_beta()?;
    let inner = 4.0 * q * q * (p - 2.0) * m_p / (params.g0() * (q - 4.0) * (p - q))
        * (2.0 * (params.alpha0 + params.delta) / ab).powf(1.0 - beta);
    let value = 2.0 * tau.powf(p / 2.0) * inner.powf((p - 2.0) / 2.0);
    Ok(value.max(1.0))
}

/// Evaluates every level inequality for a computed `m` and auxiliary result.
pub fn level_bounds(m: f64, aux: &AuxResult, params: &ModelParams) -> Result<BoundsReport> {
    level_bounds_from(m, aux.m_p, aux.p_norm_p, params)
}

/// As [`level_bounds`] from the scalar auxiliary data.
pub fn level_bounds_from(
    m: f64,
    m_p: f64,
    p_norm_p: f64,
    params: &ModelParams,
) -> Result<BoundsReport> {
    let (p, q, beta) = (params.p, params.q, params.beta);
    let g0 = params.g0();
    let g1 = params.kirchhoff.g_unchecked(1.0);
    let alpha_beta = params.alpha_beta()?;
    let ts = tau_statement(params, m_p);
    let tp = tau_proof(params, m_p);
    let cp = params.cp;
    let cp_threshold = min_admissible_cp(m_p, params, ts)?;
    let cp_threshold_proof = min_admissible_cp(m_p, params, tp)?;

    let adams_level_cap = g0 * (q - 4.0) / (4.0 * q)
        * (alpha_beta / (2.0 * (params.alpha0 + params.delta))).powf(1.0 - beta);
    let aux_norm_cap = p * q / (p - q) * m_p;
    let norm_level_cap_statement = power_max(ts, cp, p) * p_norm_p;
    let norm_level_cap_proof = power_max(tp, cp, p) * p_norm_p;
    let aux_level_cap_statement = power_max(ts, cp, p) * aux_norm_cap;
    let aux_level_cap_proof = power_max(tp, cp, p) * aux_norm_cap;

    let cp_admissible = cp > cp_threshold;
    let chain_ok = norm_level_cap_statement <= aux_level_cap_statement + BOUND_SLACK
        && norm_level_cap_proof <= aux_level_cap_proof + BOUND_SLACK;

    Ok(BoundsReport {
        m,
        m_p,
        p_norm_p,
        cp,
        g0,
        g1,
        alpha_beta,
        tau_statement: ts,
        tau_proof: tp,
        cp_threshold,
        cp_threshold_proof,
        adams_level_cap,
        aux_norm_cap,
        norm_level_cap_statement,
        norm_level_cap_proof,
        aux_level_cap_statement,
        aux_level_cap_proof,
        aux_norm_ok: p_norm_p <= aux_norm_cap + BOUND_SLACK,
        norm_level_ok: m <= norm_level_cap_proof + BOUND_SLACK,
        aux_level_ok: m <= aux_level_cap_proof + BOUND_SLACK,
        cp_admissible,
        adams_level_ok: cp_admissible.then_some(m <= adams_level_cap + BOUND_SLACK),
        chain_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_max_oracle() {
        assert!((power_max(1.0, 2.0, 6.0) - 2.0 / 3.0).abs() < 1e-15);
        // brute force over xi
        let (a, cp, p) = (0.7, 3.0, 5.5);
        let best = (1..200_000)
            .map(|i| i as f64 * 1e-5)
            .map(|x| a * x * x - cp * x.powf(p) / p)
            .fold(f64::MIN, f64::max);
        assert!((power_max(a, cp, p) - best).abs() < 1e-9);
    }

    #[test]
    fn adams_cap_default() {
        let r = level_bounds_from(0.0, 1.0, 1.0, &ModelParams::default()).unwrap();
        let want = 0.05 * (64.0 * std::f64::consts::PI.powi(4) / 2.2).sqrt();
        assert!((r.adams_level_cap - want).abs() < 1e-12);
        assert!((r.adams_level_cap - 2.6617).abs() < 1e-4);
    }

    #[test]
    fn threshold_limits_and_monotonicity() {
        let params = ModelParams::default();
        assert_eq!(
            min_admissible_cp(0.0, &params, tau_statement(&params, 0.0)).unwrap(),
            1.0
        );
        let mut prev = 1.0;
        for k in 0..20 {
            let m_p = 1e-3 * 2f64.powi(k);
            let t = min_admissible_cp(m_p, &params, tau_statement(&params, m_p)).unwrap();
            assert!(t >= prev);
            prev = t;
        }
        assert!(min_admissible_cp(
            1.0,
            &ModelParams {
                beta: 0.0,
                ..params
            },
            1.0
        )
        .is_err());
    }

    #[test]
    fn taus() {
        let params = ModelParams::default();
        // g(1) = 2, g0 = 1
        assert!((tau_statement(&params, 1.0) - 7.0).abs() < 1e-15);
        assert!((tau_proof(&params, 1.0) - 16.0).abs() < 1e-15);
    }
}
