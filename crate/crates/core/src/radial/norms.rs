//! Weight, integrals and norms of the weighted space of clamped radial
//! functions on the unit ball of R^4.

use std::f64::consts::{E, PI};

use super::function::RadialFunction;
use crate::error::{invalid, Result};

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&beta) {
        return Err(invalid("beta", format!("must lie in [0, 1), got {beta}")));
    }
    Ok(())
}

/// Logarithmic weight `(log(e/r))^beta = (1 - ln r)^beta`.
///
/// `beta = 0` is accepted as a degenerate mode (weight identically 1).
pub fn weight(r: f64, beta: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(invalid("r", format!("must lie in (0, 1], got {r}")));
    }
    check_beta(beta)?;
    Ok(weight_unchecked(r, beta))
}

#[inline]
pub(crate) fn weight_unchecked(r: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        1.0
    } else {
        (1.0 - r.ln()).powf(beta)
    }
}

/// `int_B v dx` for a radial field.
pub fn ball_integral(v: &RadialFunction) -> f64 {
    v.grid().ball_integral(v.values())
}

/// `<u, v> = int_B w(x) Δu Δv dx`.
pub fn w_inner(u: &RadialFunction, v: &RadialFunction, beta: f64) -> Result<f64> {
    u.check_grid(v)?;
    check_beta(beta)?;
    let lu = u.clamped_laplacian();
    let lv = if std::ptr::eq(u, v) {
        lu.clone()
    } else {
        v.clamped_laplacian()
    };
    let grid = u.grid();
    let integrand: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(lu.values().iter().zip(lv.values()))
        .map(|(&r, (a, b))| weight_unchecked(r, beta) * a * b)
        .collect();
    Ok(grid.ball_integral(&integrand))
}

/// `||u|| = (int_B w |Δu|^2 dx)^(1/2)`.
pub fn w_norm(u: &RadialFunction, beta: f64) -> Result<f64> {
    Ok(w_inner(u, u, beta)?.max(0.0).sqrt())
}

/// `|u|_s = (int_B |u|^s dx)^(1/s)`, `s >= 1`.
pub fn lebesgue_norm(u: &RadialFunction, s: f64) -> Result<f64> {
    if !(s >= 1.0) {
        return Err(invalid("s", format!("must be >= 1, got {s}")));
    }
    let integrand: Vec<f64> = u.values().iter().map(|v| v.abs().powf(s)).collect();
    Ok(u.grid().ball_integral(&integrand).powf(1.0 / s))
}

/// `(int u^2 + int |∇u|^2 + int w |Δu|^2)^(1/2)`.
pub fn full_sobolev_norm(u: &RadialFunction, beta: f64) -> Result<f64> {
    let du = u.derivative();
    let l2: Vec<f64> = u.values().iter().map(|v| v * v).collect();
    let h1: Vec<f64> = du.values().iter().map(|v| v * v).collect();
    let grid = u.grid();
    Ok((grid.ball_integral(&l2) + grid.ball_integral(&h1) + w_inner(u, u, beta)?).sqrt())
}

/// Coefficient `c(r)` of the radial pointwise estimate `|u(r)| <= c(r) ||u||`:
/// `(1 / (2 sqrt 2 pi)) |log(e/r)^(1-beta) - 1|^(1/2) / sqrt(1 - beta)`.
pub fn pointwise_bound_coeff(r: f64, beta: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(invalid("r", format!("must lie in (0, 1), got {r}")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid("beta", format!("must lie in (0, 1), got {beta}")));
    }
    Ok(pointwise_bound_coeff_unchecked(r, beta))
}

pub(crate) fn pointwise_bound_coeff_unchecked(r: f64, beta: f64) -> f64 {
    let log_term = (E / r).ln().powf(1.0 - beta);
    (log_term - 1.0).abs().sqrt() / (1.0 - beta).sqrt() / (2.0 * 2f64.sqrt() * PI)
}
