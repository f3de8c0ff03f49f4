use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Weighted Adams constant `4 (8 pi^2 (1 - beta))^{1/(1-beta)}`.
pub fn alpha_beta(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid("beta", format!("must lie in (0, 1), got {beta}")));
    }
    Ok(4.0 * (8.0 * PI * PI * (1.0 - beta)).powf(1.0 / (1.0 - beta)))
}

/// Growth exponent `2 / (1 - beta)`.
pub fn gamma_exp(beta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&beta) {
        return Err(invalid("beta", format!("must lie in [0, 1), got {beta}")));
    }
    Ok(2.0 / (1.0 - beta))
}
