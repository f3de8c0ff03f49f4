use crate::energy::{EnergyFunctional, FiberingMap};
use crate::error::{Error, Result};
use crate::radial::RadialFunction;

/// Relative bracket width at which bisection stops.
pub const ROOT_RTOL: f64 = 1e-12;

/// Directions with a smaller norm are treated as zero.
pub const MIN_DIRECTION_NORM: f64 = 1e-100;

/// Halving stops once `t |u|` falls below this value.
pub const MIN_SCALED_NORM: f64 = 1e-100;

const MAX_DOUBLINGS: usize = 2000;
const MAX_BISECTIONS: usize = 200;
const NEWTON_STEPS: usize = 4;

/// A direction together with its unique Nehari scale.
#[derive(Debug, Clone)]
pub struct NehariPoint {
    pub direction: RadialFunction,
    pub t_u: f64,
    pub projected: RadialFunction,
    pub energy: f64,
    pub residual: f64,
    /// `|t_u u|`.
    pub norm: f64,
}

/// Unique positive zero of `map.deriv`, bracketed by doubling or halving
/// from `t0`, then bisected and polished by safeguarded Newton steps.
pub fn fibering_root(map: &impl FiberingMap, t0: f64) -> Result<f64> {
    let scale = map.direction_norm();
    let lower_limit = MIN_SCALED_NORM / scale;
    let no_bracket = |lower: f64, upper: f64, reason: String| Error::NoBracket {
        lower,
        upper,
        reason,
    };

    let mut t0 = t0;
    let d0 = loop {
        match map.deriv(t0) {
            Ok(d) => break d,
            Err(Error::Range { .. }) if t0 > lower_limit => t0 *= 0.5,
            Err(e) => return Err(e),
        }
    };
    if d0 == 0.0 {
        return Ok(t0);
    }
    let (mut lo, mut hi) = (t0, t0);
    if d0 > 0.0 {
        let mut found = false;
        for _ in 0..MAX_DOUBLINGS {
            lo = hi;
            hi *= 2.0;
            match map.deriv(hi) {
                Ok(d) if d <= 0.0 => {
                    if d == 0.0 {
                        return Ok(hi);
                    }
                    found = true;
                    break;
                }
                Ok(_) => {}
                Err(Error::Range { .. }) => {
                    // search below the overflow guard
                    let mut cap = hi;
                    for _ in 0..MAX_BISECTIONS {
                        if cap - lo <= ROOT_RTOL * cap {
                            break;
                        }
                        let mid = 0.5 * (lo + cap);
                        match map.deriv(mid) {
                            Ok(d) if d <= 0.0 => {
                                hi = mid;
                                found = true;
                                break;
                            }
                            Ok(_) => lo = mid,
                            Err(Error::Range { .. }) => cap = mid,
                            Err(e) => return Err(e),
                        }
                    }
                    if !found {
                        return Err(no_bracket(
                            lower_limit,
                            cap,
                            "derivative stays positive up to the overflow guard".into(),
                        ));
                    }
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if !found {
            return Err(no_bracket(
                lower_limit,
                hi,
                "derivative stays positive".into(),
            ));
        }
    } else {
        let mut found = false;
        while lo > lower_limit {
            hi = lo;
            lo *= 0.5;
            let d = map.deriv(lo)?;
            if d >= 0.0 {
                if d == 0.0 {
                    return Ok(lo);
                }
                found = true;
                break;
            }
        }
        if !found {
            return Err(no_bracket(
                lower_limit,
                hi,
                "derivative stays negative".into(),
            ));
        }
    }

    // deriv(lo) > 0 > deriv(hi)
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= ROOT_RTOL * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let d = map.deriv(mid)?;
        if d > 0.0 {
            lo = mid;
        } else if d < 0.0 {
            hi = mid;
        } else {
            return Ok(mid);
        }
    }

    let mut t = 0.5 * (lo + hi);
    let mut d = map.deriv(t)?;
    for _ in 0..NEWTON_STEPS {
        let d2 = map.second_deriv(t)?;
        if !(d2 < 0.0) {
            break;
        }
        let next = t - d / d2;
        if !(next > lo && next < hi) {
            break;
        }
        let dn = map.deriv(next)?;
        if dn.abs() >= d.abs() {
            break;
        }
        t = next;
        d = dn;
    }
    Ok(t)
}

/// Nehari projection `t_u u` of a nonzero direction.
pub fn project(functional: &EnergyFunctional, u: &RadialFunction) -> Result<NehariPoint> {
    project_from(functional, u, 1.0)
}

/// As [`project`], starting the bracket search at `t0`.
pub fn project_from(
    functional: &EnergyFunctional,
    u: &RadialFunction,
    t0: f64,
) -> Result<NehariPoint> {
    let fiber = functional.fiber(u)?;
    let norm = fiber.direction_norm();
    if !(norm > MIN_DIRECTION_NORM) {
        return Err(Error::Precondition(format!(
            "direction norm {norm:e} is below {MIN_DIRECTION_NORM:e}"
        )));
    }
    let t_u = fibering_root(&fiber, t0)?;
    let energy = fiber.value(t_u)?;
    let residual = t_u * fiber.deriv(t_u)?;
    Ok(NehariPoint {
        direction: u.clone(),
        t_u,
        projected: u.scaled(t_u),
        energy,
        residual,
        norm: t_u * norm,
    })
}

/// Whether a direction with nonpositive Nehari residual projects with
/// `t_u <= 1`.
pub fn t_leq_one_check(functional: &EnergyFunctional, u: &RadialFunction) -> Result<bool> {
    let residual = functional.nehari_residual(u)?;
    if residual > 0.0 {
        return Err(Error::Precondition(format!(
            "Nehari residual must be <= 0, got {residual:e}"
        )));
    }
    Ok(project(functional, u)?.t_u <= 1.0 + 1e-10)
}
