use std::collections::HashMap;
use std::fmt::Debug;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::quadrature::integrate;
use crate::error::{invalid, Error, Result};

/// Largest admissible exponent `alpha0 |t|^gamma` (natural-log units).
pub const EXP_GUARD: f64 = 700.0;

/// Relative tolerance for the quadrature of the exponential primitive.
pub const PRIMITIVE_RTOL: f64 = 1e-10;

const CACHE_LIMIT: usize = 1 << 20;

/// A scalar nonlinearity `f` with primitive `F`, odd in `t`.
pub trait Nonlinearity: Send + Sync + Debug {
    fn f(&self, t: f64) -> Result<f64>;

    /// `f'(t)`, used for Newton polishing of projections.
    fn f_prime(&self, t: f64) -> Result<f64>;

    #[allow(non_snake_case)]
    fn F(&self, t: f64) -> Result<f64>;

    /// Coefficient of the pure-power lower bound `sgn(t) f(t) >= C_p |t|^{p-1}`.
    fn cp(&self) -> f64;

    fn p(&self) -> f64;

    /// Largest `|t|` at which `f` may be evaluated.
    fn t_max(&self) -> f64 {
        f64::INFINITY
    }
}

/// `f(t) = C_p |t|^{p-2} t + |t|^{p-2} t exp(alpha0 |t|^gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    pub cp: f64,
    pub p: f64,
    pub alpha0: f64,
    pub gamma: f64,
}

/// The critical nonlinearity with a memoized primitive.
#[derive(Debug)]
pub struct CriticalNonlinearity {
    spec: NonlinearitySpec,
    cache: Mutex<HashMap<u64, f64>>,
}

impl Clone for CriticalNonlinearity {
    fn clone(&self) -> Self {
        CriticalNonlinearity::from_spec(self.spec)
    }
}

impl CriticalNonlinearity {
    pub fn new(spec: NonlinearitySpec) -> Result<Self> {
        if !(spec.p > 1.0 && spec.p.is_finite()) {
            return Err(invalid("p", format!("must exceed 1, got {}", spec.p)));
        }
        if !(spec.cp >= 0.0 && spec.cp.is_finite()) {
            return Err(invalid(
                "Cp",
                format!("must be non-negative, got {}", spec.cp),
            ));
        }
        if !(spec.alpha0 >= 0.0 && spec.alpha0.is_finite()) {
            return Err(invalid(
                "alpha0",
                format!("must be non-negative, got {}", spec.alpha0),
            ));
        }
        if !(spec.gamma > 0.0 && spec.gamma.is_finite()) {
            return Err(invalid(
                "gamma",
                format!("must be positive, got {}", spec.gamma),
            ));
        }
        Ok(Self::from_spec(spec))
    }

    fn from_spec(spec: NonlinearitySpec) -> Self {
        CriticalNonlinearity {
            spec,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn spec(&self) -> &NonlinearitySpec {
        &self.spec
    }

    fn exponent(&self, a: f64) -> Result<f64> {
        let e = self.spec.alpha0 * a.powf(self.spec.gamma);
        if e > EXP_GUARD || e.is_nan() {
            return Err(Error::Range {
                value: a,
                exponent: e,
                limit: EXP_GUARD,
            });
        }
        Ok(e)
    }

    /// `E(a) = int_0^a s^{p-1} exp(alpha0 s^gamma) ds` for `a >= 0`.
    pub fn exponential_primitive(&self, a: f64) -> Result<f64> {
        self.exponent(a)?;
        if a == 0.0 {
            return Ok(0.0);
        }
        let key = a.to_bits();
        if let Some(&v) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(v);
        }
        let NonlinearitySpec {
            p, alpha0, gamma, ..
        } = self.spec;
        let value = if alpha0 == 0.0 {
            a.powf(p) / p
        } else {
            integrate(
                |s| s.powf(p - 1.0) * (alpha0 * s.powf(gamma)).exp(),
                0.0,
                a,
                PRIMITIVE_RTOL,
            )
        };
        let mut cache = self.cache.lock().expect("cache poisoned");
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, value);
        Ok(value)
    }

    pub fn cache_len(&self) -> usize {
        self.cache.lock().expect("cache poisoned").len()
    }
}

impl Nonlinearity for CriticalNonlinearity {
    fn f(&self, t: f64) -> Result<f64> {
        let a = t.abs();
        let e = self.exponent(a)?;
        if a == 0.0 {
            return Ok(0.0);
        }
        Ok(t.signum() * a.powf(self.spec.p - 1.0) * (self.spec.cp + e.exp()))
    }

    fn f_prime(&self, t: f64) -> Result<f64> {
        let a = t.abs();
        let e = self.exponent(a)?;
        let NonlinearitySpec {
            cp,
            p,
            alpha0,
            gamma,
        } = self.spec;
        if a == 0.0 && p > 2.0 {
            return Ok(0.0);
        }
        let ex = e.exp();
        Ok((p - 1.0) * a.powf(p - 2.0) * (cp + ex) + alpha0 * gamma * a.powf(p + gamma - 2.0) * ex)
    }

    fn F(&self, t: f64) -> Result<f64> {
        let a = t.abs();
        let power = self.spec.cp * a.powf(self.spec.p) / self.spec.p;
        Ok(power + self.exponential_primitive(a)?)
    }

    fn cp(&self) -> f64 {
        self.spec.cp
    }

    fn p(&self) -> f64 {
        self.spec.p
    }

    fn t_max(&self) -> f64 {
        if self.spec.alpha0 == 0.0 {
            f64::INFINITY
        } else {
            (EXP_GUARD / self.spec.alpha0).powf(1.0 / self.spec.gamma)
        }
    }
}

/// `f(t) = c |t|^{p-2} t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerNonlinearity {
    pub coeff: f64,
    pub p: f64,
    /// Value reported by [`Nonlinearity::cp`]; may differ from `coeff` to
    /// model a nonlinearity that violates its claimed lower bound.
    pub claimed_cp: f64,
}

impl Nonlinearity for PowerNonlinearity {
    fn f(&self, t: f64) -> Result<f64> {
        Ok(self.coeff * t.signum() * t.abs().powf(self.p - 1.0))
    }

    fn f_prime(&self, t: f64) -> Result<f64> {
        Ok(self.coeff * (self.p - 1.0) * t.abs().powf(self.p - 2.0))
    }

    fn F(&self, t: f64) -> Result<f64> {
        Ok(self.coeff * t.abs().powf(self.p) / self.p)
    }

    fn cp(&self) -> f64 {
        self.claimed_cp
    }

    fn p(&self) -> f64 {
        self.p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_f() -> CriticalNonlinearity {
        CriticalNonlinearity::new(NonlinearitySpec {
            cp: 2.0,
            p: 6.0,
            alpha0: 1.0,
            gamma: 4.0,
        })
        .unwrap()
    }

    /// sum_k alpha0^k a^{p + gamma k} / (k! (p + gamma k))
    fn series_primitive(a: f64, p: f64, alpha0: f64, gamma: f64) -> f64 {
        let mut sum = 0.0;
        let mut coeff = 1.0;
        for k in 0..200 {
            if k > 0 {
                coeff *= alpha0 * a.powf(gamma) / k as f64;
            }
            let e = p + gamma * k as f64;
            let term = coeff * a.powf(p) / e;
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        sum
    }

    #[test]
    fn direct_value() {
        let f = default_f();
        let expected = 2.0 * 0.5f64.powi(5) + 0.5f64.powi(5) * 0.0625f64.exp();
        assert!((f.f(0.5).unwrap() - expected).abs() < 1e-15);
        assert!((f.f(0.5).unwrap() - 0.0957654).abs() < 1e-6);
        assert_eq!(f.f(0.0).unwrap(), 0.0);
        assert_eq!(f.F(0.0).unwrap(), 0.0);
    }

    #[test]
    fn primitive_matches_series() {
        let f = default_f();
        for &a in &[1e-3, 0.1, 0.5, 1.0, 1.5, 2.0, 2.5] {
            let got = f.exponential_primitive(a).unwrap();
            let want = series_primitive(a, 6.0, 1.0, 4.0);
            assert!((got - want).abs() <= 1e-10 * want, "a={a}: {got} {want}");
        }
    }

    #[test]
    fn degenerate_alpha_zero() {
        let f = CriticalNonlinearity::new(NonlinearitySpec {
            cp: 3.0,
            p: 5.0,
            alpha0: 0.0,
            gamma: 2.0,
        })
        .unwrap();
        for &t in &[-2.0, 0.3, 7.0] {
            let want = 4.0 * f64::abs(t).powi(5) / 5.0;
            assert!((f.F(t).unwrap() - want).abs() < 1e-13 * want);
        }
    }

    #[test]
    fn overflow_guard() {
        let f = default_f();
        let limit = f.t_max();
        assert!(f.f(0.999 * limit).is_ok());
        assert!(matches!(f.f(1.001 * limit), Err(Error::Range { .. })));
        assert!(matches!(f.F(-1.001 * limit), Err(Error::Range { .. })));
        assert!(f.f(f64::NAN).is_err());
    }

    #[test]
    fn derivative_of_f() {
        let f = default_f();
        for &t in &[-1.7, -0.4, 0.2, 0.9, 2.1] {
            let h = 1e-6;
            let fd = (f.f(t + h).unwrap() - f.f(t - h).unwrap()) / (2.0 * h);
            let d = f.f_prime(t).unwrap();
            assert!((fd - d).abs() < 1e-7 * d.abs().max(1.0), "t={t}: {fd} {d}");
        }
    }

    #[test]
    fn cache_is_used() {
        let f = default_f();
        let a = f.F(0.7).unwrap();
        let b = f.F(-0.7).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(f.cache_len(), 1);
    }

    #[test]
    fn rejects_bad_spec() {
        let base = NonlinearitySpec {
            cp: 2.0,
            p: 6.0,
            alpha0: 1.0,
            gamma: 4.0,
        };
        assert!(CriticalNonlinearity::new(NonlinearitySpec { p: 1.0, ..base }).is_err());
        assert!(CriticalNonlinearity::new(NonlinearitySpec { cp: -1.0, ..base }).is_err());
        assert!(CriticalNonlinearity::new(NonlinearitySpec {
            alpha0: f64::NAN,
            ..base
        })
        .is_err());
    }
}
