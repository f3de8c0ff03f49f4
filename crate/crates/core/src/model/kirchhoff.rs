use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Kirchhoff function `g` and its primitive `G(t) = int_0^t g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KirchhoffSpec {
    /// `g(t) = g0 + a t`.
    Affine { g0: f64, a: f64 },
    /// `g(t) = 1 + ln(1 + t)`.
    LogType,
}

impl Default for KirchhoffSpec {
    fn default() -> Self {
        KirchhoffSpec::Affine { g0: 1.0, a: 1.0 }
    }
}

impl KirchhoffSpec {
    pub fn g0(&self) -> f64 {
        match *self {
            KirchhoffSpec::Affine { g0, .. } => g0,
            KirchhoffSpec::LogType => 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let KirchhoffSpec::Affine { g0, a } = *self {
            if !(g0 > 0.0 && g0.is_finite()) {
                return Err(invalid(
                    "kirchhoff.g0",
                    format!("must be positive, got {g0}"),
                ));
            }
            if !(a >= 0.0 && a.is_finite()) {
                return Err(invalid(
                    "kirchhoff.a",
                    format!("must be non-negative, got {a}"),
                ));
            }
        }
        Ok(())
    }

    pub fn g(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(self.g_unchecked(t))
    }

    #[allow(non_snake_case)]
    pub fn G(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(self.primitive_unchecked(t))
    }

    #[inline]
    pub(crate) fn g_unchecked(&self, t: f64) -> f64 {
        match *self {
            KirchhoffSpec::Affine { g0, a } => g0 + a * t,
            KirchhoffSpec::LogType => 1.0 + t.ln_1p(),
        }
    }

    #[inline]
    pub(crate) fn primitive_unchecked(&self, t: f64) -> f64 {
        match *self {
            KirchhoffSpec::Affine { g0, a } => g0 * t + 0.5 * a * t * t,
            KirchhoffSpec::LogType => (1.0 + t) * t.ln_1p(),
        }
    }

    /// `g'(t)`.
    #[inline]
    pub(crate) fn derivative_unchecked(&self, t: f64) -> f64 {
        match *self {
            KirchhoffSpec::Affine { a, .. } => a,
            KirchhoffSpec::LogType => 1.0 / (1.0 + t),
        }
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(invalid("t", format!("must be >= 0, got {t}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_values() {
        let k = KirchhoffSpec::Affine { g0: 1.0, a: 1.0 };
        assert_eq!(k.g(2.0).unwrap(), 3.0);
        assert_eq!(k.G(2.0).unwrap(), 4.0);
        assert_eq!(k.G(0.0).unwrap(), 0.0);
        assert!(k.g(-1.0).is_err());
    }

    #[test]
    fn superadditivity_defect_is_st() {
        let k = KirchhoffSpec::Affine { g0: 1.0, a: 1.0 };
        for &s in &[0.0, 0.3, 1.0, 4.5] {
            for &t in &[0.0, 0.7, 2.0, 9.0] {
                let defect = k.G(s + t).unwrap() - k.G(s).unwrap() - k.G(t).unwrap();
                assert!((defect - s * t).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn primitive_derivative_matches_g() {
        for k in [
            KirchhoffSpec::Affine { g0: 2.0, a: 0.5 },
            KirchhoffSpec::LogType,
        ] {
            assert_eq!(k.G(0.0).unwrap(), 0.0);
            for i in 0..=50 {
                let t = 0.2 * i as f64;
                let h = 1e-5 * (1.0 + t);
                let lo = (t - h).max(0.0);
                let fd = (k.primitive_unchecked(t + h) - k.primitive_unchecked(lo)) / (t + h - lo);
                let g = k.g_unchecked(t);
                let tol = if lo == 0.0 { 1e-5 } else { 1e-8 };
                assert!((fd - g).abs() <= tol * g, "{k:?} t={t}: {fd} vs {g}");
            }
        }
    }
}
