use serde::{Deserialize, Serialize};

use super::constants::{alpha_beta, gamma_exp};
use super::kirchhoff::KirchhoffSpec;
use super::nonlinearity::{CriticalNonlinearity, NonlinearitySpec};
use crate::error::{invalid, Result};

/// Scalar parameters of the problem.
///
/// Serialized as a flat JSON object with keys `beta`, `q`, `p`, `Cp`,
/// `alpha0`, `delta`, `kirchhoff.kind`, `kirchhoff.g0`, `kirchhoff.a`.
/// Missing keys take their default values; unknown keys are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "FlatParams", try_from = "FlatParams")]
pub struct ModelParams {
    pub beta: f64,
    pub q: f64,
    pub p: f64,
    pub cp: f64,
    pub alpha0: f64,
    pub delta: f64,
    pub kirchhoff: KirchhoffSpec,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            beta: 0.5,
            q: 5.0,
            p: 6.0,
            cp: 2.0,
            alpha0: 1.0,
            delta: 0.1,
            kirchhoff: KirchhoffSpec::default(),
        }
    }
}

/// JSON keys accepted by [`ModelParams`].
pub const PARAM_KEYS: [&str; 9] = [
    "beta",
    "q",
    "p",
    "Cp",
    "alpha0",
    "delta",
    "kirchhoff.kind",
    "kirchhoff.g0",
    "kirchhoff.a",
];

impl ModelParams {
    /// Checks every ordering and sign constraint, naming the offending key.
    ///
    /// `beta = 0` is accepted as a degenerate mode with unit weight.
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("beta", self.beta),
            ("q", self.q),
            ("p", self.p),
            ("Cp", self.cp),
            ("alpha0", self.alpha0),
            ("delta", self.delta),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(invalid(name, format!("must be finite, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(invalid(
                "beta",
                format!("must lie in [0, 1), got {}", self.beta),
            ));
        }
        if self.q <= 4.0 {
            return Err(invalid("q", format!("must exceed 4, got {}", self.q)));
        }
        if self.p <= self.q {
            return Err(invalid(
                "p",
                format!("must exceed q = {}, got {}", self.q, self.p),
            ));
        }
        if self.cp <= 1.0 {
            return Err(invalid("Cp", format!("must exceed 1, got {}", self.cp)));
        }
        if self.alpha0 <= 0.0 {
            return Err(invalid(
                "alpha0",
                format!("must be positive, got {}", self.alpha0),
            ));
        }
        if self.delta <= 0.0 {
            return Err(invalid(
                "delta",
                format!("must be positive, got {}", self.delta),
            ));
        }
        self.kirchhoff.validate()
    }

    /// Exponent in the Ambrosetti–Rabinowitz condition; the pure-power
    /// part makes `theta = p` sharp.
    pub fn theta(&self) -> f64 {
        self.p
    }

    pub fn gamma(&self) -> Result<f64> {
        gamma_exp(self.beta)
    }

    pub fn alpha_beta(&self) -> Result<f64> {
        alpha_beta(self.beta)
    }

    pub fn g0(&self) -> f64 {
        self.kirchhoff.g0()
    }

    pub fn nonlinearity_spec(&self) -> Result<NonlinearitySpec> {
        Ok(NonlinearitySpec {
            cp: self.cp,
            p: self.p,
            alpha0: self.alpha0,
            gamma: self.gamma()?,
        })
    }

    pub fn nonlinearity(&self) -> Result<CriticalNonlinearity> {
        CriticalNonlinearity::new(self.nonlinearity_spec()?)
    }

    pub fn with_cp(self, cp: f64) -> Self {
        ModelParams { cp, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum KirchhoffKind {
    Affine,
    LogType,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FlatParams {
    beta: f64,
    q: f64,
    p: f64,
    #[serde(rename = "Cp")]
    cp: f64,
    alpha0: f64,
    delta: f64,
    #[serde(rename = "kirchhoff.kind")]
    kind: KirchhoffKind,
    #[serde(rename = "kirchhoff.g0", skip_serializing_if = "Option::is_none")]
    g0: Option<f64>,
    #[serde(rename = "kirchhoff.a", skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
}

impl Default for FlatParams {
    fn default() -> Self {
        FlatParams {
            g0: None,
            a: None,
            ..ModelParams::default().into()
        }
    }
}

impl From<ModelParams> for FlatParams {
    fn from(m: ModelParams) -> Self {
        let (kind, g0, a) = match m.kirchhoff {
            KirchhoffSpec::Affine { g0, a } => (KirchhoffKind::Affine, Some(g0), Some(a)),
            KirchhoffSpec::LogType => (KirchhoffKind::LogType, None, None),
        };
        FlatParams {
            beta: m.beta,
            q: m.q,
            p: m.p,
            cp: m.cp,
            alpha0: m.alpha0,
            delta: m.delta,
            kind,
            g0,
            a,
        }
    }
}

impl TryFrom<FlatParams> for ModelParams {
    type Error = String;

    fn try_from(f: FlatParams) -> std::result::Result<Self, String> {
        let kirchhoff = match f.kind {
            KirchhoffKind::Affine => KirchhoffSpec::Affine {
                g0: f.g0.unwrap_or(1.0),
                a: f.a.unwrap_or(1.0),
            },
            KirchhoffKind::LogType => {
                if f.g0.is_some() || f.a.is_some() {
                    return Err("kirchhoff.g0 and kirchhoff.a apply only to kind \"affine\"".into());
                }
                KirchhoffSpec::LogType
            }
        };
        Ok(ModelParams {
            beta: f.beta,
            q: f.q,
            p: f.p,
            cp: f.cp,
            alpha0: f.alpha0,
            delta: f.delta,
            kirchhoff,
        })
    }
}
