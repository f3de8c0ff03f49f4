//! Run configuration shared by every command.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{KirchhoffSpec, ModelParams};
use crate::nehari::SearchConfig;
use crate::radial::{GridScheme, MIN_NODES};

/// Grid selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridConfig {
    pub n: usize,
    pub scheme: GridScheme,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n: 64,
            scheme: GridScheme::SpectralEven,
        }
    }
}

/// Everything a command needs: model, grid, search, and whether `Cp` is
/// derived from the auxiliary problem.
///
/// Serializes to a flat JSON object whose keys mirror the CLI flags:
/// `beta`, `q`, `p`, `cp`, `auto-cp`, `alpha0`, `delta`, `kirchhoff`,
/// `g0`, `a`, `n`, `scheme`, `starts`, `max-iter`, `tol`, `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "FlatConfig", try_from = "FlatConfig")]
pub struct RunConfig {
    pub params: ModelParams,
    pub auto_cp: bool,
    pub grid: GridConfig,
    pub search: SearchConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ModelParams::default(),
            auto_cp: true,
            grid: GridConfig::default(),
            search: SearchConfig::default(),
        }
    }
}

/// Flat keys accepted in a config file.
pub const CONFIG_KEYS: [&str; 16] = [
    "beta",
    "q",
    "p",
    "cp",
    "auto-cp",
    "alpha0",
    "delta",
    "kirchhoff",
    "g0",
    "a",
    "n",
    "scheme",
    "starts",
    "max-iter",
    "tol",
    "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum KirchhoffKind {
    Affine,
    LogType,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FlatConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    auto_cp: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kirchhoff: Option<KirchhoffKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scheme: Option<GridScheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    starts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl From<RunConfig> for FlatConfig {
    fn from(c: RunConfig) -> Self {
        let (kind, g0, a) = match c.params.kirchhoff {
            KirchhoffSpec::Affine { g0, a } => (KirchhoffKind::Affine, Some(g0), Some(a)),
            KirchhoffSpec::LogType => (KirchhoffKind::LogType, None, None),
        };
        FlatConfig {
            beta: Some(c.params.beta),
            q: Some(c.params.q),
            p: Some(c.params.p),
            cp: Some(c.params.cp),
            auto_cp: Some(c.auto_cp),
            alpha0: Some(c.params.alpha0),
            delta: Some(c.params.delta),
            kirchhoff: Some(kind),
            g0,
            a,
            n: Some(c.grid.n),
            scheme: Some(c.grid.scheme),
            starts: Some(c.search.starts),
            max_iter: Some(c.search.max_iter),
            tol: Some(c.search.tol),
            seed: Some(c.search.seed),
        }
    }
}

impl TryFrom<FlatConfig> for RunConfig {
    type Error = Error;

    fn try_from(f: FlatConfig) -> Result<Self> {
        let mut c = RunConfig::default();
        c.apply(f)?;
        Ok(c)
    }
}

/// Optional overrides, one per flag; `None` leaves the current value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub beta: Option<f64>,
    pub q: Option<f64>,
    pub p: Option<f64>,
    pub cp: Option<f64>,
    pub auto_cp: bool,
    pub alpha0: Option<f64>,
    pub delta: Option<f64>,
    pub g0: Option<f64>,
    pub a: Option<f64>,
    pub n: Option<usize>,
    pub scheme: Option<GridScheme>,
    pub starts: Option<usize>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

impl RunConfig {
    /// Parses a config file; missing keys keep their defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn apply(&mut self, f: FlatConfig) -> Result<()> {
        let p = &mut self.params;
        set(&mut p.beta, f.beta);
        set(&mut p.q, f.q);
        set(&mut p.p, f.p);
        set(&mut p.alpha0, f.alpha0);
        set(&mut p.delta, f.delta);
        // an explicit cp turns auto-cp off unless auto-cp is given too
        if let Some(cp) = f.cp {
            p.cp = cp;
            self.auto_cp = false;
        }
        set(&mut self.auto_cp, f.auto_cp);
        let kind = f.kirchhoff.unwrap_or(match p.kirchhoff {
            KirchhoffSpec::Affine { .. } => KirchhoffKind::Affine,
            KirchhoffSpec::LogType => KirchhoffKind::LogType,
        });
        p.kirchhoff = match (kind, p.kirchhoff) {
            (KirchhoffKind::LogType, _) => {
                if f.g0.is_some() {
                    return Err(invalid(
                        "g0",
                        "is not used by the log-type Kirchhoff function",
                    ));
                }
                if f.a.is_some() {
                    return Err(invalid(
                        "a",
                        "is not used by the log-type Kirchhoff function",
                    ));
                }
                KirchhoffSpec::LogType
            }
            (KirchhoffKind::Affine, KirchhoffSpec::Affine { g0, a }) => KirchhoffSpec::Affine {
                g0: f.g0.unwrap_or(g0),
                a: f.a.unwrap_or(a),
            },
            (KirchhoffKind::Affine, KirchhoffSpec::LogType) => {
                let KirchhoffSpec::Affine { g0, a } = KirchhoffSpec::default() else {
                    unreachable!("default Kirchhoff function is affine")
                };
                KirchhoffSpec::Affine {
                    g0: f.g0.unwrap_or(g0),
                    a: f.a.unwrap_or(a),
                }
            }
        };
        set(&mut self.grid.n, f.n);
        set(&mut self.grid.scheme, f.scheme);
        set(&mut self.search.starts, f.starts);
        set(&mut self.search.max_iter, f.max_iter);
        set(&mut self.search.tol, f.tol);
        set(&mut self.search.seed, f.seed);
        Ok(())
    }

    /// Applies command-line overrides on top of this config.
    pub fn with_overrides(mut self, o: &Overrides) -> Result<Self> {
        let g0_or_a = o.g0.is_some() || o.a.is_some();
        if g0_or_a && self.params.kirchhoff == KirchhoffSpec::LogType {
            let key = if o.g0.is_some() { "g0" } else { "a" };
            return Err(invalid(
                key,
                "is not used by the log-type Kirchhoff function",
            ));
        }
        self.apply(FlatConfig {
            beta: o.beta,
            q: o.q,
            p: o.p,
            cp: o.cp,
            auto_cp: o.auto_cp.then_some(true),
            alpha0: o.alpha0,
            delta: o.delta,
            kirchhoff: None,
            g0: o.g0,
            a: o.a,
            n: o.n,
            scheme: o.scheme,
            starts: o.starts,
            max_iter: o.max_iter,
            tol: o.tol,
            seed: o.seed,
        })?;
        Ok(self)
    }

    /// Validates every field, naming the offending key.
    ///
    /// With `auto_cp` the stored `cp` is replaced later, so only its
    /// finiteness matters here.
    pub fn validate(&self) -> Result<()> {
        let mut params = self.params;
        if self.auto_cp {
            params.cp = ModelParams::default().cp;
        }
        params.validate().map_err(rename_key)?;
        if self.grid.n < MIN_NODES {
            return Err(invalid(
                "n",
                format!("must be at least {MIN_NODES}, got {}", self.grid.n),
            ));
        }
        self.search.validate().map_err(rename_key)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Maps parameter key names onto the flag spelling used by configs.
fn rename_key(e: Error) -> Error {
    match e {
        Error::InvalidArgument { name, reason } => {
            let name = match name {
                "Cp" => "cp",
                "kirchhoff.g0" => "g0",
                "kirchhoff.a" => "a",
                "max_iter" => "max-iter",
                _ => name,
            };
            Error::InvalidArgument { name, reason }
        }
        other => other,
    }
}
