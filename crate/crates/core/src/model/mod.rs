//! Scalar ingredients of the model: the Kirchhoff function, the critical
//! nonlinearity, the growth constants and sampled hypothesis checks.

mod constants;
mod hypotheses;
mod kirchhoff;
mod nonlinearity;
mod params;
pub mod quadrature;

pub use constants::{alpha_beta, gamma_exp};
pub use hypotheses::{
    check_hypotheses, check_hypotheses_with, HypothesisCheck, HypothesisReport, CHECK_RTOL,
    MIN_SAMPLES,
};
pub use kirchhoff::KirchhoffSpec;
pub use nonlinearity::{
    CriticalNonlinearity, Nonlinearity, NonlinearitySpec, PowerNonlinearity, EXP_GUARD,
    PRIMITIVE_RTOL,
};
pub use params::{ModelParams, PARAM_KEYS};
