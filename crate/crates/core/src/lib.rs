pub mod config;
pub mod energy;
pub mod error;
pub mod model;
pub mod nehari;
pub mod radial;
pub mod run;
pub mod suite;

pub use config::{GridConfig, Overrides, RunConfig};
pub use error::{Error, Result};
pub use model::{KirchhoffSpec, ModelParams, Nonlinearity};
pub use radial::{GridScheme, RadialFunction, RadialGrid, WeightedSpace};
