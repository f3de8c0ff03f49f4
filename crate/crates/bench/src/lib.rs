//! Benchmark fixtures shared by the criterion targets.

use std::sync::Arc;

use nehari_core::model::ModelParams;
use nehari_core::radial::{GridScheme, RadialGrid};

/// Default parameters with a fixed, moderate `C_p` so benchmarks do not
/// depend on an auxiliary solve.
pub fn bench_params() -> ModelParams {
    ModelParams {
        cp: 2.0,
        ..ModelParams::default()
    }
}

pub fn bench_grid(n: usize, scheme: GridScheme) -> Arc<RadialGrid> {
    RadialGrid::new(n, scheme).expect("valid grid")
}
