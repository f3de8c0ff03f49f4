//! Discretization of radial functions on the unit ball B of R^4.
//!
//! Two schemes share one interface: a spectral scheme that collocates in
//! `s = r^2` (so profiles are even in r and `3u'/r` stays finite at the
//! origin) and a cell-centred finite-difference scheme used as an
//! independent cross-check. Both expose a basis of the clamped subspace
//! `u(1) = u'(1) = 0`.

mod function;
mod grid;
mod norms;
pub mod quadrature;
mod space;

pub use function::{random_profile, RadialFunction, RANDOM_PROFILE_MODES};
pub use grid::{build_grid, GridScheme, RadialGrid, MIN_NODES, SPHERE_AREA};
pub use norms::{
    ball_integral, full_sobolev_norm, lebesgue_norm, pointwise_bound_coeff, w_inner, w_norm, weight,
};
pub use space::{WeightedSpace, MAX_CONDITION};

/// Nodal Laplacian `u'' + (3/r) u'` of a radial function.
pub fn laplacian4(u: &RadialFunction) -> RadialFunction {
    u.laplacian()
}
