//! Nehari projection, ground-state search and level bounds.

mod bounds;
mod descent;
mod projection;

pub use bounds::{
    level_bounds, min_admissible_cp, power_max, tau_proof, tau_statement, BoundsReport, BOUND_SLACK,
};
pub use descent::{
    aux_ground_state, ground_state, start_direction, AuxResult, GroundStateResult, SearchConfig,
    StartReport,
};
pub use projection::{
    fibering_root, project, project_from, t_leq_one_check, NehariPoint, MIN_DIRECTION_NORM,
    MIN_SCALED_NORM, ROOT_RTOL,
};
