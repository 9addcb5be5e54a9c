//! Exact solvers for small instances and the fractional walk cover used to
//! audit the target-group reduction.

mod exact;
mod fractional;

pub use exact::{exact_cvrp, exact_forward_walk_cost, exact_vrtg, CVRP_LIMIT, CVRP_MAX, VRTG_LIMIT, VRTG_PATH_LIMIT};
pub use fractional::{
    build_weak_fractional, check_weak_fractional, zeta, FractionalReport, FractionalWalk, Split, WalkKind, WeakFractional,
};
