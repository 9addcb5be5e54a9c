//! Approximation algorithms for capacitated vehicle routing with unit capacity.
//!
//! Two solvers are provided. The classical one partitions a traveling
//! salesman tour into capacity-feasible depot tours. The clustering one
//! detects groups of far customers, routes them through a vehicle routing
//! problem with target groups, pairs path endpoints by a matching and then
//! partitions the combined tour. [`pipeline::solve_best`] runs both.
//!
//! Every algorithm is generic over the [`Scalar`] type (`f64` or `f32`).
//! Exact exponential-time solvers in [`oracle`] serve as test references.

pub mod clustering;
pub mod error;
pub mod flow;
pub mod generate;
pub mod instance;
pub mod io;
pub mod matching;
pub mod oracle;
pub mod partition;
pub mod pipeline;
pub mod scalar;
pub mod solution;
pub mod solver;
pub mod tsp;
pub mod verify;
pub mod vrtg;

pub use clustering::{build_vrtg_instance, compute_kappa, peak_cluster, small_cluster_slack, ClusterParams, PeakCluster, VrtgInstance};
pub use error::{Error, Result};
pub use generate::{generate_instance, DemandModel, Generated};
pub use instance::{DepotOrder, Instance, Metric, Vertex, DEPOT};
pub use matching::{exact_matching, group_matching, tree_matching, Matching};
pub use oracle::{build_weak_fractional, check_weak_fractional, exact_cvrp, exact_forward_walk_cost, exact_vrtg, WeakFractional};
pub use partition::{best_partition, candidate_thetas, partition_bound, partition_tour, partition_tour_dp, PartitionMethod, PartitionResult};
pub use pipeline::{solve_best, solve_classical, solve_new, PipelineConfig, RunReport, Winner};
pub use scalar::Scalar;
pub use solution::{Solution, Tour, Variant};
pub use solver::{cheapest_forward_walk, compute_nice_subset, connect_removed, solve_vrtg, solve_vrtg_detailed, NiceSubsetResult, VrtgRun};
pub use tsp::{christofides_tour, double_tree_tour, euler_shortcut, held_karp, TspBackend, TspTour};
pub use verify::{verify_solution, VerificationReport, Violation};
pub use vrtg::{solution_to_walks, verify_vrtg, walks_to_solution, VrtgPath, VrtgSolution, VrtgViolation, WalkSolution};

pub type Instance64 = Instance<f64>;
pub type Instance32 = Instance<f32>;
pub type Solution64 = Solution<f64>;
pub type Solution32 = Solution<f32>;
pub type Tour64 = Tour<f64>;
pub type Tour32 = Tour<f32>;
pub type TspTour64 = TspTour<f64>;
pub type TspTour32 = TspTour<f32>;
pub type VrtgInstance64 = VrtgInstance<f64>;
pub type VrtgInstance32 = VrtgInstance<f32>;
pub type ClusterParams64 = ClusterParams<f64>;
pub type ClusterParams32 = ClusterParams<f32>;
pub type PipelineConfig64 = PipelineConfig<f64>;
pub type PipelineConfig32 = PipelineConfig<f32>;
