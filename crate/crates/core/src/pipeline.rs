//! End-to-end solvers.

use std::fmt;

use serde::Serialize;

use crate::clustering::{build_vrtg_instance, ClusterParams};
use crate::error::Result;
use crate::instance::{Instance, Vertex, DEPOT};
use crate::matching::group_matching;
use crate::partition::{best_partition, PartitionMethod};
use crate::scalar::Scalar;
use crate::solution::{Solution, Variant};
use crate::solver::solve_vrtg_detailed;
use crate::tsp::{euler_shortcut, TspBackend};

/// Settings shared by all pipelines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineConfig<T: Scalar = f64> {
    pub params: ClusterParams<T>,
    pub backend: TspBackend,
    pub variant: Variant,
}

impl<T: Scalar> Default for PipelineConfig<T> {
    fn default() -> Self {
        PipelineConfig { params: ClusterParams::default(), backend: TspBackend::default(), variant: Variant::default() }
    }
}

impl<T: Scalar> PipelineConfig<T> {
    pub fn with_backend(mut self, backend: TspBackend) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_params(mut self, params: ClusterParams<T>) -> Self {
        self.params = params;
        self
    }
}

/// Which branch produced the returned solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Winner {
    Classical,
    New,
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Winner::Classical => "classical",
            Winner::New => "new",
        })
    }
}

/// Configuration as recorded in a report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigSummary {
    pub variant: String,
    pub backend: String,
    pub tau: f64,
    pub rho: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

impl ConfigSummary {
    fn of<T: Scalar>(config: &PipelineConfig<T>) -> Self {
        ConfigSummary {
            variant: config.variant.to_string(),
            backend: config.backend.to_string(),
            tau: config.params.tau().as_f64(),
            rho: config.params.rho().as_f64(),
            gamma: config.params.gamma().as_f64(),
            epsilon: config.params.epsilon().as_f64(),
        }
    }
}

/// Stage costs of a run. Stages a branch does not execute are `None`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub winner: Winner,
    pub n: usize,
    /// Tour from the TSP backend (classical branch).
    pub tsp_cost: Option<f64>,
    pub num_targets: Option<usize>,
    pub num_groups: Option<usize>,
    /// Paths of the target-group solution.
    pub vrtg_cost: Option<f64>,
    /// Matching on the odd-degree targets.
    pub matching_cost: Option<f64>,
    /// Shortcut tour through the paths and the matching.
    pub combined_tour_cost: Option<f64>,
    pub classical_cost: Option<f64>,
    pub new_cost: Option<f64>,
    pub final_cost: f64,
    pub tours: usize,
    pub partition_method: String,
    /// `Σ 2·d(v)·c(s, v)`.
    pub lower_bound: f64,
    /// `final_cost / lower_bound` (1 when both are zero).
    pub ratio: f64,
    pub config: ConfigSummary,
}

impl RunReport {
    fn new<T: Scalar>(inst: &Instance<T>, config: &PipelineConfig<T>, winner: Winner, sol: &Solution<T>, method: PartitionMethod) -> Self {
        let lower_bound = inst.radial_lower_bound().as_f64();
        let final_cost = sol.cost().as_f64();
        RunReport {
            winner,
            n: inst.n(),
            tsp_cost: None,
            num_targets: None,
            num_groups: None,
            vrtg_cost: None,
            matching_cost: None,
            combined_tour_cost: None,
            classical_cost: None,
            new_cost: None,
            final_cost,
            tours: sol.len(),
            partition_method: format!("{method:?}").to_lowercase(),
            lower_bound,
            ratio: if lower_bound > 0.0 { final_cost / lower_bound } else { 1.0 },
            config: ConfigSummary::of(config),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// TSP tour from the configured backend, partitioned into depot tours.
pub fn solve_classical<T: Scalar>(inst: &Instance<T>, config: &PipelineConfig<T>) -> Result<(Solution<T>, RunReport)> {
    let tour = config.backend.tour(inst)?;
    let part = best_partition(inst, &tour, config.variant)?;
    let mut report = RunReport::new(inst, config, Winner::Classical, &part.solution, part.method);
    report.tsp_cost = Some(tour.cost().as_f64());
    report.classical_cost = Some(report.final_cost);
    log::debug!("classical: tour {} → {}", tour.cost(), report.final_cost);
    Ok((part.solution, report))
}

/// Routes clustered customers through a target-group instance, closes the
/// paths by a matching on their odd endpoints, shortcuts the union to a tour
/// and partitions it. Without targets this is [`solve_classical`].
pub fn solve_new<T: Scalar>(inst: &Instance<T>, config: &PipelineConfig<T>) -> Result<(Solution<T>, RunReport)> {
    let vrtg = build_vrtg_instance(inst, &config.params);
    if vrtg.num_targets() == 0 {
        log::debug!("no targets; falling back to the classical branch");
        let (sol, mut report) = solve_classical(inst, config)?;
        report.winner = Winner::New;
        report.num_targets = Some(0);
        report.num_groups = Some(0);
        report.new_cost = Some(report.final_cost);
        return Ok((sol, report));
    }
    let run = solve_vrtg_detailed(&vrtg, config.params.gamma())?;
    let ends = run.solution.ends_per_target(&vrtg);
    let odd: Vec<usize> = (0..vrtg.num_targets()).filter(|&k| ends[k] % 2 == 1).collect();
    let matching = group_matching(&vrtg, &odd)?;

    let mut edges: Vec<(Vertex, Vertex)> = Vec::new();
    for path in run.solution.paths() {
        let mut prev = DEPOT;
        for node in path.nodes().into_iter().skip(1) {
            let v = vrtg.position(node);
            edges.push((prev, v));
            prev = v;
        }
    }
    edges.extend(matching.pairs.iter().map(|&(a, b)| (vrtg.position(a), vrtg.position(b))));
    let tour = euler_shortcut(inst, &edges)?;
    debug_assert!(
        tour.cost() <= run.solution.cost() + matching.cost + T::rel_tol(run.solution.cost() + matching.cost),
        "shortcutting increased the cost"
    );
    let part = best_partition(inst, &tour, config.variant)?;
    let mut report = RunReport::new(inst, config, Winner::New, &part.solution, part.method);
    report.num_targets = Some(vrtg.num_targets());
    report.num_groups = Some(vrtg.num_groups());
    report.vrtg_cost = Some(run.solution.cost().as_f64());
    report.matching_cost = Some(matching.cost.as_f64());
    report.combined_tour_cost = Some(tour.cost().as_f64());
    report.new_cost = Some(report.final_cost);
    log::debug!(
        "new: {} targets in {} groups, paths {} + matching {} → tour {} → {}",
        vrtg.num_targets(),
        vrtg.num_groups(),
        run.solution.cost(),
        matching.cost,
        tour.cost(),
        report.final_cost
    );
    Ok((part.solution, report))
}

/// Runs both branches concurrently and returns the cheaper solution; ties go
/// to the classical branch. A failing clustering branch is logged and
/// skipped.
pub fn solve_best<T: Scalar>(inst: &Instance<T>, config: &PipelineConfig<T>) -> Result<(Solution<T>, RunReport)> {
    let (classical, new) = std::thread::scope(|scope| {
        let new = scope.spawn(|| solve_new(inst, config));
        let classical = solve_classical(inst, config);
        (classical, new.join().expect("clustering branch panicked"))
    });
    let (c_sol, c_report) = classical?;
    let (sol, mut report) = match new {
        Ok((n_sol, n_report)) if n_sol.cost() < c_sol.cost() => {
            let mut report = n_report;
            report.tsp_cost = c_report.tsp_cost;
            (n_sol, report)
        }
        Ok((_, n_report)) => {
            let mut report = c_report.clone();
            report.new_cost = n_report.new_cost;
            report.num_targets = n_report.num_targets;
            report.num_groups = n_report.num_groups;
            report.vrtg_cost = n_report.vrtg_cost;
            report.matching_cost = n_report.matching_cost;
            report.combined_tour_cost = n_report.combined_tour_cost;
            (c_sol, report)
        }
        Err(e) => {
            log::warn!("clustering branch failed: {e}");
            (c_sol, c_report.clone())
        }
    };
    report.classical_cost = c_report.classical_cost;
    Ok((sol, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_instance, DemandModel};
    use crate::verify::verify_solution;

    #[test]
    fn single_customer() {
        let inst: Instance = Instance::euclidean([0.0, 0.0], vec![[3.0, 4.0]], vec![0.7]).unwrap();
        let config = PipelineConfig::default();
        for solve in [solve_classical::<f64>, solve_new::<f64>, solve_best::<f64>] {
            let (sol, report) = solve(&inst, &config).unwrap();
            assert_eq!(sol.len(), 1);
            assert!((sol.cost() - 10.0).abs() < 1e-12);
            assert!((report.final_cost - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_demands() {
        let inst: Instance = Instance::euclidean([0.0, 0.0], vec![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], vec![0.0; 3]).unwrap();
        let config = PipelineConfig::default();
        let (sol, report) = solve_new(&inst, &config).unwrap();
        assert!(verify_solution(&inst, &sol, Variant::General).is_feasible());
        assert_eq!(report.num_targets, Some(0));
        assert_eq!(report.ratio, 1.0);
    }

    #[test]
    fn clustered_instances_use_the_new_branch() {
        let config = PipelineConfig::default();
        let mut with_targets = 0;
        for seed in 0..20 {
            let inst = generate_instance::<f64>(30, DemandModel::Clustered { m: 3, spread: 0.002 }, seed).unwrap().instance;
            let (sol, report) = solve_new(&inst, &config).unwrap();
            assert!(verify_solution(&inst, &sol, Variant::General).is_feasible());
            if report.num_targets.unwrap() > 0 {
                with_targets += 1;
                let sum = report.vrtg_cost.unwrap() + report.matching_cost.unwrap();
                assert!(report.combined_tour_cost.unwrap() <= sum * (1.0 + 1e-9));
            }
            let (best, best_report) = solve_best(&inst, &config).unwrap();
            let (classical, _) = solve_classical(&inst, &config).unwrap();
            assert!(best.cost() <= classical.cost());
            assert!(best.cost() <= sol.cost());
            assert_eq!(best_report.final_cost, best.cost());
        }
        assert!(with_targets > 0);
    }

    #[test]
    fn report_serializes() {
        let inst = generate_instance::<f64>(10, DemandModel::Uniform, 3).unwrap().instance;
        let (_, report) = solve_best(&inst, &PipelineConfig::default()).unwrap();
        let json = report.to_json();
        assert!(json["final_cost"].as_f64().unwrap() > 0.0);
        assert_eq!(json["config"]["gamma"].as_f64().unwrap(), 148.0);
    }
}
