use capra::oracle::{exact_cvrp, exact_vrtg};
use capra::{
    best_partition, build_vrtg_instance, partition_bound, solution_to_walks, solve_best, solve_classical, solve_new, solve_vrtg,
    verify_solution, verify_vrtg, walks_to_solution, ClusterParams, Instance, PipelineConfig, TspBackend, Variant,
};
use proptest::prelude::*;

fn points(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec((0.0..1.0f64, 0.0..1.0f64).prop_map(|(x, y)| [x, y]), n)
}

fn instance(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Instance> {
    points(n).prop_flat_map(|pts| {
        let k = pts.len();
        (Just(pts), prop::collection::vec(0.0..=1.0f64, k))
            .prop_map(|(pts, d)| Instance::euclidean([0.5, 0.5], pts, d).unwrap())
    })
}

/// Customers in a few tight groups far from the depot, so targets appear.
fn clustered(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Instance> {
    (prop::collection::vec((1.0..5.0f64, 0.0..6.28f64), 1..=3), n).prop_flat_map(|(centers, n)| {
        let m = centers.len();
        (
            Just(centers),
            prop::collection::vec((0..m, -0.01..0.01f64, -0.01..0.01f64, 0.2..0.6f64), n),
        )
            .prop_map(|(centers, members)| {
                let pts = members
                    .iter()
                    .map(|&(c, dx, dy, _)| {
                        let (r, a) = centers[c];
                        [r * a.cos() + dx, r * a.sin() + dy]
                    })
                    .collect();
                let d = members.iter().map(|m| m.3).collect();
                Instance::euclidean([0.0, 0.0], pts, d).unwrap()
            })
    })
}

fn unit(inst: &Instance, k: usize) -> Instance {
    let pts = inst.coords().unwrap()[1..].to_vec();
    Instance::euclidean(inst.coords().unwrap()[0], pts, vec![1.0 / k as f64; inst.n()]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pipelines_are_feasible(inst in instance(1..=30), k in 1usize..5) {
        for (variant, inst) in [(Variant::General, inst.clone()), (Variant::Splittable, inst.clone()), (Variant::Unit, unit(&inst, k))] {
            let config = PipelineConfig::default().with_variant(variant);
            let (best, report) = solve_best(&inst, &config).unwrap();
            let (classical, _) = solve_classical(&inst, &config).unwrap();
            let (new, _) = solve_new(&inst, &config).unwrap();
            prop_assert!(verify_solution(&inst, &best, variant).is_feasible());
            prop_assert!(verify_solution(&inst, &new, variant).is_feasible());
            prop_assert!(best.cost() <= classical.cost());
            prop_assert_eq!(best.cost(), classical.cost().min(new.cost()));
            prop_assert!((report.final_cost - best.cost()).abs() <= 1e-12);
            prop_assert!(best.cost() >= inst.radial_lower_bound() - 1e-9);
        }
    }

    #[test]
    fn partition_respects_bound(inst in instance(1..=40), backend in prop::sample::select(vec![TspBackend::Christofides, TspBackend::DoubleTree])) {
        let tour = backend.tour(&inst).unwrap();
        prop_assert!(tour.is_permutation_of(&inst));
        for variant in [Variant::General, Variant::Splittable] {
            let part = best_partition(&inst, &tour, variant).unwrap();
            let bound = partition_bound(&inst, &tour, variant);
            prop_assert!(part.solution.cost() <= bound * (1.0 + 1e-9) + 1e-12);
        }
    }

    #[test]
    fn oracle_is_a_lower_bound(inst in instance(1..=7)) {
        let opt = exact_cvrp(&inst, 8).unwrap();
        prop_assert!(verify_solution(&inst, &opt, Variant::General).is_feasible());
        let config = PipelineConfig::default().with_backend(TspBackend::Exact);
        let (sol, _) = solve_best(&inst, &config).unwrap();
        prop_assert!(opt.cost() <= sol.cost() + 1e-9);
        prop_assert!(sol.cost() <= 3.0 * opt.cost() + 1e-9);
    }

    #[test]
    fn vrtg_instance_invariants(inst in clustered(2..=25)) {
        let params = ClusterParams::default();
        let vrtg = build_vrtg_instance(&inst, &params);
        let rho = params.rho();
        let mut seen = vec![0; vrtg.num_targets()];
        for (g, members) in vrtg.groups().iter().enumerate() {
            prop_assert!(vrtg.b()[g] >= 2 && vrtg.b()[g] % 2 == 0);
            for &k in members {
                seen[k] += 1;
                prop_assert_eq!(vrtg.group_of(k), g);
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        for (k, b) in vrtg.b_target().iter().enumerate() {
            let t = vrtg.targets()[k];
            prop_assert!(inst.depot_dist(t) > 0.0);
            prop_assert!(b.contains(&t));
            for &v in b {
                prop_assert!(inst.dist(v, t) < 3.0 * rho / (1.0 - rho) * inst.depot_dist(v));
            }
        }
    }

    #[test]
    fn vrtg_solutions_are_feasible(inst in clustered(1..=30)) {
        let params = ClusterParams::default();
        let vrtg = build_vrtg_instance(&inst, &params);
        prop_assume!(vrtg.num_groups() > 0);
        let sol = solve_vrtg(&vrtg, params.gamma()).unwrap();
        prop_assert!(verify_vrtg(&vrtg, &sol).is_empty());
        let again = solve_vrtg(&vrtg, params.gamma()).unwrap();
        prop_assert_eq!(sol.paths(), again.paths());
        let walks = solution_to_walks(&sol);
        prop_assert!(walks.validate(&vrtg).is_ok());
        let back = walks_to_solution(&vrtg, &walks).unwrap();
        prop_assert!(back.cost() <= sol.cost() + 1e-9);
    }

    #[test]
    fn vrtg_oracle_never_beaten(inst in clustered(1..=6)) {
        let params = ClusterParams::default();
        let vrtg = build_vrtg_instance(&inst, &params);
        prop_assume!(vrtg.num_groups() > 0 && vrtg.total_b() <= 6);
        let exact = exact_vrtg(&vrtg, 6).unwrap();
        prop_assert!(verify_vrtg(&vrtg, &exact).is_empty());
        let sol = solve_vrtg(&vrtg, params.gamma()).unwrap();
        prop_assert!(exact.cost() <= sol.cost() + 1e-9);
    }

    #[test]
    fn detour_is_a_quasi_metric(pts in points(3..=3), depot in (0.0..1.0f64, 0.0..1.0f64)) {
        let inst = Instance::euclidean([depot.0, depot.1], pts, vec![0.0; 3]).unwrap();
        let tol = 1e-12;
        for u in 0..4 {
            for v in 0..4 {
                prop_assert!(inst.detour(u, v) >= -tol);
                for w in 0..4 {
                    prop_assert!(inst.detour(u, w) <= inst.detour(u, v) + inst.detour(v, w) + tol);
                }
            }
        }
    }

    #[test]
    fn single_precision_pipeline(inst in instance(1..=20)) {
        let pts: Vec<[f32; 2]> = inst.coords().unwrap()[1..].iter().map(|p| [p[0] as f32, p[1] as f32]).collect();
        let d: Vec<f32> = inst.customer_demands().iter().map(|&x| x as f32).collect();
        let small = Instance::<f32>::euclidean([0.5, 0.5], pts, d).unwrap();
        let (sol, _) = solve_best(&small, &PipelineConfig::<f32>::default()).unwrap();
        prop_assert!(verify_solution(&small, &sol, Variant::General).is_feasible());
    }
}
