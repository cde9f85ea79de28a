mod common;

use common::{random_partitioned_lp, random_small_lp, vertex_oracle};
use maskdispatch::lp::{solve_lp, Certificate, LpStatus, SolverConfig};
use proptest::prelude::*;

fn agree(seed: u64) {
    let lp = random_small_lp(seed);
    let oracle = vertex_oracle(&lp);
    let sol = solve_lp(&lp, &SolverConfig::default()).unwrap();
    match oracle {
        None => assert_eq!(sol.status, LpStatus::Infeasible, "seed {seed}"),
        Some(o) => {
            assert_eq!(sol.status, LpStatus::Optimal, "seed {seed}");
            assert!(
                (sol.objective - o.objective).abs() <= 1e-7 * (1.0 + o.objective.abs()),
                "seed {seed}: simplex {} oracle {}",
                sol.objective,
                o.objective
            );
            if o.unique() {
                assert!(common::max_abs_diff(&sol.x, &o.optimal[0]) < 1e-6, "seed {seed}");
            }
        }
    }
}

#[test]
fn simplex_matches_vertex_enumeration_on_500_small_lps() {
    for seed in 0..500 {
        agree(seed);
    }
}

#[test]
fn partitioned_lps_match_vertex_enumeration() {
    for seed in 0..200 {
        let lp = random_partitioned_lp(seed);
        let o = vertex_oracle(&lp).expect("packing programs are feasible");
        let sol = solve_lp(&lp, &SolverConfig::default()).unwrap();
        assert!((sol.objective - o.objective).abs() < 1e-8, "seed {seed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn certificate_holds_on_every_optimal_solve(seed in any::<u64>()) {
        let lp = random_small_lp(seed);
        let sol = solve_lp(&lp, &SolverConfig::default()).unwrap();
        if sol.status == LpStatus::Optimal {
            let c = Certificate::evaluate(&lp, &sol.x, &sol.dual_eq, &sol.dual_in);
            prop_assert!(c.primal_residual <= 1e-6);
            prop_assert!(c.dual_residual <= 1e-6);
            prop_assert!(c.duality_gap <= 1e-6);
            prop_assert!(c.complementarity <= 1e-6);
            prop_assert_eq!(c, sol.certificate);
        }
    }

    #[test]
    fn oracle_agreement(seed in any::<u64>()) {
        agree(seed);
    }
}
