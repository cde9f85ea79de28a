mod common;

use common::{horizontal_trial, identity_transforms_are_exact, scalar_ed, vertical_trial};
use maskdispatch::ed::{build_ed_blocks, gen_synthetic, MarketSystem};
use maskdispatch::lp::{check_point, solve_lp, SolverConfig};
use maskdispatch::privacy::{
    build_transformed_ed, gen_keys, horizontal_mask_generic, mask_all, recover_lmp, recover_primal, unmask_slice,
    MaskConfig, MaskKeys, RowGroup,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn small_system(buses: usize, gencos: usize, lses: usize, size: usize, hours: usize, seed: u64) -> MarketSystem {
    gen_synthetic(buses, gencos, lses, size, hours, seed).unwrap()
}

fn system_strategy() -> impl Strategy<Value = MarketSystem> {
    (2usize..7, 1usize..4, 1usize..3, 1usize..3, 1usize..3, any::<u64>())
        .prop_map(|(b, g, l, k, t, s)| small_system(b, g, l, k, t, s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn masking_preserves_the_optimum(sys in system_strategy(), seed in any::<u64>()) {
        let cfg = SolverConfig::default();
        let blocks = build_ed_blocks(&sys).unwrap();
        let direct = solve_lp(&blocks.to_lp(&sys), &cfg).unwrap();
        let keys = gen_keys(&blocks, seed, &MaskConfig::default()).unwrap();
        let t = build_transformed_ed(&mask_all(&blocks, &keys).unwrap()).unwrap();
        let masked = solve_lp(&t.lp, &cfg).unwrap();
        let scale = 1.0 + direct.objective.abs();
        prop_assert!((masked.objective - direct.objective).abs() <= 1e-6 * scale,
            "{} vs {}", masked.objective, direct.objective);

        // The recovered point is feasible and optimal even if the optimum is not unique.
        let f = recover_primal(&keys, &masked, &t.spans).unwrap();
        let s = scalar_ed(&sys);
        let x = s.from_block_point(&sys, &f.gencos, &f.lses, &f.angles);
        let rep = check_point(&s.lp, &x, 1e-6).unwrap();
        prop_assert!(rep.feasible, "{:?}", rep);
        prop_assert!((rep.objective - direct.objective).abs() <= 1e-6 * scale);
    }

    #[test]
    fn constraint_count_is_conserved(sys in system_strategy(), seed in any::<u64>()) {
        let blocks = build_ed_blocks(&sys).unwrap();
        let orig = blocks.to_lp(&sys);
        let keys = gen_keys(&blocks, seed, &MaskConfig::default()).unwrap();
        let t = build_transformed_ed(&mask_all(&blocks, &keys).unwrap()).unwrap();
        prop_assert_eq!(t.lp.num_eq() + t.lp.num_in(), orig.num_eq() + orig.num_in());
        prop_assert_eq!(t.lp.num_in(), 0);
        let entity_rows: usize = blocks.entities().map(|e| e.num_rows()).sum();
        let slacks = entity_rows + 2 * sys.horizon * sys.lines.len();
        prop_assert_eq!(t.num_slacks(), slacks);
        prop_assert_eq!(t.lp.num_vars(), orig.num_vars() + slacks);
    }

    #[test]
    fn identity_keys_are_a_fixed_point(sys in system_strategy()) {
        let blocks = build_ed_blocks(&sys).unwrap();
        let orig = blocks.to_lp(&sys);
        let t = build_transformed_ed(&mask_all(&blocks, &MaskKeys::identity(&blocks)).unwrap()).unwrap();
        let (n, m_in, m_eq) = (orig.num_vars(), orig.num_in(), orig.num_eq());
        prop_assert_eq!(t.lp.a_eq.view((0, 0), (m_in, n)), orig.a_in.view((0, 0), (m_in, n)));
        prop_assert_eq!(t.lp.a_eq.view((0, n), (m_in, m_in)), DMatrix::<f64>::identity(m_in, m_in));
        prop_assert_eq!(t.lp.a_eq.view((m_in, 0), (m_eq, n)), orig.a_eq.view((0, 0), (m_eq, n)));
        prop_assert!(t.lp.a_eq.view((m_in, n), (m_eq, m_in)).iter().all(|v| *v == 0.0));
        prop_assert_eq!(&t.lp.b_eq[..m_in], &orig.b_in[..]);
        prop_assert_eq!(&t.lp.b_eq[m_in..], &orig.b_eq[..]);
        prop_assert_eq!(&t.lp.cost[..n], &orig.cost[..]);
        prop_assert!(t.lp.cost[n..].iter().all(|c| *c == 0.0));
    }

    #[test]
    fn no_block_is_sent_in_the_clear(sys in system_strategy(), seed in any::<u64>()) {
        let blocks = build_ed_blocks(&sys).unwrap();
        let keys = gen_keys(&blocks, seed, &MaskConfig::default()).unwrap();
        let masked = mask_all(&blocks, &keys).unwrap();
        let plain = mask_all(&blocks, &MaskKeys::identity(&blocks)).unwrap();
        prop_assert_eq!(masked.len(), plain.len());
        for (m, p) in masked.iter().zip(&plain) {
            prop_assert_eq!(m.owner(), p.owner());
            for ((name, a), (_, b)) in m.blocks().iter().zip(p.blocks()) {
                prop_assert_eq!(a.shape(), b.shape());
                if b.iter().all(|v| *v == 0.0) {
                    continue;
                }
                let diff = (a - &b).amax();
                prop_assert!(diff > 0.0, "{} {} sent unmasked", m.owner(), name);
            }
        }
    }

    #[test]
    fn generated_keys_are_well_conditioned(sys in system_strategy(), seed in any::<u64>()) {
        let blocks = build_ed_blocks(&sys).unwrap();
        let cfg = MaskConfig::default();
        let keys = gen_keys(&blocks, seed, &cfg).unwrap();
        for (name, m) in keys.matrices() {
            let sv = m.clone().svd(false, false).singular_values;
            let cond = sv.max() / sv.min();
            prop_assert!(cond <= cfg.cond_max, "{} has condition {}", name, cond);
        }
        prop_assert_eq!(gen_keys(&blocks, seed, &cfg).unwrap(), keys);
    }

    #[test]
    fn lmp_recovery_inverts_the_mask(seed in any::<u64>(), n in 1usize..7) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let xb = common::random_key(&mut rng, n, (0.01, 1.0));
        let known: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
        let lam = -(xb.transpose().lu().solve(&nalgebra::DVector::from_vec(known.clone())).unwrap());
        let got = recover_lmp(&xb, lam.as_slice()).unwrap();
        prop_assert!(common::max_abs_diff(&got, &known) < 1e-8);
    }
}

#[test]
fn vertical_masking_matches_direct_solve_on_200_lps() {
    for seed in 0..200 {
        let t = vertical_trial(seed);
        assert!(t.error() <= 1e-8, "seed {seed}: {} {} {}", t.direct, t.masked, t.recovered);
        assert!(t.recovered_feasible, "seed {seed}");
    }
}

#[test]
fn horizontal_masking_matches_direct_solve_on_200_lps() {
    for seed in 0..200 {
        let t = horizontal_trial(seed);
        assert!(t.error() <= 1e-8, "seed {seed}: {} {} {}", t.direct, t.masked, t.recovered);
        assert!(t.recovered_feasible, "seed {seed}");
    }
}

#[test]
fn identity_generic_transforms_are_exact() {
    for seed in 0..200 {
        assert!(identity_transforms_are_exact(seed), "seed {seed}");
    }
}

#[test]
fn scaling_a_slack_coefficient_leaves_x_alone() {
    let cfg = SolverConfig::default();
    let mut checked = 0;
    for seed in 0..40 {
        let lp = common::random_partitioned_lp(seed);
        if !common::vertex_oracle(&lp).unwrap().unique() {
            continue;
        }
        let group = |scale: f64| RowGroup {
            rows: (0..6).collect(),
            x: DMatrix::identity(6, 6),
            r: (0..6).map(|i| if i == 2 { scale } else { 1.0 }).collect(),
        };
        let a = horizontal_mask_generic(&lp, &[group(1.0)]).unwrap();
        let b = horizontal_mask_generic(&lp, &[group(10.0)]).unwrap();
        let sa = solve_lp(&a.lp, &cfg).unwrap();
        let sb = solve_lp(&b.lp, &cfg).unwrap();
        assert!(common::max_abs_diff(&a.recover(&sa.x), &b.recover(&sb.x)) < 1e-8, "seed {seed}");
        assert!((sa.x[8] - 10.0 * sb.x[8]).abs() < 1e-8, "seed {seed}");
        checked += 1;
    }
    assert!(checked >= 20);
}

#[test]
fn printed_recovery_products() {
    // Matrices as printed with two decimals; the products are only good to about 0.01.
    let yg1 = DMatrix::from_row_slice(3, 3, &[0.38, 0.05, 0.93, 0.56, 0.53, 0.13, 0.07, 0.77, 0.57]);
    let p = unmask_slice(&yg1, &[74.65, -58.16, 69.40]).unwrap();
    assert!(common::max_abs_diff(&p, &[90.0, 20.0, 0.0]) < 0.01, "{p:?}");
    let yt = DMatrix::from_row_slice(2, 2, &[0.94, 0.67, 0.32, 0.43]);
    let th = unmask_slice(&yt, &[33.03, -47.84]).unwrap();
    assert!(common::max_abs_diff(&th, &[-1.0, -10.0]) < 0.01, "{th:?}");
    let xb = DMatrix::from_row_slice(3, 3, &[0.58, 0.06, 0.92, 0.44, 0.87, 0.22, 0.26, 0.63, 0.37]);
    let l = recover_lmp(&xb, &[-13.13, -16.22, -0.95]).unwrap();
    assert!(common::max_abs_diff(&l, &[15.0, 15.5, 16.0]) < 0.01, "{l:?}");
}
