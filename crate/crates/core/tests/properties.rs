mod common;

use proptest::prelude::*;

use common::*;
use socialcause::causal::{dose_independent_matrix, CausalModel};
use socialcause::dynamics::{run, RunSpec};
use socialcause::gcl::{estimate_with_combination, GclSettings, ObservedTrace};
use socialcause::linalg::Matrix;
use socialcause::ranking::{air, causal_rank, residual, RESIDUAL_BOUND};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn beliefs_stay_row_stochastic(inst in instance()) {
        check_row_stochastic(&inst)?;
    }

    #[test]
    fn log_ratios_follow_linear_recursion(inst in instance()) {
        check_log_ratio_recursion(&inst)?;
    }

    #[test]
    fn intervened_agent_stays_pinned((inst, dose) in intervened_instance()) {
        check_pinning(&inst, &dose)?;
    }

    #[test]
    fn perron_vector_is_fixed_point(inst in instance()) {
        check_perron(&inst)?;
    }

    #[test]
    fn influence_is_positive_with_known_diagonal(inst in instance()) {
        check_influence_matrix(&inst)?;
    }

    #[test]
    fn causal_rank_has_small_residual(inst in instance()) {
        let info = inst.world.informativeness();
        let model = CausalModel::new(&inst.combination, &info, inst.params).unwrap();
        let c = dose_independent_matrix(&model).unwrap().matrix;
        let (q, rho) = causal_rank(&c).unwrap();
        prop_assert!(residual(&c, &q, rho) < RESIDUAL_BOUND);
        prop_assert!((q.sum() - 1.0).abs() < 1e-12);
        prop_assert!(q.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn causal_rank_ignores_scale(inst in instance(), scale in 0.01f64..100.0) {
        let info = inst.world.informativeness();
        let model = CausalModel::new(&inst.combination, &info, inst.params).unwrap();
        let c = dose_independent_matrix(&model).unwrap().matrix;
        let (q, rho) = causal_rank(&c).unwrap();
        let (qs, rhos) = causal_rank(&(&c * scale)).unwrap();
        prop_assert!((&q - &qs).amax() < 1e-9);
        prop_assert!((rhos - scale * rho).abs() < 1e-9 * scale * rho);
    }

    #[test]
    fn diagonal_shift_moves_rho_only(inst in instance(), shift in 0.0f64..2.0) {
        let info = inst.world.informativeness();
        let model = CausalModel::new(&inst.combination, &info, inst.params).unwrap();
        let c = dose_independent_matrix(&model).unwrap().matrix;
        let k = c.nrows();
        let (q, rho) = causal_rank(&c).unwrap();
        let (qs, rhos) = causal_rank(&(&c + Matrix::identity(k, k) * shift)).unwrap();
        prop_assert!((&q - &qs).amax() < 1e-8);
        prop_assert!((rhos - rho - shift).abs() < 1e-9 * (1.0 + rhos));
        let (a, b) = (air(&c), air(&(&c + Matrix::identity(k, k) * shift)));
        prop_assert!((a - b).amax() < 1e-15);
    }

    #[test]
    fn gcl_is_exact_on_noiseless_asl_traces(inst in instance()) {
        prop_assume!(!inst.params.is_nbsl());
        let trace = run(&inst.world, &inst.combination, inst.params, &RunSpec::noiseless(60), None).unwrap();
        let observed = ObservedTrace::from_trace(&trace).unwrap();
        prop_assume!(observed.clamped() == 0);
        let est = estimate_with_combination(&observed, inst.combination.clone(), &GclSettings::new(inst.params)).unwrap();
        prop_assert_eq!(est.true_state, inst.world.true_state());
        let info = inst.world.informativeness();
        let err = (est.informativeness.matrix() - info.matrix()).amax();
        prop_assert!(err < 1e-8, "informativeness error {}", err);
    }
}
