mod common;

use dqml::oracle::{
    default_grid_half_width, random_class_problem, relative_gap, solve_primal_grid,
    solve_primal_penalty, solve_unregularized, PenaltyConfig, RandomInstanceSpec,
};
use dqml::qml::{solve_dual, ClassProblem, SolverConfig};
use dqml::symmat::{min_eigenvalue, SymmetricMatrix};
use dqml::QmlError;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_instance(seed: u64, dim: usize) -> ClassProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = RandomInstanceSpec {
        dim,
        n_intra: 3,
        n_extra: 2 * dim,
        lambda: 1.0,
        bound: 1.0,
    };
    random_class_problem(&spec, &mut rng).unwrap()
}

#[test]
fn grid_refinement_never_worsens() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..4 {
        let prob = common::grid_instance(&mut rng, 1.0);
        let w = default_grid_half_width(&prob);
        // 0.04, 0.02, 0.01 lattices are nested when w is a multiple of 0.04
        let w = (w / 0.04).ceil() * 0.04;
        let coarse = solve_primal_grid(&prob, w, 0.04).unwrap().objective;
        let mid = solve_primal_grid(&prob, w, 0.02).unwrap().objective;
        let fine = solve_primal_grid(&prob, w, 0.01).unwrap().objective;
        assert!(
            mid <= coarse + 1e-12 && fine <= mid + 1e-12,
            "{coarse} {mid} {fine}"
        );
    }
}

#[test]
fn grid_agrees_with_dual() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..4 {
        let prob = common::grid_instance(&mut rng, 1.0);
        let step = 0.02;
        let grid = solve_primal_grid(&prob, default_grid_half_width(&prob), step).unwrap();
        let dual = solve_dual(&prob, &SolverConfig::default()).unwrap();
        assert!(
            (grid.objective - dual.primal_objective).abs() <= 2.0 * step,
            "grid {} dual {}",
            grid.objective,
            dual.primal_objective
        );
        assert!(grid.objective >= dual.primal_objective - 1e-9);
    }
}

#[test]
fn grid_point_is_feasible() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let prob = common::grid_instance(&mut rng, 0.5);
    let res = solve_primal_grid(&prob, default_grid_half_width(&prob), 0.02).unwrap();
    assert_eq!(prob.max_constraint_violation(&res.p), 0.0);
    assert!(min_eigenvalue(&res.p).unwrap() >= -1e-9);
}

#[test]
fn grid_too_coarse_is_reported() {
    let prob = ClassProblem::new(
        DMatrix::from_row_slice(1, 2, &[0.1, 0.0]),
        SymmetricMatrix::zeros(2),
        1.0,
        1.0,
    )
    .unwrap();
    // b/‖x‖² = 100, far outside a half-width of 1
    let err = solve_primal_grid(&prob, 1.0, 0.1).unwrap_err();
    assert!(matches!(err, QmlError::GridTooCoarse), "{err:?}");
}

#[test]
fn penalty_matches_dual() {
    for seed in 0..5 {
        let prob = small_instance(seed, 4);
        let pen = solve_primal_penalty(&prob, &PenaltyConfig::default()).unwrap();
        let dual = solve_dual(&prob, &SolverConfig::default()).unwrap();
        let rel = relative_gap(pen.objective, dual.primal_objective);
        assert!(rel <= 1e-3, "seed {seed}: relative difference {rel}");
        assert!(prob.max_constraint_violation(&pen.p) <= 1e-5 * prob.bound());
        assert!(min_eigenvalue(&pen.p).unwrap() >= -1e-8);
    }
}

#[test]
fn penalty_violation_shrinks_across_stages() {
    let prob = small_instance(3, 5);
    let pen = solve_primal_penalty(&prob, &PenaltyConfig::default()).unwrap();
    assert!(pen.stage_violations.len() >= 2);
    for w in pen.stage_violations.windows(2) {
        assert!(
            w[1] <= w[0] * (1.0 + 1e-9) + 1e-15,
            "{:?}",
            pen.stage_violations
        );
    }
}

#[test]
fn unregularized_scales_linearly_in_bound() {
    for seed in 20..23 {
        let base = small_instance(seed, 3);
        let cfg = PenaltyConfig::default();
        let one = solve_unregularized(&base.with_params(1.0, 1.0).unwrap(), &cfg).unwrap();
        let two = solve_unregularized(&base.with_params(1.0, 2.0).unwrap(), &cfg).unwrap();
        let rel = common::rel_diff(&two.p, &one.p.scale(2.0));
        assert!(rel <= 1e-3, "seed {seed}: relative difference {rel}");
        assert!(relative_gap(two.objective, 2.0 * one.objective) <= 1e-3);
    }
}

#[test]
fn unregularized_without_extra_scatter_has_zero_cost() {
    // tr(PO) = 0 whenever O = 0, so any feasible P is optimal
    let prob = ClassProblem::new(
        DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
        SymmetricMatrix::zeros(2),
        1.0,
        1.0,
    )
    .unwrap();
    let res = solve_unregularized(&prob, &PenaltyConfig::default()).unwrap();
    assert!(res.objective.abs() <= 1e-9);
    assert!(prob.max_constraint_violation(&res.p) <= 1e-5);
}

#[test]
fn zero_intra_sample_is_infeasible() {
    let prob = ClassProblem::new(
        DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
        SymmetricMatrix::zeros(2),
        1.0,
        1.0,
    )
    .unwrap();
    assert!(solve_primal_grid(&prob, 3.0, 0.1)
        .unwrap_err()
        .is_infeasible());
    assert!(solve_primal_penalty(&prob, &PenaltyConfig::default())
        .unwrap_err()
        .is_infeasible());
    assert!(solve_dual(&prob, &SolverConfig::default())
        .unwrap_err()
        .is_infeasible());
}
