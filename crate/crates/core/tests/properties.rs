use dogame::blotto::{build_best_response_milp, contest, BlottoGame};
use dogame::lp::{solve_lp, solve_milp, LinearProgram, LpStatus, MilpModel, MilpOptions, Sense};
use dogame::matrix_game::{deviation_payoffs, solve_matrix};
use dogame::oracle_1d::{grid_best_response, make_polynomial_game, polynomial_utility, GridOracle, Interval1DGame};
use dogame::{expected_utility, merge_duplicates, BestResponseOracle, FiniteMixedStrategy, Player, StrategyPoint};
use proptest::prelude::*;

fn mixture_1d(max: usize) -> impl Strategy<Value = FiniteMixedStrategy> {
    proptest::collection::vec((-1.0f64..=1.0, 0.01f64..1.0), 1..=max).prop_map(|pairs| {
        let (atoms, weights): (Vec<StrategyPoint>, Vec<f64>) = pairs.into_iter().map(|(a, w)| (a.into(), w)).unzip();
        merge_duplicates(atoms, weights).unwrap()
    })
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, cols), rows)
}

/// Maximizer of the concave quadratic `u(x, q)` over [-1, 1].
fn g1_best_x(q: &FiniteMixedStrategy) -> f64 {
    let m1: f64 = q.iter().map(|(y, w)| w * y.coords()[0]).sum();
    let m2: f64 = q.iter().map(|(y, w)| w * y.coords()[0].powi(2)).sum();
    let x = ((5.0 * m1 - 2.0 * m2) / 4.0).clamp(-1.0, 1.0);
    q.iter().map(|(y, w)| w * polynomial_utility(x, y.coords()[0])).sum()
}

/// Minimum of `u(p, y)` over [-1, 1], from the endpoints and the stationary point.
fn g1_best_y(p: &FiniteMixedStrategy) -> f64 {
    let m1: f64 = p.iter().map(|(x, w)| w * x.coords()[0]).sum();
    let eval = |y: f64| p.iter().map(|(x, w)| w * polynomial_utility(x.coords()[0], y)).sum::<f64>();
    let mut best = eval(-1.0).min(eval(1.0));
    if m1.abs() > 1e-15 {
        let y = (5.0 * m1 - 1.0) / (4.0 * m1);
        if (-1.0..=1.0).contains(&y) {
            best = best.min(eval(y));
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn expected_utility_is_bilinear(p1 in mixture_1d(4), p2 in mixture_1d(4), q in mixture_1d(4), alpha in 0.0f64..=1.0) {
        let game = make_polynomial_game();
        let atoms: Vec<StrategyPoint> = p1.atoms().iter().chain(p2.atoms()).cloned().collect();
        let weights: Vec<f64> = p1.weights().iter().map(|w| alpha * w)
            .chain(p2.weights().iter().map(|w| (1.0 - alpha) * w)).collect();
        let mixed = merge_duplicates(atoms, weights).unwrap();
        let lhs = expected_utility(&mixed, &q, &game).unwrap();
        let rhs = alpha * expected_utility(&p1, &q, &game).unwrap()
            + (1.0 - alpha) * expected_utility(&p2, &q, &game).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn merging_duplicates_preserves_utility(p in mixture_1d(5), q in mixture_1d(3), reps in 1usize..4) {
        let game = make_polynomial_game();
        let atoms: Vec<StrategyPoint> = (0..reps).flat_map(|_| p.atoms().to_vec()).collect();
        let weights: Vec<f64> = (0..reps).flat_map(|_| p.weights().to_vec()).collect();
        let merged = merge_duplicates(atoms, weights).unwrap();
        prop_assert_eq!(merged.len(), p.len());
        let total: f64 = merged.weights().iter().sum();
        prop_assert_eq!(total, 1.0);
        let a = expected_utility(&merged, &q, &game).unwrap();
        let b = expected_utility(&p, &q, &game).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn matrix_solution_passes_the_certificate(a in matrix(4, 6)) {
        let sol = solve_matrix(&a).unwrap();
        let (best_row, best_col) = deviation_payoffs(&a, &sol.row, &sol.col);
        prop_assert!((best_row - sol.value).abs() <= 1e-7);
        prop_assert!((best_col - sol.value).abs() <= 1e-7);
    }

    #[test]
    fn matrix_value_shifts_with_the_payoff(a in matrix(3, 5), k in -10.0f64..10.0) {
        let shifted: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|v| v + k).collect()).collect();
        let v0 = solve_matrix(&a).unwrap().value;
        let v1 = solve_matrix(&shifted).unwrap().value;
        prop_assert!((v1 - v0 - k).abs() <= 1e-7);
    }

    #[test]
    fn transposed_negated_game_has_negated_value(a in matrix(5, 3)) {
        let t: Vec<Vec<f64>> = (0..3).map(|j| (0..5).map(|i| -a[i][j]).collect()).collect();
        let v = solve_matrix(&a).unwrap().value;
        let w = solve_matrix(&t).unwrap().value;
        prop_assert!((v + w).abs() <= 1e-7);
    }

    #[test]
    fn grid_response_dominates_every_grid_point(q in mixture_1d(4)) {
        let game = make_polynomial_game();
        let oracle = GridOracle::for_builtin(Interval1DGame::Polynomial, Player::One, 1e-2).unwrap();
        let ans = oracle.respond(&q).unwrap();
        for x in oracle.grid() {
            prop_assert!(ans.value >= game.payoff_against(Player::One, x, &q) - 1e-12);
        }
    }

    #[test]
    fn halving_the_resolution_never_hurts(q in mixture_1d(4), p in mixture_1d(4)) {
        let game = make_polynomial_game();
        let coarse = grid_best_response(&q, &game, Player::One, 1e-2).unwrap();
        let fine = grid_best_response(&q, &game, Player::One, 5e-3).unwrap();
        prop_assert!(fine.value >= coarse.value - 1e-12);
        let coarse = grid_best_response(&p, &game, Player::Two, 1e-2).unwrap();
        let fine = grid_best_response(&p, &game, Player::Two, 5e-3).unwrap();
        prop_assert!(fine.value <= coarse.value + 1e-12);
    }

    #[test]
    fn g1_grid_oracles_meet_their_accuracy(q in mixture_1d(4), p in mixture_1d(4)) {
        let o1 = GridOracle::for_builtin(Interval1DGame::Polynomial, Player::One, 1e-2).unwrap();
        let o2 = GridOracle::for_builtin(Interval1DGame::Polynomial, Player::Two, 1e-2).unwrap();
        let a1 = o1.respond(&q).unwrap();
        let exact1 = g1_best_x(&q);
        prop_assert!(a1.value <= exact1 + 1e-12);
        prop_assert!(a1.value >= exact1 - o1.accuracy());
        let a2 = o2.respond(&p).unwrap();
        let exact2 = g1_best_y(&p);
        prop_assert!(a2.value >= exact2 - 1e-12);
        prop_assert!(a2.value <= exact2 + o2.accuracy());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn lp_strong_duality(
        a in proptest::collection::vec(proptest::collection::vec(0.1f64..3.0, 8), 5),
        b in proptest::collection::vec(1.0f64..5.0, 5),
        c in proptest::collection::vec(-1.0f64..4.0, 8),
    ) {
        let mut primal = LinearProgram::new(8);
        primal.objective = c.clone();
        for (row, &rhs) in a.iter().zip(&b) {
            primal.add_row(row.clone(), Sense::Le, rhs);
        }
        // min b^T y s.t. A^T y >= c, y >= 0, as a maximization.
        let mut dual = LinearProgram::new(5);
        dual.objective = b.iter().map(|v| -v).collect();
        for j in 0..8 {
            dual.add_row((0..5).map(|i| a[i][j]).collect(), Sense::Ge, c[j]);
        }
        let ps = solve_lp(&primal).unwrap();
        let ds = solve_lp(&dual).unwrap();
        prop_assert_eq!(ps.status, LpStatus::Optimal);
        prop_assert_eq!(ds.status, LpStatus::Optimal);
        prop_assert!((ps.objective + ds.objective).abs() <= 1e-6);
        prop_assert!(primal.max_violation(&ps.x) <= 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn milp_never_beats_its_relaxation(
        rows in proptest::collection::vec(proptest::collection::vec(0.0f64..2.0, 6), 2..4),
        c in proptest::collection::vec(-1.0f64..3.0, 6),
    ) {
        let mut lp = LinearProgram::new(6);
        lp.objective = c;
        for row in rows {
            let cap = row.iter().sum::<f64>() * 0.5;
            lp.add_row(row, Sense::Le, cap);
        }
        for j in 0..3 {
            lp.set_bounds(j, 0.0, 1.0);
        }
        let relaxed = solve_lp(&lp).unwrap();
        let model = MilpModel::new(lp.clone(), vec![0, 1, 2]);
        let sol = solve_milp(&model, &MilpOptions::default()).unwrap();
        prop_assert!(sol.solution.is_optimal());
        prop_assert!(sol.solution.objective <= relaxed.objective + 1e-9);
        prop_assert!(lp.max_violation(&sol.solution.x) <= 1e-8);
        for j in 0..3 {
            let v = sol.solution.x[j];
            prop_assert!(v.min(1.0 - v).abs() <= 1e-6);
        }
    }

    #[test]
    fn integral_relaxation_needs_one_node(c in proptest::collection::vec(prop_oneof![-3.0f64..-0.1, 0.1f64..3.0], 1..8)) {
        let n = c.len();
        let mut lp = LinearProgram::new(n);
        lp.objective = c.clone();
        for j in 0..n {
            lp.set_bounds(j, 0.0, 1.0);
        }
        let sol = solve_milp(&MilpModel::new(lp, (0..n).collect()), &MilpOptions::default()).unwrap();
        prop_assert_eq!(sol.nodes, 1);
        let expected: f64 = c.iter().filter(|v| **v > 0.0).sum();
        prop_assert!((sol.solution.objective - expected).abs() < 1e-12);
    }
}

/// Fixes the allocation in the best-response model and checks that the
/// auxiliary variables take their linearized values.
fn check_linearization(x: &[f64], y: &[f64], weights: Vec<f64>, c: f64) -> Result<(), TestCaseError> {
    let game = BlottoGame::new(weights, c).unwrap();
    let q = FiniteMixedStrategy::pure(StrategyPoint::new(y.to_vec()));
    let mut milp = build_best_response_milp(&q, &game).unwrap();
    for (j, &v) in x.iter().enumerate() {
        milp.model.lp.set_bounds(milp.layout.x(j), v, v);
    }
    let sol = solve_milp(&milp.model, &MilpOptions::default()).unwrap();
    prop_assert!(sol.solution.is_optimal());
    let v = &sol.solution.x;
    for j in 0..x.len() {
        let z = x[j] - y[j];
        let s = v[milp.layout.s(0, j)];
        let t = v[milp.layout.t(0, j)];
        prop_assert!((s - ((z + c) / c).max(0.0)).abs() <= 1e-9, "s = {}", s);
        prop_assert!((t - ((z - c) / c).max(0.0)).abs() <= 1e-9, "t = {}", t);
        prop_assert!((s - t - 1.0 - contest(z, c)).abs() <= 1e-9);
    }
    let expected = game.payoff(x, y);
    prop_assert!((sol.solution.objective - expected).abs() <= 1e-9);
    Ok(())
}

fn allocation(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..1.0, n).prop_map(|v| {
        let s: f64 = v.iter().sum::<f64>().max(1e-9);
        let mut out: Vec<f64> = v.iter().map(|a| a / s).collect();
        let rest: f64 = out[1..].iter().sum();
        out[0] = (1.0 - rest).max(0.0);
        out
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn linearization_is_exact(
        (x, y) in (2usize..5).prop_flat_map(|n| (allocation(n), allocation(n))),
        c in prop_oneof![Just(1.0), Just(0.5), Just(0.25), Just(0.125), Just(0.0625), 0.05f64..1.0],
        scale in 0.5f64..2.0,
    ) {
        let weights = (0..x.len()).map(|j| scale + j as f64 * 0.25).collect();
        check_linearization(&x, &y, weights, c)?;
    }
}
