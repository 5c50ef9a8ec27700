//! Continuous Colonel Blotto with a saturated linear contest function.
//!
//! Both players split a unit of force over `n` battlefields. Battlefield `j`
//! pays `a_j * l(x_j - y_j)` to player 1, where `l` is linear with slope
//! `1/c` on `[-c, c]` and saturates at `±1` outside.
//!
//! Best responses to a finitely supported opponent come from a
//! mixed-integer program in which each term `l(x_j - y_ij)` is written as
//! `s_ij - t_ij - 1`, with `s = max{(x - y + c)/c, 0}` and
//! `t = max{(x - y - c)/c, 0}` linearized by big-M constraints. An exact
//! enumeration oracle over the `c`-grid of the simplex serves as the
//! independent cross-check.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::game::{FiniteMixedStrategy, GameDefinition, Player, StrategyPoint, StrategySpace, PROB_TOL};
use crate::lp::{solve_milp, LinearProgram, MilpModel, MilpOptions, MilpSolution, Sense};
use crate::oracle::{BestResponseOracle, CandidateOracle, OracleAnswer};

/// Declared accuracy of the MILP oracle.
pub const MILP_ACCURACY: f64 = 1e-6;
/// Largest simplex grid the enumeration oracle will build.
pub const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct BlottoGame {
    weights: Arc<Vec<f64>>,
    c: f64,
}

impl BlottoGame {
    pub fn new(weights: Vec<f64>, c: f64) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::Parameter(format!(
                "Blotto needs at least 2 battlefields, got {}",
                weights.len()
            )));
        }
        if let Some(a) = weights.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
            return Err(Error::Parameter(format!("battlefield weight {a} is not positive")));
        }
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::Parameter(format!("contest constant c must lie in (0, 1], got {c}")));
        }
        Ok(BlottoGame {
            weights: Arc::new(weights),
            c,
        })
    }

    /// Equal unit weights on `n` battlefields.
    pub fn uniform(n: usize, c: f64) -> Result<Self> {
        BlottoGame::new(vec![1.0; n], c)
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Payoff to player 1; allocations are not validated.
    pub fn payoff(&self, x: &[f64], y: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(x.iter().zip(y))
            .map(|(a, (xj, yj))| a * contest(xj - yj, self.c))
            .sum()
    }

    pub fn definition(&self) -> GameDefinition {
        let game = self.clone();
        let n = self.n();
        GameDefinition::new(
            format!("blotto n={n} c={}", self.c),
            StrategySpace::Simplex { dim: n },
            StrategySpace::Simplex { dim: n },
            move |x, y| game.payoff(x, y),
        )
    }

    pub fn check_allocation(&self, x: &StrategyPoint) -> Result<()> {
        if (StrategySpace::Simplex { dim: self.n() }).contains(x) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "{x} is not an allocation over {} battlefields",
                self.n()
            )))
        }
    }
}

/// The contest function without parameter checks.
#[inline]
pub fn contest(z: f64, c: f64) -> f64 {
    if z <= -c {
        -1.0
    } else if z >= c {
        1.0
    } else {
        z / c
    }
}

/// `l(z) = -1` for `z <= -c`, `z / c` on `[-c, c]`, `1` for `z >= c`.
pub fn l_eval(z: f64, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Parameter(format!("contest constant must be positive, got {c}")));
    }
    Ok(contest(z, c))
}

pub fn blotto_utility(x: &StrategyPoint, y: &StrategyPoint, game: &BlottoGame) -> Result<f64> {
    if x.dim() != game.n() || y.dim() != game.n() {
        return Err(Error::Domain(format!(
            "allocations {x} and {y} do not match {} battlefields",
            game.n()
        )));
    }
    game.check_allocation(x)?;
    game.check_allocation(y)?;
    Ok(game.payoff(x.coords(), y.coords()))
}

/// `1/c` as an integer grid count, if it is one.
pub fn grid_steps(c: f64) -> Result<usize> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Parameter(format!("grid spacing must be positive, got {c}")));
    }
    let inv = 1.0 / c;
    let k = inv.round();
    if (inv - k).abs() > 1e-9 || k < 1.0 {
        return Err(Error::Parameter(format!("1/c = {inv} is not integral (c = {c})")));
    }
    Ok(k as usize)
}

/// Number of points of the `1/k`-grid on the simplex in `R^n`:
/// `C(k + n - 1, n - 1)`, saturating.
pub fn simplex_grid_size(n: usize, k: usize) -> usize {
    let mut count: u128 = 1;
    for i in 1..n {
        count = count * (k + i) as u128 / i as u128;
        if count > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    count as usize
}

/// All allocations with coordinates in `{0, c, 2c, ..., 1}`, in lexicographic
/// order.
pub fn simplex_grid(n: usize, c: f64) -> Result<Vec<StrategyPoint>> {
    if n == 0 {
        return Err(Error::Parameter("simplex dimension must be positive".into()));
    }
    let k = grid_steps(c)?;
    let mut out = Vec::with_capacity(simplex_grid_size(n, k).min(MAX_GRID_POINTS));
    let mut counts = vec![0usize; n];
    fill_grid(&mut counts, 0, k, k, &mut out);
    Ok(out)
}

fn fill_grid(counts: &mut [usize], pos: usize, remaining: usize, k: usize, out: &mut Vec<StrategyPoint>) {
    let n = counts.len();
    if pos == n - 1 {
        counts[pos] = remaining;
        out.push(counts.iter().map(|&m| m as f64 / k as f64).collect::<Vec<_>>().into());
        return;
    }
    for m in 0..=remaining {
        counts[pos] = m;
        fill_grid(counts, pos + 1, remaining - m, k, out);
    }
}

/// The `n` pure allocations `(1, 0, ..., 0)`, ..., `(0, ..., 0, 1)`.
pub fn corners(n: usize) -> Vec<StrategyPoint> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect::<Vec<_>>().into())
        .collect()
}

/// Big-M constants for the two linearized maxima.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BigM {
    /// Deactivates `s <= (x - y + c)/c` when `z = 0`.
    pub s_lower: f64,
    /// Bounds `s` when `z = 1`.
    pub s_upper: f64,
    pub t_lower: f64,
    pub t_upper: f64,
}

impl BigM {
    /// Valid for coordinates in `[0, 1]`: `(x - y + c)/c` ranges over
    /// `[1 - 1/c, 1/c + 1]` and `(x - y - c)/c` over `[-1/c - 1, 1/c - 1]`.
    pub fn for_c(c: f64) -> Self {
        let inv = 1.0 / c;
        BigM {
            s_lower: inv - 1.0,
            s_upper: inv + 1.0,
            t_lower: inv + 1.0,
            t_upper: inv - 1.0,
        }
    }
}

/// Variable layout of a best-response MILP with `k` opponent atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MilpLayout {
    pub n: usize,
    pub k: usize,
}

impl MilpLayout {
    pub fn x(&self, j: usize) -> usize {
        j
    }
    pub fn s(&self, i: usize, j: usize) -> usize {
        self.n + i * self.n + j
    }
    pub fn t(&self, i: usize, j: usize) -> usize {
        self.n + self.k * self.n + i * self.n + j
    }
    pub fn z(&self, i: usize, j: usize) -> usize {
        self.n + 2 * self.k * self.n + i * self.n + j
    }
    pub fn w(&self, i: usize, j: usize) -> usize {
        self.n + 3 * self.k * self.n + i * self.n + j
    }
    pub fn num_vars(&self) -> usize {
        self.n + 4 * self.k * self.n
    }
    pub fn num_continuous(&self) -> usize {
        self.n + 2 * self.k * self.n
    }
    pub fn num_binary(&self) -> usize {
        2 * self.k * self.n
    }
}

#[derive(Clone, Debug)]
pub struct BlottoMilp {
    pub model: MilpModel,
    pub layout: MilpLayout,
    pub big_m: BigM,
}

impl BlottoMilp {
    /// Allocation read from a solved model, clipped to the simplex.
    pub fn allocation(&self, x: &[f64]) -> StrategyPoint {
        let mut coords: Vec<f64> = (0..self.layout.n).map(|j| x[self.layout.x(j)].max(0.0)).collect();
        let total: f64 = coords.iter().sum();
        coords.iter_mut().for_each(|v| *v /= total);
        coords.into()
    }
}

/// Builds the MILP whose optimum is `max_x sum_i q_i sum_j a_j l(x_j - y_ij)`
/// for the opponent mixture `q = sum_i q_i δ_{y_i}`.
pub fn build_best_response_milp(opponent: &FiniteMixedStrategy, game: &BlottoGame) -> Result<BlottoMilp> {
    build_milp(opponent, &game.weights, game.c)
}

fn build_milp(opponent: &FiniteMixedStrategy, weights: &[f64], c: f64) -> Result<BlottoMilp> {
    if opponent.is_empty() {
        return Err(Error::InvalidStrategy("opponent mixture has empty support".into()));
    }
    let n = weights.len();
    // The big-M constants are only valid for coordinates in [0, 1].
    let simplex = StrategySpace::Simplex { dim: n };
    if let Some(y) = opponent.atoms().iter().find(|y| !simplex.contains(y)) {
        return Err(Error::Domain(format!("{y} is not an allocation over {n} battlefields")));
    }

    let layout = MilpLayout { n, k: opponent.len() };
    let big_m = BigM::for_c(c);
    let inv = 1.0 / c;
    let mut lp = LinearProgram::new(layout.num_vars());

    for (i, (_, q)) in opponent.iter().enumerate() {
        for (j, a) in weights.iter().enumerate() {
            lp.objective[layout.s(i, j)] = q * a;
            lp.objective[layout.t(i, j)] = -q * a;
        }
    }
    lp.offset = -opponent.weights().iter().sum::<f64>() * weights.iter().sum::<f64>();

    let all_x: Vec<(usize, f64)> = (0..n).map(|j| (layout.x(j), 1.0)).collect();
    lp.add_sparse_row(&all_x, Sense::Eq, 1.0);

    for (i, y) in opponent.atoms().iter().enumerate() {
        for (j, &yj) in y.coords().iter().enumerate() {
            let (x, s, t, z, w) = (layout.x(j), layout.s(i, j), layout.t(i, j), layout.z(i, j), layout.w(i, j));
            lp.set_bounds(z, 0.0, 1.0);
            lp.set_bounds(w, 0.0, 1.0);
            // s >= (x - y + c)/c
            lp.add_sparse_row(&[(s, 1.0), (x, -inv)], Sense::Ge, 1.0 - inv * yj);
            // s <= (x - y + c)/c + M(1 - z)
            lp.add_sparse_row(
                &[(s, 1.0), (x, -inv), (z, big_m.s_lower)],
                Sense::Le,
                1.0 - inv * yj + big_m.s_lower,
            );
            // s <= M z
            lp.add_sparse_row(&[(s, 1.0), (z, -big_m.s_upper)], Sense::Le, 0.0);
            // t >= (x - y - c)/c
            lp.add_sparse_row(&[(t, 1.0), (x, -inv)], Sense::Ge, -inv * yj - 1.0);
            // t <= (x - y - c)/c + M(1 - w)
            lp.add_sparse_row(
                &[(t, 1.0), (x, -inv), (w, big_m.t_lower)],
                Sense::Le,
                -inv * yj - 1.0 + big_m.t_lower,
            );
            // t <= M w
            lp.add_sparse_row(&[(t, 1.0), (w, -big_m.t_upper)], Sense::Le, 0.0);
        }
    }

    let binary_vars = (0..layout.k)
        .flat_map(|i| (0..n).flat_map(move |j| [layout.z(i, j), layout.w(i, j)]))
        .collect();
    Ok(BlottoMilp {
        model: MilpModel::new(lp, binary_vars),
        layout,
        big_m,
    })
}

/// Player 1's best response from the MILP, with the solved model.
pub fn solve_best_response_milp(
    opponent: &FiniteMixedStrategy,
    game: &BlottoGame,
    options: &MilpOptions,
) -> Result<(OracleAnswer, MilpSolution)> {
    let milp = build_best_response_milp(opponent, game)?;
    let sol = solve_milp(&milp.model, options)?;
    if !sol.solution.is_optimal() {
        return Err(Error::Model(format!(
            "best-response MILP ended with status {:?}",
            sol.solution.status
        )));
    }
    let point = milp.allocation(&sol.solution.x);
    let value = opponent.iter().map(|(y, q)| q * game.payoff(point.coords(), y.coords())).sum();
    Ok((OracleAnswer { point, value }, sol))
}

/// Player 1's best response to `opponent` by mixed-integer programming. The
/// reported value is the exact expected payoff of the returned allocation.
pub fn milp_best_response(opponent: &FiniteMixedStrategy, game: &BlottoGame) -> Result<OracleAnswer> {
    solve_best_response_milp(opponent, game, &MilpOptions::default()).map(|(a, _)| a)
}

/// Exhaustive best response of player 1 over the simplex grid with spacing
/// `grid_c`; ties go to the lexicographically smallest allocation.
pub fn grid_enumeration_best_response(
    opponent: &FiniteMixedStrategy,
    game: &BlottoGame,
    grid_c: f64,
) -> Result<OracleAnswer> {
    EnumerationOracle::new(game, Player::One, grid_c)?.respond(opponent)
}

/// MILP oracle for either player. Player 2's problem is player 1's problem
/// with the roles swapped, since `l` is odd.
#[derive(Clone, Debug)]
pub struct MilpOracle {
    game: BlottoGame,
    player: Player,
    options: MilpOptions,
}

impl MilpOracle {
    pub fn new(game: &BlottoGame, player: Player) -> Self {
        MilpOracle {
            game: game.clone(),
            player,
            options: MilpOptions::default(),
        }
    }

    pub fn with_options(mut self, options: MilpOptions) -> Self {
        self.options = options;
        self
    }
}

impl BestResponseOracle for MilpOracle {
    fn player(&self) -> Player {
        self.player
    }

    fn respond(&self, opponent: &FiniteMixedStrategy) -> Result<OracleAnswer> {
        let (answer, _) = solve_best_response_milp(opponent, &self.game, &self.options)?;
        Ok(match self.player {
            Player::One => answer,
            Player::Two => OracleAnswer {
                value: -answer.value,
                point: answer.point,
            },
        })
    }

    fn accuracy(&self) -> f64 {
        MILP_ACCURACY
    }
}

/// Exhaustive search over the simplex grid. Exact over the grid; reported
/// accuracy 0.
#[derive(Clone, Debug)]
pub struct EnumerationOracle {
    inner: CandidateOracle,
}

impl EnumerationOracle {
    pub fn new(game: &BlottoGame, player: Player, grid_c: f64) -> Result<Self> {
        let k = grid_steps(grid_c)?;
        let size = simplex_grid_size(game.n(), k);
        if size > MAX_GRID_POINTS {
            return Err(Error::ResourceLimit {
                what: format!("simplex grid with {size} points exceeds {MAX_GRID_POINTS}"),
                incumbent: None,
                bound: f64::NAN,
            });
        }
        let grid = simplex_grid(game.n(), grid_c)?;
        Ok(EnumerationOracle {
            inner: CandidateOracle::new(game.definition(), player, grid, 0.0)?,
        })
    }

    pub fn grid(&self) -> &[StrategyPoint] {
        self.inner.candidates()
    }
}

impl BestResponseOracle for EnumerationOracle {
    fn player(&self) -> Player {
        self.inner.player()
    }

    fn respond(&self, opponent: &FiniteMixedStrategy) -> Result<OracleAnswer> {
        self.inner.respond(opponent)
    }
}

/// Whether every coordinate of `x` is a multiple of `c` (within `PROB_TOL`).
pub fn on_grid(x: &StrategyPoint, c: f64) -> bool {
    x.coords().iter().all(|v| {
        let m = v / c;
        (m - m.round()).abs() * c <= PROB_TOL
    })
}
