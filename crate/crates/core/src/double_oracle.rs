//! The double oracle strategy-generation loop.
//!
//! Each iteration solves the finite subgame on the current strategy sets,
//! asks both oracles for best responses to the subgame equilibrium, records
//! the resulting lower and upper bounds on the game value, and adds the
//! responses to the sets. The loop stops once `upper - lower <= epsilon`;
//! the subgame equilibrium is then an `(upper - lower)`-equilibrium of the
//! whole game.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{FiniteMixedStrategy, GameDefinition, Player, StrategyPoint};
use crate::matrix_game::solve_matrix;
use crate::oracle::{BestResponseOracle, OracleAnswer};

pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const DEFAULT_MAX_ITERS: usize = 1000;

/// Slack for LP round-off in the stopping test.
pub const STOP_TOL: f64 = 1e-9;
/// Gap accepted as zero once an iteration adds no new strategy.
pub const STABLE_GAP_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    /// 1-based iteration index.
    pub index: usize,
    /// `U(p_i, y_{i+1})`.
    pub lower: f64,
    /// `U(x_{i+1}, q_i)`.
    pub upper: f64,
    /// `U(p_i, q_i)`.
    pub subgame_value: f64,
    /// Sizes of the strategy sets of the solved subgame.
    pub size_x: usize,
    pub size_y: usize,
    pub x_next: StrategyPoint,
    pub y_next: StrategyPoint,
    /// Whether the response was new to the strategy set.
    pub x_added: bool,
    pub y_added: bool,
    pub time_s: f64,
}

impl IterationRecord {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Gap,
    IterationCap,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub p_star: FiniteMixedStrategy,
    pub q_star: FiniteMixedStrategy,
    /// `U(p_star, q_star)`.
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// `upper - lower` of the last iteration.
    pub gap: f64,
    pub trace: Vec<IterationRecord>,
    pub terminated_by: Termination,
    /// Final strategy sets, including the last responses.
    pub strategies_x: Vec<StrategyPoint>,
    pub strategies_y: Vec<StrategyPoint>,
    /// First iteration that added no new strategy to either set, if any.
    pub stabilized_at: Option<usize>,
}

/// Strategy sets with the cached subgame payoff matrix.
struct Subgame<'a> {
    game: &'a GameDefinition,
    xs: Vec<StrategyPoint>,
    ys: Vec<StrategyPoint>,
    payoff: Vec<Vec<f64>>,
}

impl<'a> Subgame<'a> {
    fn new(game: &'a GameDefinition) -> Self {
        Subgame {
            game,
            xs: Vec::new(),
            ys: Vec::new(),
            payoff: Vec::new(),
        }
    }

    /// Adds `x` unless it duplicates a row; returns whether it was added.
    fn add_x(&mut self, x: StrategyPoint) -> bool {
        if self.xs.iter().any(|e| e.same_as(&x)) {
            return false;
        }
        let row = self.ys.iter().map(|y| self.game.utility(&x, y)).collect();
        self.payoff.push(row);
        self.xs.push(x);
        true
    }

    fn add_y(&mut self, y: StrategyPoint) -> bool {
        if self.ys.iter().any(|e| e.same_as(&y)) {
            return false;
        }
        for (row, x) in self.payoff.iter_mut().zip(&self.xs) {
            row.push(self.game.utility(x, &y));
        }
        self.ys.push(y);
        true
    }
}

fn check_answer(game: &GameDefinition, player: Player, answer: &OracleAnswer) -> Result<()> {
    if game.space(player).contains(&answer.point) {
        Ok(())
    } else {
        Err(Error::OracleContract(format!(
            "{player} oracle returned {} outside its strategy space",
            answer.point
        )))
    }
}

fn check_oracle_side(oracle: &dyn BestResponseOracle, expected: Player) -> Result<()> {
    if oracle.player() == expected {
        Ok(())
    } else {
        Err(Error::OracleContract(format!(
            "expected an oracle for {expected}, got one for {}",
            oracle.player()
        )))
    }
}

/// Queries both oracles, in parallel.
pub(crate) fn respond_both(
    oracle1: &dyn BestResponseOracle,
    oracle2: &dyn BestResponseOracle,
    p: &FiniteMixedStrategy,
    q: &FiniteMixedStrategy,
) -> (Result<OracleAnswer>, Result<OracleAnswer>) {
    rayon::join(|| oracle1.respond(q), || oracle2.respond(p))
}

/// Runs the double oracle algorithm from the initial sets `x1`, `y1`.
pub fn run_double_oracle(
    game: &GameDefinition,
    oracle1: &dyn BestResponseOracle,
    oracle2: &dyn BestResponseOracle,
    x1: &[StrategyPoint],
    y1: &[StrategyPoint],
    epsilon: f64,
    max_iters: usize,
) -> Result<SolveResult> {
    run_double_oracle_with(game, oracle1, oracle2, x1, y1, epsilon, max_iters, |_| {})
}

/// [`run_double_oracle`] with a callback invoked after every iteration.
#[allow(clippy::too_many_arguments)]
pub fn run_double_oracle_with<F>(
    game: &GameDefinition,
    oracle1: &dyn BestResponseOracle,
    oracle2: &dyn BestResponseOracle,
    x1: &[StrategyPoint],
    y1: &[StrategyPoint],
    epsilon: f64,
    max_iters: usize,
    mut on_iteration: F,
) -> Result<SolveResult>
where
    F: FnMut(&IterationRecord),
{
    if x1.is_empty() || y1.is_empty() {
        return Err(Error::Parameter("initial strategy sets must be nonempty".into()));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::Parameter(format!("epsilon must be >= 0, got {epsilon}")));
    }
    if max_iters == 0 {
        return Err(Error::Parameter("max_iters must be at least 1".into()));
    }
    check_oracle_side(oracle1, Player::One)?;
    check_oracle_side(oracle2, Player::Two)?;
    x1.iter().try_for_each(|x| game.check_point(Player::One, x))?;
    y1.iter().try_for_each(|y| game.check_point(Player::Two, y))?;

    let mut sub = Subgame::new(game);
    for x in x1 {
        sub.add_x(x.clone());
    }
    for y in y1 {
        sub.add_y(y.clone());
    }

    let mut trace = Vec::new();
    let mut stabilized_at = None;
    loop {
        let started = Instant::now();
        let index = trace.len() + 1;
        let (size_x, size_y) = (sub.xs.len(), sub.ys.len());

        let sol = solve_matrix(&sub.payoff)?;
        let p = crate::game::merge_duplicates(sub.xs.clone(), sol.row)?;
        let q = crate::game::merge_duplicates(sub.ys.clone(), sol.col)?;

        let (a1, a2) = respond_both(oracle1, oracle2, &p, &q);
        let (a1, a2) = (a1?, a2?);
        check_answer(game, Player::One, &a1)?;
        check_answer(game, Player::Two, &a2)?;

        let upper = game.payoff_against(Player::One, &a1.point, &q);
        let lower = game.payoff_against(Player::Two, &a2.point, &p);
        let subgame_value = game.expected_utility_unchecked(&p, &q);

        let x_added = sub.add_x(a1.point.clone());
        let y_added = sub.add_y(a2.point.clone());
        if !x_added && !y_added && stabilized_at.is_none() {
            stabilized_at = Some(index);
        }

        let record = IterationRecord {
            index,
            lower,
            upper,
            subgame_value,
            size_x,
            size_y,
            x_next: a1.point,
            y_next: a2.point,
            x_added,
            y_added,
            time_s: started.elapsed().as_secs_f64(),
        };
        on_iteration(&record);
        let gap = record.gap();
        trace.push(record);

        let stable = !x_added && !y_added;
        let done = gap <= epsilon + STOP_TOL || (stable && gap <= epsilon + STABLE_GAP_TOL);
        if done || index >= max_iters {
            return Ok(SolveResult {
                p_star: p,
                q_star: q,
                value: subgame_value,
                lower,
                upper,
                gap,
                trace,
                terminated_by: if done { Termination::Gap } else { Termination::IterationCap },
                strategies_x: sub.xs,
                strategies_y: sub.ys,
                stabilized_at,
            });
        }
    }
}

/// Lower and upper bounds on the game value certified by a profile: the
/// best-response payoffs of player 2 against `p` and of player 1 against `q`.
pub fn bounds_from_profile(
    game: &GameDefinition,
    p: &FiniteMixedStrategy,
    q: &FiniteMixedStrategy,
    oracle1: &dyn BestResponseOracle,
    oracle2: &dyn BestResponseOracle,
) -> Result<(f64, f64)> {
    check_oracle_side(oracle1, Player::One)?;
    check_oracle_side(oracle2, Player::Two)?;
    game.check_strategy(Player::One, p)?;
    game.check_strategy(Player::Two, q)?;
    let (a1, a2) = respond_both(oracle1, oracle2, p, q);
    let (a1, a2) = (a1?, a2?);
    check_answer(game, Player::One, &a1)?;
    check_answer(game, Player::Two, &a2)?;
    Ok((
        game.payoff_against(Player::Two, &a2.point, p),
        game.payoff_against(Player::One, &a1.point, q),
    ))
}
