//! Exact equilibria of finite zero-sum games by linear programming.

use crate::error::{Error, Result};
use crate::game::{merge_duplicates, FiniteMixedStrategy, GameDefinition, Player, StrategyPoint};
use crate::lp::{solve_lp, LinearProgram, LpStatus, Sense};

/// Payoff matrix of a finite subgame; the row player maximizes.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixGame {
    pub payoff: Vec<Vec<f64>>,
    pub row_strategies: Vec<StrategyPoint>,
    pub col_strategies: Vec<StrategyPoint>,
}

impl MatrixGame {
    pub fn rows(&self) -> usize {
        self.payoff.len()
    }

    pub fn cols(&self) -> usize {
        self.payoff.first().map_or(0, Vec::len)
    }
}

/// Equilibrium weights over rows and columns of a payoff matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSolution {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
    /// `row^T A col`.
    pub value: f64,
}

/// Builds `A[i][j] = u(x_i, y_j)` for the subgame on `xs x ys`.
pub fn subgame_matrix(game: &GameDefinition, xs: &[StrategyPoint], ys: &[StrategyPoint]) -> Result<MatrixGame> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Domain("subgame strategy sets must be nonempty".into()));
    }
    xs.iter().try_for_each(|x| game.check_point(Player::One, x))?;
    ys.iter().try_for_each(|y| game.check_point(Player::Two, y))?;
    let payoff = xs
        .iter()
        .map(|x| ys.iter().map(|y| game.utility(x, y)).collect())
        .collect();
    Ok(MatrixGame {
        payoff,
        row_strategies: xs.to_vec(),
        col_strategies: ys.to_vec(),
    })
}

fn check_matrix(payoff: &[Vec<f64>]) -> Result<(usize, usize)> {
    let m = payoff.len();
    let n = payoff.first().map_or(0, Vec::len);
    if m == 0 || n == 0 {
        return Err(Error::Model("empty payoff matrix".into()));
    }
    if payoff.iter().any(|r| r.len() != n) {
        return Err(Error::Model("ragged payoff matrix".into()));
    }
    if payoff.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Model("non-finite payoff entry".into()));
    }
    Ok((m, n))
}

/// Solves the zero-sum matrix game with payoff `payoff` (row player
/// maximizes).
///
/// The matrix is shifted by `1 + max(0, -min entry)` so that every entry is
/// positive, and each player's strategy comes from the reciprocal-value LP:
/// the row player minimizes `sum u` subject to `A^T u >= 1`, the column
/// player maximizes `sum w` subject to `A w <= 1`.
pub fn solve_matrix(payoff: &[Vec<f64>]) -> Result<MatrixSolution> {
    let (m, n) = check_matrix(payoff)?;
    let min = payoff.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 + (-min).max(0.0);

    let mut row_lp = LinearProgram::new(m);
    row_lp.objective = vec![-1.0; m];
    for j in 0..n {
        row_lp.add_row((0..m).map(|i| payoff[i][j] + shift).collect(), Sense::Ge, 1.0);
    }
    let mut col_lp = LinearProgram::new(n);
    col_lp.objective = vec![1.0; n];
    for row in payoff {
        col_lp.add_row(row.iter().map(|a| a + shift).collect(), Sense::Le, 1.0);
    }

    let row = normalized(solve_lp(&row_lp)?.x_if_optimal()?)?;
    let col = normalized(solve_lp(&col_lp)?.x_if_optimal()?)?;
    let value = bilinear(payoff, &row, &col);
    Ok(MatrixSolution { row, col, value })
}

trait OptimalPrimal {
    fn x_if_optimal(self) -> Result<Vec<f64>>;
}

impl OptimalPrimal for crate::lp::LpSolution {
    fn x_if_optimal(self) -> Result<Vec<f64>> {
        match self.status {
            LpStatus::Optimal => Ok(self.x),
            status => Err(Error::Model(format!("matrix game LP ended with status {status:?}"))),
        }
    }
}

fn normalized(mut x: Vec<f64>) -> Result<Vec<f64>> {
    x.iter_mut().for_each(|v| *v = v.max(0.0));
    let total: f64 = x.iter().sum();
    if total <= 0.0 {
        return Err(Error::Model("matrix game LP returned a zero vector".into()));
    }
    x.iter_mut().for_each(|v| *v /= total);
    Ok(x)
}

fn bilinear(payoff: &[Vec<f64>], row: &[f64], col: &[f64]) -> f64 {
    payoff
        .iter()
        .zip(row)
        .map(|(r, p)| p * r.iter().zip(col).map(|(a, q)| a * q).sum::<f64>())
        .sum()
}

/// `(max_i (A q)_i, min_j (p^T A)_j)`: the best deviation payoffs of the row
/// and column players. Equal at an equilibrium.
pub fn deviation_payoffs(payoff: &[Vec<f64>], row: &[f64], col: &[f64]) -> (f64, f64) {
    let best_row = payoff
        .iter()
        .map(|r| r.iter().zip(col).map(|(a, q)| a * q).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let n = col.len();
    let best_col = (0..n)
        .map(|j| payoff.iter().zip(row).map(|(r, p)| p * r[j]).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    (best_row, best_col)
}

/// Equilibrium of a subgame as mixtures over its strategy points.
pub fn solve_zero_sum(mg: &MatrixGame) -> Result<(FiniteMixedStrategy, FiniteMixedStrategy, f64)> {
    let (m, n) = check_matrix(&mg.payoff)?;
    if mg.row_strategies.len() != m || mg.col_strategies.len() != n {
        return Err(Error::Model(format!(
            "{m}x{n} payoff matrix with {} row and {} column strategies",
            mg.row_strategies.len(),
            mg.col_strategies.len()
        )));
    }
    let sol = solve_matrix(&mg.payoff)?;
    let p = merge_duplicates(mg.row_strategies.clone(), sol.row)?;
    let q = merge_duplicates(mg.col_strategies.clone(), sol.col)?;
    Ok((p, q, sol.value))
}
