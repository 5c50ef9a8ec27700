//! Finite matrix games embedded as [`GameDefinition`]s.
//!
//! Row `i` is the point `[i]` of player 1's finite space and column `j` the
//! point `[j]` of player 2's; the utility looks the payoff up in the matrix.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::game::{GameDefinition, Player, StrategyPoint, StrategySpace};
use crate::oracle::CandidateOracle;

#[derive(Clone, Debug)]
pub struct FiniteGame {
    pub definition: GameDefinition,
    pub rows: Vec<StrategyPoint>,
    pub cols: Vec<StrategyPoint>,
}

impl FiniteGame {
    pub fn new(payoff: Vec<Vec<f64>>) -> Result<Self> {
        let m = payoff.len();
        let n = payoff.first().map_or(0, Vec::len);
        if m == 0 || n == 0 || payoff.iter().any(|r| r.len() != n) {
            return Err(Error::Parameter("payoff matrix must be nonempty and rectangular".into()));
        }
        if payoff.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("payoff matrix has non-finite entries".into()));
        }
        let rows: Vec<StrategyPoint> = (0..m).map(|i| StrategyPoint::scalar(i as f64)).collect();
        let cols: Vec<StrategyPoint> = (0..n).map(|j| StrategyPoint::scalar(j as f64)).collect();
        let table = Arc::new(payoff);
        let definition = GameDefinition::new(
            format!("finite {m}x{n}"),
            StrategySpace::Finite(rows.clone()),
            StrategySpace::Finite(cols.clone()),
            move |x, y| {
                let i = (x[0].round().max(0.0) as usize).min(m - 1);
                let j = (y[0].round().max(0.0) as usize).min(n - 1);
                table[i][j]
            },
        );
        Ok(FiniteGame { definition, rows, cols })
    }

    /// Exact oracle for `player`: searches every pure strategy.
    pub fn exhaustive_oracle(&self, player: Player) -> CandidateOracle {
        let points = match player {
            Player::One => self.rows.clone(),
            Player::Two => self.cols.clone(),
        };
        CandidateOracle::new(self.definition.clone(), player, points, 0.0).expect("points lie in their own finite space")
    }
}
