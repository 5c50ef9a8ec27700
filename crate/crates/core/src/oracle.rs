//! Best-response oracles.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{FiniteMixedStrategy, GameDefinition, Player, StrategyPoint};

/// A pure best response and its payoff against the opponent mixture.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleAnswer {
    pub point: StrategyPoint,
    /// `U(point, q)` for player 1, `U(p, point)` for player 2.
    pub value: f64,
}

/// Computes (approximate) best responses for one player.
///
/// Player 1's oracle maximizes `U(x, q)`, player 2's minimizes `U(p, y)`.
/// `accuracy` bounds how far the returned value may be from the true optimum.
pub trait BestResponseOracle: Send + Sync {
    fn player(&self) -> Player;

    fn respond(&self, opponent: &FiniteMixedStrategy) -> Result<OracleAnswer>;

    fn accuracy(&self) -> f64 {
        0.0
    }
}

/// Exhaustive search over a fixed, ordered list of candidate points.
///
/// Ties go to the earliest candidate. Payoffs are evaluated on the rayon
/// pool; the selection is sequential, so answers do not depend on the
/// partition.
#[derive(Clone, Debug)]
pub struct CandidateOracle {
    game: GameDefinition,
    player: Player,
    candidates: Vec<StrategyPoint>,
    accuracy: f64,
}

impl CandidateOracle {
    pub fn new(game: GameDefinition, player: Player, candidates: Vec<StrategyPoint>, accuracy: f64) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::Parameter("candidate oracle needs at least one point".into()));
        }
        candidates.iter().try_for_each(|c| game.check_point(player, c))?;
        Ok(CandidateOracle {
            game,
            player,
            candidates,
            accuracy,
        })
    }

    pub fn candidates(&self) -> &[StrategyPoint] {
        &self.candidates
    }

    pub fn game(&self) -> &GameDefinition {
        &self.game
    }
}

/// Relative tolerance under which two candidate payoffs count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// Index and payoff of the best candidate for `player`. Payoffs within
/// [`TIE_TOL`] (relative) of the optimum are ties, resolved to the lowest
/// index, so round-off in the utility does not decide between
/// mathematically equal responses.
pub(crate) fn best_candidate(
    game: &GameDefinition,
    player: Player,
    candidates: &[StrategyPoint],
    opponent: &FiniteMixedStrategy,
) -> (usize, f64) {
    // Orient so that larger is better for either player.
    let sign = match player {
        Player::One => 1.0,
        Player::Two => -1.0,
    };
    let scores: Vec<f64> = candidates
        .par_iter()
        .with_min_len(256)
        .map(|c| sign * game.payoff_against(player, c, opponent))
        .collect();
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cutoff = best - TIE_TOL * best.abs().max(1.0);
    let idx = scores.iter().position(|&s| s >= cutoff).unwrap_or(0);
    (idx, sign * scores[idx])
}

impl BestResponseOracle for CandidateOracle {
    fn player(&self) -> Player {
        self.player
    }

    fn respond(&self, opponent: &FiniteMixedStrategy) -> Result<OracleAnswer> {
        if opponent.is_empty() {
            return Err(Error::InvalidStrategy("opponent mixture has empty support".into()));
        }
        self.game.check_strategy(self.player.opponent(), opponent)?;
        let (idx, value) = best_candidate(&self.game, self.player, &self.candidates, opponent);
        Ok(OracleAnswer {
            point: self.candidates[idx].clone(),
            value,
        })
    }

    fn accuracy(&self) -> f64 {
        self.accuracy
    }
}
