//! One-dimensional games on intervals and the uniform-grid oracle.

use crate::error::{Error, Result};
use crate::game::{FiniteMixedStrategy, GameDefinition, Player, StrategyPoint, StrategySpace};
use crate::oracle::{best_candidate, BestResponseOracle, CandidateOracle, OracleAnswer};

pub const DEFAULT_RESOLUTION: f64 = 1e-4;
/// Lipschitz bound in each argument of the polynomial game on `[-1, 1]^2`.
pub const POLYNOMIAL_LIPSCHITZ: f64 = 16.0;
/// Lipschitz bound in each argument of the Townsend game on its box.
pub const TOWNSEND_LIPSCHITZ: f64 = 20.0;

/// The polynomial game `u(x, y) = 5xy - 2x^2 - 2xy^2 - y` on `[-1, 1]^2`.
/// Its value is `-0.48`.
pub fn make_polynomial_game() -> GameDefinition {
    GameDefinition::new(
        "g1-polynomial",
        StrategySpace::interval(-1.0, 1.0),
        StrategySpace::interval(-1.0, 1.0),
        |x, y| polynomial_utility(x[0], y[0]),
    )
}

pub fn polynomial_utility(x: f64, y: f64) -> f64 {
    5.0 * x * y - 2.0 * x * x - 2.0 * x * y * y - y
}

/// `u(x, y) = -cos^2((x - 0.1) y) - x sin(3x + y)` on
/// `[-2.25, 2.5] x [-2.5, 1.75]`.
pub fn make_townsend_game() -> GameDefinition {
    GameDefinition::new(
        "g2-townsend",
        StrategySpace::interval(-2.25, 2.5),
        StrategySpace::interval(-2.5, 1.75),
        |x, y| townsend_utility(x[0], y[0]),
    )
}

pub fn townsend_utility(x: f64, y: f64) -> f64 {
    let c = ((x - 0.1) * y).cos();
    -c * c - x * (3.0 * x + y).sin()
}

/// Built-in interval games with their default Lipschitz bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interval1DGame {
    Polynomial,
    Townsend,
}

impl Interval1DGame {
    pub fn definition(self) -> GameDefinition {
        match self {
            Interval1DGame::Polynomial => make_polynomial_game(),
            Interval1DGame::Townsend => make_townsend_game(),
        }
    }

    pub fn lipschitz(self) -> f64 {
        match self {
            Interval1DGame::Polynomial => POLYNOMIAL_LIPSCHITZ,
            Interval1DGame::Townsend => TOWNSEND_LIPSCHITZ,
        }
    }
}

/// Custom game on `[a1, b1] x [a2, b2]`.
pub fn interval_game<F>(name: &str, x: (f64, f64), y: (f64, f64), utility: F) -> Result<GameDefinition>
where
    F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
{
    for (lo, hi) in [x, y] {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Parameter(format!("invalid interval [{lo}, {hi}]")));
        }
    }
    Ok(GameDefinition::new(
        name,
        StrategySpace::interval(x.0, x.1),
        StrategySpace::interval(y.0, y.1),
        move |x, y| utility(x[0], y[0]),
    ))
}

/// Uniform grid on `[lo, hi]` with spacing at most `resolution`, both
/// endpoints included, ascending.
pub fn uniform_grid(lo: f64, hi: f64, resolution: f64) -> Result<Vec<f64>> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(Error::Parameter(format!("grid resolution must be positive, got {resolution}")));
    }
    if !(lo <= hi) {
        return Err(Error::Parameter(format!("invalid interval [{lo}, {hi}]")));
    }
    let steps = ((hi - lo) / resolution - 1e-9).ceil().max(if hi > lo { 1.0 } else { 0.0 }) as usize;
    if steps == 0 {
        return Ok(vec![lo]);
    }
    Ok((0..=steps)
        .map(|k| (lo + (hi - lo) * (k as f64 / steps as f64)).min(hi))
        .collect())
}

/// Grid points of a one-dimensional space: an interval or a union of
/// intervals, concatenated in component order.
fn space_grid(space: &StrategySpace, resolution: f64) -> Result<Vec<StrategyPoint>> {
    match space {
        StrategySpace::Box { lower, upper } if lower.len() == 1 => Ok(uniform_grid(lower[0], upper[0], resolution)?
            .into_iter()
            .map(StrategyPoint::scalar)
            .collect()),
        StrategySpace::Union(parts) => {
            let mut out = Vec::new();
            for part in parts {
                out.extend(space_grid(part, resolution)?);
            }
            Ok(out)
        }
        other => Err(Error::Parameter(format!(
            "grid oracle needs a one-dimensional interval space, got {other:?}"
        ))),
    }
}

/// Best response of `player` among the grid points of its space.
pub fn grid_best_response(
    opponent: &FiniteMixedStrategy,
    game: &GameDefinition,
    player: Player,
    resolution: f64,
) -> Result<OracleAnswer> {
    if opponent.is_empty() {
        return Err(Error::InvalidStrategy("opponent mixture has empty support".into()));
    }
    game.check_strategy(player.opponent(), opponent)?;
    let grid = space_grid(game.space(player), resolution)?;
    let (idx, value) = best_candidate(game, player, &grid, opponent);
    Ok(OracleAnswer {
        point: grid[idx].clone(),
        value,
    })
}

/// Grid-search oracle. With a Lipschitz bound `L` of the utility in the
/// responding player's argument, its declared accuracy is `L * resolution / 2`.
#[derive(Clone, Debug)]
pub struct GridOracle {
    inner: CandidateOracle,
    resolution: f64,
}

impl GridOracle {
    /// `lipschitz = None` leaves the accuracy unquantified (reported as 0).
    pub fn new(game: GameDefinition, player: Player, resolution: f64, lipschitz: Option<f64>) -> Result<Self> {
        let grid = space_grid(game.space(player), resolution)?;
        let accuracy = lipschitz.map_or(0.0, |l| l * resolution / 2.0);
        Ok(GridOracle {
            inner: CandidateOracle::new(game, player, grid, accuracy)?,
            resolution,
        })
    }

    pub fn for_builtin(game: Interval1DGame, player: Player, resolution: f64) -> Result<Self> {
        GridOracle::new(game.definition(), player, resolution, Some(game.lipschitz()))
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn grid(&self) -> &[StrategyPoint] {
        self.inner.candidates()
    }
}

impl BestResponseOracle for GridOracle {
    fn player(&self) -> Player {
        self.inner.player()
    }

    fn respond(&self, opponent: &FiniteMixedStrategy) -> Result<OracleAnswer> {
        self.inner.respond(opponent)
    }

    fn accuracy(&self) -> f64 {
        self.inner.accuracy()
    }
}

/// Duplicates player 1's interval `[a, b]` into `[a, b] ∪ [a + s, b + s]`
/// with `s = 2 (b - a)`, where `ũ(x, y) = u(x - s, y)` on the right copy.
/// Every best response of player 1 then has a twin on the other tile.
pub fn duplicate_tiles(game: &GameDefinition) -> Result<(GameDefinition, f64)> {
    let (a, b) = game
        .space(Player::One)
        .as_interval()
        .ok_or_else(|| Error::Parameter("tiling needs an interval space for player 1".into()))?;
    let shift = 2.0 * (b - a);
    let base = game.clone();
    let space1 = StrategySpace::Union(vec![
        StrategySpace::interval(a, b),
        StrategySpace::interval(a + shift, b + shift),
    ]);
    let tiled = GameDefinition::new(
        format!("{} (tiled)", game.name()),
        space1,
        game.space(Player::Two).clone(),
        move |x, y| {
            let xs = if x[0] > b + 0.5 * (b - a) { x[0] - shift } else { x[0] };
            base.utility_raw(&[xs], y)
        },
    );
    Ok((tiled, shift))
}
