//! Fictitious play on continuous games, with simultaneous updates.

use std::time::Instant;

use serde::Serialize;

use crate::double_oracle::respond_both;
use crate::error::{Error, Result};
use crate::game::{merge_duplicates, FiniteMixedStrategy, GameDefinition, Player, StrategyPoint};
use crate::oracle::BestResponseOracle;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FpRecord {
    pub index: usize,
    /// Best-response value of player 2 against the empirical mixture of player 1.
    pub lower: f64,
    /// Best-response value of player 1 against the empirical mixture of player 2.
    pub upper: f64,
    /// `U(empirical1, empirical2)`.
    pub value: f64,
    /// Distinct atoms in the empirical mixtures.
    pub support1: usize,
    pub support2: usize,
    pub time_s: f64,
}

impl FpRecord {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Play history of one player with duplicate plays counted together.
#[derive(Clone, Debug, Default)]
pub struct Empirical {
    atoms: Vec<StrategyPoint>,
    counts: Vec<u64>,
    total: u64,
}

impl Empirical {
    pub fn push(&mut self, point: StrategyPoint) {
        self.total += 1;
        match self.atoms.iter().position(|a| a.same_as(&point)) {
            Some(k) => self.counts[k] += 1,
            None => {
                self.atoms.push(point);
                self.counts.push(1);
            }
        }
    }

    pub fn plays(&self) -> u64 {
        self.total
    }

    /// The uniform distribution over the history.
    pub fn mixture(&self) -> Result<FiniteMixedStrategy> {
        merge_duplicates(self.atoms.clone(), self.counts.iter().map(|&c| c as f64).collect())
    }
}

#[derive(Clone, Debug)]
pub struct FpState {
    pub history1: Empirical,
    pub history2: Empirical,
    pub iteration: usize,
}

#[derive(Clone, Debug)]
pub struct FpResult {
    pub trace: Vec<FpRecord>,
    /// Empirical mixtures after the last update.
    pub empirical1: FiniteMixedStrategy,
    pub empirical2: FiniteMixedStrategy,
    /// The mixtures the last trace record was computed from, i.e. before
    /// the last update.
    pub evaluated1: FiniteMixedStrategy,
    pub evaluated2: FiniteMixedStrategy,
}

/// Runs `iters` rounds of fictitious play starting from the Dirac mixtures at
/// `init1` and `init2`. In round `i` both players best-respond to the
/// opponent's current empirical mixture; the bounds of that round are the
/// two best-response values.
pub fn run_fictitious_play(
    game: &GameDefinition,
    oracle1: &dyn BestResponseOracle,
    oracle2: &dyn BestResponseOracle,
    init1: StrategyPoint,
    init2: StrategyPoint,
    iters: usize,
) -> Result<FpResult> {
    run_fictitious_play_with(game, oracle1, oracle2, init1, init2, iters, |_| {})
}

pub fn run_fictitious_play_with<F>(
    game: &GameDefinition,
    oracle1: &dyn BestResponseOracle,
    oracle2: &dyn BestResponseOracle,
    init1: StrategyPoint,
    init2: StrategyPoint,
    iters: usize,
    mut on_iteration: F,
) -> Result<FpResult>
where
    F: FnMut(&FpRecord),
{
    if iters == 0 {
        return Err(Error::Parameter("fictitious play needs at least one iteration".into()));
    }
    if oracle1.player() != Player::One || oracle2.player() != Player::Two {
        return Err(Error::OracleContract("oracles passed for the wrong players".into()));
    }
    game.check_point(Player::One, &init1)?;
    game.check_point(Player::Two, &init2)?;

    let mut state = FpState {
        history1: Empirical::default(),
        history2: Empirical::default(),
        iteration: 0,
    };
    state.history1.push(init1);
    state.history2.push(init2);

    let mut trace = Vec::with_capacity(iters);
    let mut evaluated = None;
    for index in 1..=iters {
        let started = Instant::now();
        let emp1 = state.history1.mixture()?;
        let emp2 = state.history2.mixture()?;
        let (a1, a2) = respond_both(oracle1, oracle2, &emp1, &emp2);
        let (a1, a2) = (a1?, a2?);
        for (player, point) in [(Player::One, &a1.point), (Player::Two, &a2.point)] {
            if !game.space(player).contains(point) {
                return Err(Error::OracleContract(format!(
                    "{player} oracle returned {point} outside its strategy space"
                )));
            }
        }
        let record = FpRecord {
            index,
            lower: game.payoff_against(Player::Two, &a2.point, &emp1),
            upper: game.payoff_against(Player::One, &a1.point, &emp2),
            value: game.expected_utility_unchecked(&emp1, &emp2),
            support1: emp1.len(),
            support2: emp2.len(),
            time_s: started.elapsed().as_secs_f64(),
        };
        on_iteration(&record);
        trace.push(record);
        state.history1.push(a1.point);
        state.history2.push(a2.point);
        state.iteration = index;
        evaluated = Some((emp1, emp2));
    }

    let (evaluated1, evaluated2) = evaluated.expect("at least one iteration ran");
    Ok(FpResult {
        trace,
        empirical1: state.history1.mixture()?,
        empirical2: state.history2.mixture()?,
        evaluated1,
        evaluated2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::FiniteGame;

    #[test]
    fn singleton_game() {
        let g = FiniteGame::new(vec![vec![4.0]]).unwrap();
        let (o1, o2) = (g.exhaustive_oracle(Player::One), g.exhaustive_oracle(Player::Two));
        let res = run_fictitious_play(&g.definition, &o1, &o2, 0.0.into(), 0.0.into(), 3).unwrap();
        for r in &res.trace {
            assert_eq!((r.lower, r.upper, r.value), (4.0, 4.0, 4.0));
        }
        assert_eq!(res.empirical1.len(), 1);
        assert_eq!(res.empirical2.len(), 1);
    }

    #[test]
    fn empirical_weights_count_plays() {
        let mut e = Empirical::default();
        for x in [0.0, 1.0, 0.0, 0.0] {
            e.push(x.into());
        }
        let m = e.mixture().unwrap();
        assert_eq!(m.weight_of(&0.0.into()), 0.75);
        assert_eq!(m.weight_of(&1.0.into()), 0.25);
    }
}
