//! Double oracle solver for continuous two-player zero-sum games.
//!
//! The crate provides the pieces of the strategy-generation loop: a game
//! model with finitely supported mixed strategies ([`game`]), a dense simplex
//! and branch-and-bound solver ([`lp`]), exact matrix-game equilibria
//! ([`matrix_game`]), the loop itself ([`double_oracle`]), the fictitious
//! play baseline ([`fictitious_play`]) and concrete games with their
//! best-response oracles ([`oracle_1d`], [`blotto`], [`finite`]).

pub mod blotto;
pub mod double_oracle;
pub mod error;
pub mod fictitious_play;
pub mod finite;
pub mod game;
pub mod lp;
pub mod matrix_game;
pub mod oracle;
pub mod oracle_1d;

pub use double_oracle::{bounds_from_profile, run_double_oracle, IterationRecord, SolveResult, Termination};
pub use error::{Error, Result};
pub use game::{expected_utility, merge_duplicates, FiniteMixedStrategy, GameDefinition, Player, StrategyPoint, StrategySpace};
pub use oracle::{BestResponseOracle, OracleAnswer};
