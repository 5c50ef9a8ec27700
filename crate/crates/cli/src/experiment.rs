//! Builds games, oracles and initial strategies from a config and runs the
//! selected algorithm.

use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};

use anyhow::{anyhow, bail, Context, Result};
use dogame::blotto::{corners, simplex_grid, BlottoGame, EnumerationOracle, MilpOracle};
use dogame::double_oracle::run_double_oracle_with;
use dogame::fictitious_play::run_fictitious_play_with;
use dogame::finite::FiniteGame;
use dogame::oracle_1d::{GridOracle, Interval1DGame};
use dogame::{
    BestResponseOracle, FiniteMixedStrategy, GameDefinition, OracleAnswer, Player, StrategyPoint, Termination,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Algorithm, ExperimentConfig, GameKind, InitKind, OracleKind};

/// Support size times battlefields above which the MILP gets slow.
const MILP_WARN_SIZE: usize = 200;

/// One row of the trace, shared by both algorithms.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub lower: f64,
    pub upper: f64,
    pub subgame_value: f64,
    pub size_x: usize,
    pub size_y: usize,
    pub time_s: f64,
}

impl TraceRow {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub p: FiniteMixedStrategy,
    pub q: FiniteMixedStrategy,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub iterations: usize,
    pub terminated_by: Termination,
}

/// A game with its two oracles and the initial strategy sets.
pub struct Setup {
    pub game: GameDefinition,
    pub oracle1: Box<dyn BestResponseOracle>,
    pub oracle2: Box<dyn BestResponseOracle>,
    pub x1: Vec<StrategyPoint>,
    pub y1: Vec<StrategyPoint>,
}

/// MILP oracle that warns once when the model grows large.
struct WarningMilp {
    inner: MilpOracle,
    n: usize,
    warned: AtomicBool,
}

impl BestResponseOracle for WarningMilp {
    fn player(&self) -> Player {
        self.inner.player()
    }

    fn respond(&self, opponent: &FiniteMixedStrategy) -> dogame::Result<OracleAnswer> {
        let size = opponent.len() * self.n;
        if size > MILP_WARN_SIZE && !self.warned.swap(true, Ordering::Relaxed) {
            let hint = if self.n == 3 { "; consider --oracle enumeration" } else { "" };
            eprintln!(
                "warning: MILP with {} opponent atoms and n = {} has {} binaries{hint}",
                opponent.len(),
                self.n,
                2 * size
            );
        }
        self.inner.respond(opponent)
    }

    fn accuracy(&self) -> f64 {
        self.inner.accuracy()
    }
}

/// Parses a payoff matrix: one row per line, entries separated by commas or
/// whitespace, `#` starts a comment.
pub fn read_matrix(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).with_context(|| format!("matrix: cannot read {}", path.display()))?;
    let mut rows = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| anyhow!("matrix: {}:{}: cannot parse `{t}`", path.display(), lineno + 1))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn interval_setup(cfg: &ExperimentConfig, kind: Interval1DGame) -> Result<Setup> {
    let game = kind.definition();
    let lipschitz = Some(cfg.lipschitz.unwrap_or(kind.lipschitz()));
    let oracle1 = GridOracle::new(game.clone(), Player::One, cfg.resolution, lipschitz)?;
    let oracle2 = GridOracle::new(game.clone(), Player::Two, cfg.resolution, lipschitz)?;
    let (x1, y1) = match cfg.init {
        InitKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let x = game.space(Player::One).sample(&mut rng);
            let y = game.space(Player::Two).sample(&mut rng);
            (vec![x], vec![y])
        }
        InitKind::Corners => {
            let ends = |p: Player| {
                let (lo, hi) = game.space(p).as_interval().expect("interval game");
                vec![StrategyPoint::scalar(lo), StrategyPoint::scalar(hi)]
            };
            (ends(Player::One), ends(Player::Two))
        }
        InitKind::Grid => bail!("init: grid initialization is only available for blotto and matrix games"),
    };
    Ok(Setup {
        game,
        oracle1: Box::new(oracle1),
        oracle2: Box::new(oracle2),
        x1,
        y1,
    })
}

fn blotto_setup(cfg: &ExperimentConfig) -> Result<Setup> {
    let bg = BlottoGame::new(cfg.a.clone(), cfg.c).map_err(|e| anyhow!("c: {e}"))?;
    let game = bg.definition();
    let (oracle1, oracle2): (Box<dyn BestResponseOracle>, Box<dyn BestResponseOracle>) = match cfg.oracle {
        OracleKind::Milp => {
            let make = |p| WarningMilp {
                inner: MilpOracle::new(&bg, p),
                n: cfg.n,
                warned: AtomicBool::new(false),
            };
            (Box::new(make(Player::One)), Box::new(make(Player::Two)))
        }
        OracleKind::Enumeration => (
            Box::new(EnumerationOracle::new(&bg, Player::One, cfg.c)?),
            Box::new(EnumerationOracle::new(&bg, Player::Two, cfg.c)?),
        ),
    };
    let (x1, y1) = match cfg.init {
        InitKind::Corners => (corners(cfg.n), corners(cfg.n)),
        InitKind::Grid => {
            let grid = simplex_grid(cfg.n, cfg.c).map_err(|e| anyhow!("c: {e}"))?;
            (grid.clone(), grid)
        }
        InitKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let x = game.space(Player::One).sample(&mut rng);
            let y = game.space(Player::Two).sample(&mut rng);
            (vec![x], vec![y])
        }
    };
    Ok(Setup {
        game,
        oracle1,
        oracle2,
        x1,
        y1,
    })
}

fn matrix_setup(cfg: &ExperimentConfig) -> Result<Setup> {
    let path = cfg.matrix.as_ref().ok_or_else(|| anyhow!("matrix: the matrix game needs a payoff file"))?;
    let payoff = read_matrix(path)?;
    let fg = FiniteGame::new(payoff).map_err(|e| anyhow!("matrix: {e}"))?;
    let (x1, y1) = match cfg.init {
        InitKind::Grid => (fg.rows.clone(), fg.cols.clone()),
        InitKind::Corners => (fg.rows[..1].to_vec(), fg.cols[..1].to_vec()),
        InitKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let i = rng.gen_range(0..fg.rows.len());
            let j = rng.gen_range(0..fg.cols.len());
            (vec![fg.rows[i].clone()], vec![fg.cols[j].clone()])
        }
    };
    Ok(Setup {
        oracle1: Box::new(fg.exhaustive_oracle(Player::One)),
        oracle2: Box::new(fg.exhaustive_oracle(Player::Two)),
        game: fg.definition,
        x1,
        y1,
    })
}

pub fn build(cfg: &ExperimentConfig) -> Result<Setup> {
    match cfg.game {
        GameKind::Polynomial => interval_setup(cfg, Interval1DGame::Polynomial),
        GameKind::Townsend => interval_setup(cfg, Interval1DGame::Townsend),
        GameKind::Blotto => blotto_setup(cfg),
        GameKind::Matrix => matrix_setup(cfg),
    }
}

/// Runs the configured algorithm, passing every trace row to `on_row` as it
/// is produced. Fictitious play runs `max_iters` rounds and counts as
/// gap-terminated when its last gap is within epsilon.
pub fn run<F>(cfg: &ExperimentConfig, setup: &Setup, mut on_row: F) -> Result<Outcome>
where
    F: FnMut(&TraceRow),
{
    let o1 = setup.oracle1.as_ref();
    let o2 = setup.oracle2.as_ref();
    match cfg.algorithm {
        Algorithm::DoubleOracle => {
            let res = run_double_oracle_with(&setup.game, o1, o2, &setup.x1, &setup.y1, cfg.epsilon, cfg.max_iters, |r| {
                on_row(&TraceRow {
                    iter: r.index,
                    lower: r.lower,
                    upper: r.upper,
                    subgame_value: r.subgame_value,
                    size_x: r.size_x,
                    size_y: r.size_y,
                    time_s: r.time_s,
                })
            })?;
            Ok(Outcome {
                iterations: res.trace.len(),
                p: res.p_star,
                q: res.q_star,
                value: res.value,
                lower: res.lower,
                upper: res.upper,
                gap: res.gap,
                terminated_by: res.terminated_by,
            })
        }
        Algorithm::FictitiousPlay => {
            let (init1, init2) = (setup.x1[0].clone(), setup.y1[0].clone());
            let res = run_fictitious_play_with(&setup.game, o1, o2, init1, init2, cfg.max_iters, |r| {
                on_row(&TraceRow {
                    iter: r.index,
                    lower: r.lower,
                    upper: r.upper,
                    subgame_value: r.value,
                    size_x: r.support1,
                    size_y: r.support2,
                    time_s: r.time_s,
                })
            })?;
            let last = res.trace.last().expect("at least one round");
            let gap = last.gap();
            Ok(Outcome {
                iterations: res.trace.len(),
                value: last.value,
                lower: last.lower,
                upper: last.upper,
                gap,
                terminated_by: if gap <= cfg.epsilon { Termination::Gap } else { Termination::IterationCap },
                p: res.evaluated1,
                q: res.evaluated2,
            })
        }
    }
}
