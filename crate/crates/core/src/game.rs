//! Strategy points, finitely supported mixed strategies and game definitions.
//!
//! A game is a pair of strategy spaces together with the pure-strategy
//! utility `u(x, y)` of the maximizing player. Mixed strategies are always
//! finitely supported: a list of atoms with probability weights.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two atoms closer than this in max-norm are the same strategy.
pub const MERGE_TOL: f64 = 1e-9;

/// Tolerance on probability sums (mixture weights, simplex coordinates).
pub const PROB_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    /// The maximizer.
    One,
    /// The minimizer.
    Two,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::One => write!(f, "player 1"),
            Player::Two => write!(f, "player 2"),
        }
    }
}

/// A pure strategy: a point in `R^m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrategyPoint(Vec<f64>);

impl StrategyPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        StrategyPoint(coords)
    }

    pub fn scalar(x: f64) -> Self {
        StrategyPoint(vec![x])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Max-norm distance; infinite when the dimensions differ.
    pub fn max_dist(&self, other: &StrategyPoint) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn same_as(&self, other: &StrategyPoint) -> bool {
        self.max_dist(other) <= MERGE_TOL
    }
}

impl From<Vec<f64>> for StrategyPoint {
    fn from(coords: Vec<f64>) -> Self {
        StrategyPoint(coords)
    }
}

impl From<f64> for StrategyPoint {
    fn from(x: f64) -> Self {
        StrategyPoint(vec![x])
    }
}

impl fmt::Display for StrategyPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Strategy-space descriptor. Only membership tests are needed by the solvers.
#[derive(Clone, Debug, PartialEq)]
pub enum StrategySpace {
    /// Axis-aligned box `lower <= x <= upper`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Probability simplex in `R^dim`.
    Simplex { dim: usize },
    /// An explicit finite set of points.
    Finite(Vec<StrategyPoint>),
    /// Union of component spaces of equal dimension.
    Union(Vec<StrategySpace>),
}

impl StrategySpace {
    pub fn interval(lower: f64, upper: f64) -> Self {
        StrategySpace::Box {
            lower: vec![lower],
            upper: vec![upper],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            StrategySpace::Box { lower, .. } => lower.len(),
            StrategySpace::Simplex { dim } => *dim,
            StrategySpace::Finite(points) => points.first().map_or(0, StrategyPoint::dim),
            StrategySpace::Union(parts) => parts.first().map_or(0, StrategySpace::dim),
        }
    }

    /// Bounds of a one-dimensional box, if this is one.
    pub fn as_interval(&self) -> Option<(f64, f64)> {
        match self {
            StrategySpace::Box { lower, upper } if lower.len() == 1 => Some((lower[0], upper[0])),
            _ => None,
        }
    }

    pub fn contains(&self, point: &StrategyPoint) -> bool {
        if !point.is_finite() || point.dim() != self.dim() {
            return false;
        }
        let c = point.coords();
        match self {
            StrategySpace::Box { lower, upper } => c
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (lo, hi))| *v >= lo - MERGE_TOL && *v <= hi + MERGE_TOL),
            StrategySpace::Simplex { .. } => {
                c.iter().all(|v| *v >= 0.0) && (c.iter().sum::<f64>() - 1.0).abs() <= PROB_TOL
            }
            StrategySpace::Finite(points) => points.iter().any(|p| p.same_as(point)),
            StrategySpace::Union(parts) => parts.iter().any(|s| s.contains(point)),
        }
    }

    /// Draws a point from this space: uniform on boxes and simplices, uniform
    /// over the elements of a finite set, and a uniformly chosen component
    /// for unions.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> StrategyPoint {
        match self {
            StrategySpace::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(lo, hi)| if hi > lo { rng.gen_range(*lo..=*hi) } else { *lo })
                .collect::<Vec<_>>()
                .into(),
            StrategySpace::Simplex { dim } => {
                let mut cuts: Vec<f64> = (0..dim.saturating_sub(1)).map(|_| rng.gen::<f64>()).collect();
                cuts.sort_by(f64::total_cmp);
                let mut coords = Vec::with_capacity(*dim);
                let mut prev = 0.0;
                for cut in cuts {
                    coords.push(cut - prev);
                    prev = cut;
                }
                coords.push(1.0 - prev);
                StrategyPoint(coords)
            }
            StrategySpace::Finite(points) => points[rng.gen_range(0..points.len())].clone(),
            StrategySpace::Union(parts) => parts[rng.gen_range(0..parts.len())].sample(rng),
        }
    }
}

/// Pure-strategy utility of player 1.
pub type UtilityFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;

/// A continuous zero-sum game `(X, Y, u)`.
#[derive(Clone)]
pub struct GameDefinition {
    name: String,
    space1: StrategySpace,
    space2: StrategySpace,
    utility: Arc<UtilityFn>,
}

impl fmt::Debug for GameDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GameDefinition")
            .field("name", &self.name)
            .field("space1", &self.space1)
            .field("space2", &self.space2)
            .finish_non_exhaustive()
    }
}

impl GameDefinition {
    pub fn new<F>(name: impl Into<String>, space1: StrategySpace, space2: StrategySpace, utility: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        GameDefinition {
            name: name.into(),
            space1,
            space2,
            utility: Arc::new(utility),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self, player: Player) -> &StrategySpace {
        match player {
            Player::One => &self.space1,
            Player::Two => &self.space2,
        }
    }

    /// `u(x, y)` without membership checks.
    #[inline]
    pub fn utility(&self, x: &StrategyPoint, y: &StrategyPoint) -> f64 {
        (self.utility)(x.coords(), y.coords())
    }

    /// `u` on raw coordinate slices.
    #[inline]
    pub fn utility_raw(&self, x: &[f64], y: &[f64]) -> f64 {
        (self.utility)(x, y)
    }

    pub fn check_point(&self, player: Player, point: &StrategyPoint) -> Result<()> {
        if self.space(player).contains(point) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "atom {point} is outside the strategy space of {player} in game {}",
                self.name
            )))
        }
    }

    pub fn check_strategy(&self, player: Player, strategy: &FiniteMixedStrategy) -> Result<()> {
        strategy.atoms().iter().try_for_each(|a| self.check_point(player, a))
    }

    /// Payoff of a pure strategy of `player` against the opponent's mixture:
    /// `U(point, q)` for player 1 and `U(p, point)` for player 2. Unchecked.
    pub fn payoff_against(&self, player: Player, point: &StrategyPoint, opponent: &FiniteMixedStrategy) -> f64 {
        match player {
            Player::One => opponent.iter().map(|(y, w)| w * self.utility(point, y)).sum(),
            Player::Two => opponent.iter().map(|(x, w)| w * self.utility(x, point)).sum(),
        }
    }

    /// `U(p, q)` without membership checks.
    pub fn expected_utility_unchecked(&self, p: &FiniteMixedStrategy, q: &FiniteMixedStrategy) -> f64 {
        p.iter().map(|(x, wx)| wx * self.payoff_against(Player::One, x, q)).sum()
    }
}

/// Exact expected utility `U(p, q) = sum_x sum_y p(x) q(y) u(x, y)`.
pub fn expected_utility(p: &FiniteMixedStrategy, q: &FiniteMixedStrategy, game: &GameDefinition) -> Result<f64> {
    game.check_strategy(Player::One, p)?;
    game.check_strategy(Player::Two, q)?;
    Ok(game.expected_utility_unchecked(p, q))
}

/// A finitely supported mixed strategy. Atoms are pairwise distinct under
/// [`MERGE_TOL`] and the weights are a probability vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMixture")]
pub struct FiniteMixedStrategy {
    atoms: Vec<StrategyPoint>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMixture {
    atoms: Vec<StrategyPoint>,
    weights: Vec<f64>,
}

impl TryFrom<RawMixture> for FiniteMixedStrategy {
    type Error = Error;

    fn try_from(raw: RawMixture) -> Result<Self> {
        merge_duplicates(raw.atoms, raw.weights)
    }
}

impl FiniteMixedStrategy {
    /// The Dirac measure at `point`.
    pub fn pure(point: StrategyPoint) -> Self {
        FiniteMixedStrategy {
            atoms: vec![point],
            weights: vec![1.0],
        }
    }

    pub fn uniform(atoms: Vec<StrategyPoint>) -> Result<Self> {
        let weights = vec![1.0; atoms.len()];
        merge_duplicates(atoms, weights)
    }

    pub fn atoms(&self) -> &[StrategyPoint] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StrategyPoint, f64)> + '_ {
        self.atoms.iter().zip(self.weights.iter().copied())
    }

    /// Probability of the atom equal to `point`, or 0.
    pub fn weight_of(&self, point: &StrategyPoint) -> f64 {
        self.iter().find(|(a, _)| a.same_as(point)).map_or(0.0, |(_, w)| w)
    }

    /// Total mass of atoms within `radius` (max-norm) of `center`.
    pub fn mass_near(&self, center: &StrategyPoint, radius: f64) -> f64 {
        self.iter()
            .filter(|(a, _)| a.max_dist(center) <= radius)
            .map(|(_, w)| w)
            .sum()
    }
}

/// Builds a mixture from raw atoms and nonnegative weights, combining atoms
/// that coincide within [`MERGE_TOL`], dropping zero-weight atoms and
/// renormalizing.
pub fn merge_duplicates(atoms: Vec<StrategyPoint>, weights: Vec<f64>) -> Result<FiniteMixedStrategy> {
    if atoms.is_empty() {
        return Err(Error::InvalidStrategy("empty atom list".into()));
    }
    if atoms.len() != weights.len() {
        return Err(Error::InvalidStrategy(format!(
            "{} atoms but {} weights",
            atoms.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidStrategy(format!("weight {w} is negative or not finite")));
    }
    if let Some(a) = atoms.iter().find(|a| !a.is_finite()) {
        return Err(Error::InvalidStrategy(format!("atom {a} has non-finite coordinates")));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidStrategy("all weights are zero".into()));
    }

    let mut merged: Vec<StrategyPoint> = Vec::with_capacity(atoms.len());
    let mut merged_w: Vec<f64> = Vec::with_capacity(atoms.len());
    for (atom, w) in atoms.into_iter().zip(weights) {
        match merged.iter().position(|m| m.same_as(&atom)) {
            Some(k) => merged_w[k] += w,
            None => {
                merged.push(atom);
                merged_w.push(w);
            }
        }
    }

    let mut out_atoms = Vec::with_capacity(merged.len());
    let mut out_w = Vec::with_capacity(merged.len());
    for (atom, w) in merged.into_iter().zip(merged_w) {
        if w > 0.0 {
            out_atoms.push(atom);
            out_w.push(w / total);
        }
    }
    // Put the rounding residue on the last atom: with w_last = 1 - (sum of the
    // others), the sequential sum rounds to exactly 1. A last atom too light
    // to absorb it hands the residue to the heaviest one instead.
    let k = out_w.len();
    let rest: f64 = out_w[..k - 1].iter().sum();
    let last = 1.0 - rest;
    if last >= 0.0 && (last - out_w[k - 1]).abs() <= 1e-12 {
        out_w[k - 1] = last;
    } else {
        let heaviest = out_w
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let residue = 1.0 - out_w.iter().sum::<f64>();
        out_w[heaviest] = (out_w[heaviest] + residue).max(0.0);
    }

    Ok(FiniteMixedStrategy {
        atoms: out_atoms,
        weights: out_w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn product_game() -> GameDefinition {
        GameDefinition::new(
            "xy",
            StrategySpace::interval(0.0, 1.0),
            StrategySpace::interval(0.0, 1.0),
            |x, y| x[0] * y[0],
        )
    }

    fn g1() -> GameDefinition {
        GameDefinition::new(
            "g1",
            StrategySpace::interval(-1.0, 1.0),
            StrategySpace::interval(-1.0, 1.0),
            |x, y| {
                let (x, y) = (x[0], y[0]);
                5.0 * x * y - 2.0 * x * x - 2.0 * x * y * y - y
            },
        )
    }

    #[test]
    fn g1_equilibrium_value() {
        let p = FiniteMixedStrategy::pure(0.2.into());
        let q = merge_duplicates(vec![1.0.into(), (-1.0).into()], vec![0.78, 0.22]).unwrap();
        let v = expected_utility(&p, &q, &g1()).unwrap();
        assert!((v + 0.48).abs() < 1e-12, "{v}");
    }

    #[test]
    fn pure_pure_is_direct_evaluation() {
        let game = g1();
        let (x, y) = (StrategyPoint::scalar(0.3), StrategyPoint::scalar(-0.7));
        let v = expected_utility(
            &FiniteMixedStrategy::pure(x.clone()),
            &FiniteMixedStrategy::pure(y.clone()),
            &game,
        )
        .unwrap();
        assert_eq!(v, game.utility(&x, &y));
    }

    #[test]
    fn uniform_product() {
        let p = FiniteMixedStrategy::uniform(vec![0.0.into(), 1.0.into()]).unwrap();
        let v = expected_utility(&p, &p, &product_game()).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn out_of_space_atom_is_named() {
        let p = FiniteMixedStrategy::pure(1.5.into());
        let q = FiniteMixedStrategy::pure(0.5.into());
        let err = expected_utility(&p, &q, &product_game()).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
        assert!(err.to_string().contains("1.5"), "{err}");
    }

    #[test]
    fn merge_exact_duplicate() {
        let m = merge_duplicates(vec![0.5.into(), 0.5.into()], vec![0.3, 0.7]).unwrap();
        assert_eq!(m.atoms(), &[StrategyPoint::scalar(0.5)]);
        assert_eq!(m.weights(), &[1.0]);
    }

    #[test]
    fn merge_keeps_distinct_atoms() {
        let m = merge_duplicates(vec![0.0.into(), 1.0.into()], vec![0.2, 0.8]).unwrap();
        assert_eq!(m.len(), 2);
        assert!((m.weights()[0] - 0.2).abs() < 1e-15);
        assert!((m.weights()[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn merge_within_tolerance() {
        let m = merge_duplicates(vec![0.0.into(), 1e-12.into()], vec![0.5, 0.5]).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.weights(), &[1.0]);
    }

    #[test]
    fn merge_rejects_bad_input() {
        assert!(matches!(merge_duplicates(vec![], vec![]), Err(Error::InvalidStrategy(_))));
        assert!(matches!(
            merge_duplicates(vec![0.0.into(), 1.0.into()], vec![0.0, 0.0]),
            Err(Error::InvalidStrategy(_))
        ));
        assert!(matches!(
            merge_duplicates(vec![0.0.into()], vec![-1.0]),
            Err(Error::InvalidStrategy(_))
        ));
    }

    #[test]
    fn simplex_membership() {
        let s = StrategySpace::Simplex { dim: 3 };
        assert!(s.contains(&vec![0.5, 0.25, 0.25].into()));
        assert!(!s.contains(&vec![0.5, 0.6, -0.1].into()));
        assert!(!s.contains(&vec![0.5, 0.25].into()));
        assert!(!s.contains(&vec![0.5, 0.25, 0.2].into()));
    }

    #[test]
    fn union_membership() {
        let s = StrategySpace::Union(vec![StrategySpace::interval(0.0, 1.0), StrategySpace::interval(2.0, 3.0)]);
        assert!(s.contains(&0.5.into()));
        assert!(s.contains(&2.5.into()));
        assert!(!s.contains(&1.5.into()));
    }

    #[test]
    fn deserialization_merges_and_validates() {
        let json = r#"{"atoms":[[0.0],[0.0],[1.0]],"weights":[1.0,1.0,2.0]}"#;
        let m: FiniteMixedStrategy = serde_json::from_str(json).unwrap();
        assert_eq!(m.len(), 2);
        assert!((m.weights()[0] - 0.5).abs() < 1e-15);
        let bad = r#"{"atoms":[],"weights":[]}"#;
        assert!(serde_json::from_str::<FiniteMixedStrategy>(bad).is_err());
    }
}
