//! Experiment configuration: a flat `key = value` file overlaid with flags.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use dogame::blotto::grid_steps;
use dogame::double_oracle::{DEFAULT_EPSILON, DEFAULT_MAX_ITERS};
use dogame::oracle_1d::DEFAULT_RESOLUTION;

/// Keys accepted in config files, in echo order.
pub const KEYS: [&str; 15] = [
    "game",
    "algorithm",
    "epsilon",
    "max_iters",
    "seed",
    "resolution",
    "lipschitz",
    "oracle",
    "n",
    "a",
    "c",
    "init",
    "matrix",
    "out_dir",
    "timing",
];

/// Keys that only affect where and how results are written.
const OUTPUT_KEYS: [&str; 2] = ["out_dir", "timing"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GameKind {
    Polynomial,
    Townsend,
    Blotto,
    Matrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    DoubleOracle,
    FictitiousPlay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleKind {
    Milp,
    Enumeration,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitKind {
    Corners,
    Grid,
    Random,
}

impl GameKind {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "g1" | "g1-polynomial" | "polynomial" => Some(GameKind::Polynomial),
            "g2" | "g2-townsend" | "townsend" => Some(GameKind::Townsend),
            "blotto" => Some(GameKind::Blotto),
            "matrix" | "custom-finite-matrix" => Some(GameKind::Matrix),
            _ => None,
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GameKind::Polynomial => "g1-polynomial",
            GameKind::Townsend => "g2-townsend",
            GameKind::Blotto => "blotto",
            GameKind::Matrix => "custom-finite-matrix",
        })
    }
}

impl Algorithm {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "double-oracle" | "do" => Some(Algorithm::DoubleOracle),
            "fictitious-play" | "fp" => Some(Algorithm::FictitiousPlay),
            _ => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::DoubleOracle => "double-oracle",
            Algorithm::FictitiousPlay => "fictitious-play",
        })
    }
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleKind::Milp => "milp",
            OracleKind::Enumeration => "enumeration",
        })
    }
}

impl fmt::Display for InitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitKind::Corners => "corners",
            InitKind::Grid => "grid",
            InitKind::Random => "random",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub game: GameKind,
    pub algorithm: Algorithm,
    pub epsilon: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub resolution: f64,
    pub lipschitz: Option<f64>,
    pub oracle: OracleKind,
    pub n: usize,
    pub a: Vec<f64>,
    pub c: f64,
    pub init: InitKind,
    pub matrix: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub timing: bool,
}

/// Normalizes `max-iters` and `max_iters` to one spelling.
pub fn canonical_key(key: &str) -> String {
    key.trim().replace('-', "_")
}

/// Reads a flat config file. Blank lines and `#` comments are skipped.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).with_context(|| format!("config: cannot read {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config: {}:{}: expected `key = value`", path.display(), lineno + 1))?;
        let key = canonical_key(key);
        if !KEYS.contains(&key.as_str()) {
            bail!("config: {}:{}: unknown key `{key}`", path.display(), lineno + 1);
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn parse_num<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<T>()
            .map(Some)
            .map_err(|_| anyhow!("{key}: cannot parse `{v}` as a number")),
    }
}

fn parse_bool(map: &BTreeMap<String, String>, key: &str) -> Result<Option<bool>> {
    match map.get(key).map(String::as_str) {
        None => Ok(None),
        Some("true" | "yes" | "1" | "on") => Ok(Some(true)),
        Some("false" | "no" | "0" | "off") => Ok(Some(false)),
        Some(v) => bail!("{key}: expected true or false, got `{v}`"),
    }
}

impl ExperimentConfig {
    /// Builds and validates a config from merged key-value settings. Every
    /// error names the offending key.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let game = match map.get("game") {
            None => GameKind::Polynomial,
            Some(g) => GameKind::parse(g).ok_or_else(|| {
                anyhow!("game: unknown game `{g}` (expected g1, g1-polynomial, g2, g2-townsend, blotto or matrix)")
            })?,
        };
        let algorithm = match map.get("algorithm") {
            None => Algorithm::DoubleOracle,
            Some(a) => Algorithm::parse(a)
                .ok_or_else(|| anyhow!("algorithm: unknown algorithm `{a}` (expected double-oracle or fictitious-play)"))?,
        };
        let epsilon = parse_num::<f64>(map, "epsilon")?.unwrap_or(DEFAULT_EPSILON);
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            bail!("epsilon: must be a finite number >= 0, got {epsilon}");
        }
        let max_iters = parse_num::<usize>(map, "max_iters")?.unwrap_or(DEFAULT_MAX_ITERS);
        if max_iters == 0 {
            bail!("max_iters: must be at least 1");
        }
        let seed = parse_num::<u64>(map, "seed")?.unwrap_or(0);
        let resolution = parse_num::<f64>(map, "resolution")?.unwrap_or(DEFAULT_RESOLUTION);
        if !(resolution > 0.0) || !resolution.is_finite() {
            bail!("resolution: must be positive, got {resolution}");
        }
        let lipschitz = parse_num::<f64>(map, "lipschitz")?;
        if let Some(l) = lipschitz {
            if !(l >= 0.0) || !l.is_finite() {
                bail!("lipschitz: must be a finite number >= 0, got {l}");
            }
        }
        let oracle = match map.get("oracle").map(String::as_str) {
            None | Some("milp") => OracleKind::Milp,
            Some("enumeration") => OracleKind::Enumeration,
            Some(o) => bail!("oracle: unknown oracle `{o}` (expected milp or enumeration)"),
        };
        let n = parse_num::<usize>(map, "n")?.unwrap_or(3);
        let a = match map.get("a") {
            None => vec![1.0; n],
            Some(list) => list
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| anyhow!("a: cannot parse `{}` as a number", v.trim())))
                .collect::<Result<Vec<_>>>()?,
        };
        let c = parse_num::<f64>(map, "c")?.unwrap_or(1.0 / 16.0);
        let init = match map.get("init").map(String::as_str) {
            None => match game {
                GameKind::Blotto => InitKind::Corners,
                _ => InitKind::Random,
            },
            Some("corners") => InitKind::Corners,
            Some("grid") => InitKind::Grid,
            Some("random") => InitKind::Random,
            Some(i) => bail!("init: unknown initialization `{i}` (expected corners, grid or random)"),
        };
        let matrix = map.get("matrix").map(PathBuf::from);
        let out_dir = PathBuf::from(map.get("out_dir").map_or("out", String::as_str));
        let timing = parse_bool(map, "timing")?.unwrap_or(false);

        let cfg = ExperimentConfig {
            game,
            algorithm,
            epsilon,
            max_iters,
            seed,
            resolution,
            lipschitz,
            oracle,
            n,
            a,
            c,
            init,
            matrix,
            out_dir,
            timing,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        match self.game {
            GameKind::Blotto => {
                if self.n < 2 {
                    bail!("n: blotto needs at least 2 battlefields, got {}", self.n);
                }
                if self.a.len() != self.n {
                    bail!("a: expected {} weights, got {}", self.n, self.a.len());
                }
                if let Some(w) = self.a.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
                    bail!("a: weights must be positive, got {w}");
                }
                if !(self.c > 0.0 && self.c <= 1.0) {
                    bail!("c: must lie in (0, 1], got {}", self.c);
                }
                let needs_grid = self.init == InitKind::Grid || self.oracle == OracleKind::Enumeration;
                if needs_grid && grid_steps(self.c).is_err() {
                    let why = if self.init == InitKind::Grid { "init = grid" } else { "oracle = enumeration" };
                    bail!("c: 1/c = {} is not an integer, which {why} requires", 1.0 / self.c);
                }
            }
            GameKind::Matrix => {
                if self.matrix.is_none() {
                    bail!("matrix: the matrix game needs a payoff file");
                }
            }
            GameKind::Polynomial | GameKind::Townsend => {
                if self.init == InitKind::Grid {
                    bail!("init: grid initialization is only available for blotto and matrix games");
                }
            }
        }
        if self.algorithm == Algorithm::FictitiousPlay && self.init == InitKind::Grid {
            bail!("init: fictitious play starts from a single point; use corners or random");
        }
        Ok(())
    }

    /// Canonical values of every key, for the result file and comparisons.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("game".into(), self.game.to_string());
        m.insert("algorithm".into(), self.algorithm.to_string());
        m.insert("epsilon".into(), self.epsilon.to_string());
        m.insert("max_iters".into(), self.max_iters.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m.insert("init".into(), self.init.to_string());
        m.insert("out_dir".into(), self.out_dir.display().to_string());
        m.insert("timing".into(), self.timing.to_string());
        match self.game {
            GameKind::Polynomial | GameKind::Townsend => {
                m.insert("resolution".into(), self.resolution.to_string());
                if let Some(l) = self.lipschitz {
                    m.insert("lipschitz".into(), l.to_string());
                }
            }
            GameKind::Blotto => {
                m.insert("oracle".into(), self.oracle.to_string());
                m.insert("n".into(), self.n.to_string());
                let a: Vec<String> = self.a.iter().map(f64::to_string).collect();
                m.insert("a".into(), a.join(","));
                m.insert("c".into(), self.c.to_string());
            }
            GameKind::Matrix => {
                if let Some(p) = &self.matrix {
                    m.insert("matrix".into(), p.display().to_string());
                }
            }
        }
        m
    }

    /// First setting, other than the algorithm and output options, on which
    /// two configs disagree.
    pub fn first_mismatch(&self, other: &ExperimentConfig) -> Option<(String, String, String)> {
        let (a, b) = (self.echo(), other.echo());
        KEYS.iter()
            .filter(|k| **k != "algorithm" && !OUTPUT_KEYS.contains(k))
            .find_map(|k| {
                let (x, y) = (a.get(*k), b.get(*k));
                (x != y).then(|| {
                    let show = |v: Option<&String>| v.cloned().unwrap_or_else(|| "(unset)".into());
                    (k.to_string(), show(x), show(y))
                })
            })
    }
}
