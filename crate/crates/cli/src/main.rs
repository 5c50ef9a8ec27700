mod config;
mod experiment;
mod output;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dogame::Termination;

use config::{read_config_file, Algorithm, ExperimentConfig};
use experiment::TraceRow;
use output::{compare_rows, ResultFile, TraceWriter, COMPARE_HEADER};

#[derive(Parser)]
#[command(name = "dogame", version, about = "Double oracle experiments on continuous zero-sum games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write trace.csv and result.json.
    #[command(allow_negative_numbers = true)]
    Run(RunArgs),
    /// Run double oracle and fictitious play on the same game and write compare.csv.
    #[command(allow_negative_numbers = true)]
    Compare(CompareArgs),
}

/// Settings shared by both subcommands. Flags override config file values.
#[derive(Args, Clone, Default)]
struct Settings {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// g1 (g1-polynomial), g2 (g2-townsend), blotto or matrix.
    #[arg(long)]
    game: Option<String>,
    /// double-oracle or fictitious-play.
    #[arg(long = "algo")]
    algorithm: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    max_iters: Option<String>,
    /// Seed for random initial strategies.
    #[arg(long)]
    seed: Option<String>,
    /// Grid spacing of the 1-D oracles.
    #[arg(long)]
    resolution: Option<String>,
    /// Lipschitz bound used for the declared 1-D oracle accuracy.
    #[arg(long)]
    lipschitz: Option<String>,
    /// Blotto oracle: milp or enumeration.
    #[arg(long)]
    oracle: Option<String>,
    /// Number of battlefields.
    #[arg(long)]
    n: Option<String>,
    /// Comma-separated battlefield weights.
    #[arg(long)]
    a: Option<String>,
    /// Contest sharpness in (0, 1].
    #[arg(long)]
    c: Option<String>,
    /// corners, grid or random.
    #[arg(long)]
    init: Option<String>,
    /// Payoff matrix file for the matrix game.
    #[arg(long)]
    matrix: Option<String>,
    #[arg(long, env = "DOGAME_OUT_DIR")]
    out_dir: Option<String>,
    /// Record per-iteration wall time (makes the trace nondeterministic).
    #[arg(long)]
    timing: bool,
}

impl Settings {
    fn overrides(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let fields = [
            ("game", &self.game),
            ("algorithm", &self.algorithm),
            ("epsilon", &self.epsilon),
            ("max_iters", &self.max_iters),
            ("seed", &self.seed),
            ("resolution", &self.resolution),
            ("lipschitz", &self.lipschitz),
            ("oracle", &self.oracle),
            ("n", &self.n),
            ("a", &self.a),
            ("c", &self.c),
            ("init", &self.init),
            ("matrix", &self.matrix),
            ("out_dir", &self.out_dir),
        ];
        for (k, v) in fields {
            if let Some(v) = v {
                m.insert(k.to_string(), v.clone());
            }
        }
        if self.timing {
            m.insert("timing".into(), "true".into());
        }
        m
    }

    fn load(&self, file: Option<&Path>) -> Result<BTreeMap<String, String>> {
        let mut m = match file {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        m.extend(self.overrides());
        Ok(m)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    settings: Settings,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    settings: Settings,
    /// Config file for the second run; defaults to --config.
    #[arg(long)]
    config_b: Option<PathBuf>,
    /// The two algorithms, comma-separated.
    #[arg(long)]
    algos: Option<String>,
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("out_dir: cannot create {}", dir.display()))
}

fn run_command(args: &RunArgs) -> Result<Termination> {
    let map = args.settings.load(args.settings.config.as_deref())?;
    let cfg = ExperimentConfig::from_map(&map)?;
    let setup = experiment::build(&cfg)?;
    prepare_out_dir(&cfg.out_dir)?;
    let trace_path = cfg.out_dir.join("trace.csv");
    let mut writer = TraceWriter::create(&trace_path, cfg.timing)
        .with_context(|| format!("out_dir: cannot write {}", trace_path.display()))?;
    let outcome = experiment::run(&cfg, &setup, |row| writer.push(row));
    // The rows written so far stay on disk even when the run failed.
    let flushed = writer.finish();
    let outcome = outcome?;
    flushed.with_context(|| format!("out_dir: cannot write {}", trace_path.display()))?;

    let result_path = cfg.out_dir.join("result.json");
    ResultFile::new(cfg.echo(), cfg.seed, &outcome)
        .write(&result_path)
        .with_context(|| format!("out_dir: cannot write {}", result_path.display()))?;
    println!(
        "{} on {}: {} after {} iterations, value {}, gap {}",
        cfg.algorithm,
        cfg.game,
        match outcome.terminated_by {
            Termination::Gap => "gap",
            Termination::IterationCap => "iteration cap",
        },
        outcome.iterations,
        outcome.value,
        outcome.gap
    );
    Ok(outcome.terminated_by)
}

fn compare_command(args: &CompareArgs) -> Result<()> {
    let file_a = args.settings.config.as_deref();
    let file_b = args.config_b.as_deref().or(file_a);
    let mut map_a = args.settings.load(file_a)?;
    let mut map_b = args.settings.load(file_b)?;
    let both_files = args.config_b.is_some() && file_a.is_some();
    match &args.algos {
        Some(list) => {
            let names: Vec<&str> = list.split(',').map(str::trim).collect();
            if names.len() != 2 {
                bail!("algos: expected two comma-separated algorithms, got `{list}`");
            }
            map_a.insert("algorithm".into(), names[0].into());
            map_b.insert("algorithm".into(), names[1].into());
        }
        None if both_files || args.settings.algorithm.is_some() => {}
        None => {
            map_a.insert("algorithm".into(), "double-oracle".into());
            map_b.insert("algorithm".into(), "fictitious-play".into());
        }
    }
    let cfg_a = ExperimentConfig::from_map(&map_a)?;
    let cfg_b = ExperimentConfig::from_map(&map_b)?;
    if cfg_a.algorithm == cfg_b.algorithm {
        bail!("algorithm: both runs use {}; compare needs one of each", cfg_a.algorithm);
    }
    if let Some((key, a, b)) = cfg_a.first_mismatch(&cfg_b) {
        bail!("{key}: the compared runs differ ({a} vs {b})");
    }
    let (do_cfg, fp_cfg) = match cfg_a.algorithm {
        Algorithm::DoubleOracle => (cfg_a, cfg_b),
        Algorithm::FictitiousPlay => (cfg_b, cfg_a),
    };

    let mut traces: Vec<Vec<TraceRow>> = Vec::new();
    for cfg in [&do_cfg, &fp_cfg] {
        let setup = experiment::build(cfg)?;
        let mut rows = Vec::new();
        experiment::run(cfg, &setup, |r| rows.push(r.clone()))?;
        traces.push(rows);
    }

    prepare_out_dir(&do_cfg.out_dir)?;
    let path = do_cfg.out_dir.join("compare.csv");
    let mut text = String::from(COMPARE_HEADER);
    text.push('\n');
    for line in compare_rows(&traces[0], &traces[1]) {
        text.push_str(&line);
        text.push('\n');
    }
    fs::write(&path, text).with_context(|| format!("out_dir: cannot write {}", path.display()))?;
    let last_gap = |rows: &[TraceRow]| rows.last().map_or(f64::NAN, TraceRow::gap);
    println!(
        "double-oracle: {} iterations, final gap {}; fictitious-play: {} iterations, final gap {}",
        traces[0].len(),
        last_gap(&traces[0]),
        traces[1].len(),
        last_gap(&traces[1])
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run(args) => run_command(args).map(|t| match t {
            Termination::Gap => 0,
            Termination::IterationCap => 2,
        }),
        Command::Compare(args) => compare_command(args).map(|_| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
