//! Trace CSV and result JSON files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use dogame::{FiniteMixedStrategy, Termination};
use serde::{Deserialize, Serialize};

use crate::experiment::{Outcome, TraceRow};

pub const TRACE_HEADER: &str = "iter,lower,upper,gap,subgame_value,size_x,size_y,time_s";
pub const COMPARE_HEADER: &str = "iter,do_lower,do_upper,fp_lower,fp_upper";

/// Twelve significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.11e}")
}

/// Writes trace rows as they arrive, flushing each one so that a failed
/// run leaves every completed iteration on disk.
pub struct TraceWriter {
    out: BufWriter<File>,
    timing: bool,
    error: Option<io::Error>,
}

impl TraceWriter {
    pub fn create(path: &Path, timing: bool) -> io::Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{TRACE_HEADER}")?;
        out.flush()?;
        Ok(TraceWriter {
            out,
            timing,
            error: None,
        })
    }

    pub fn push(&mut self, row: &TraceRow) {
        if self.error.is_some() {
            return;
        }
        let time = if self.timing { row.time_s } else { 0.0 };
        let line = format!(
            "{},{},{},{},{},{},{},{}",
            row.iter,
            fmt_num(row.lower),
            fmt_num(row.upper),
            fmt_num(row.gap()),
            fmt_num(row.subgame_value),
            row.size_x,
            row.size_y,
            fmt_num(time)
        );
        if let Err(e) = writeln!(self.out, "{line}").and_then(|_| self.out.flush()) {
            self.error = Some(e);
        }
    }

    pub fn finish(mut self) -> io::Result<()> {
        match self.error.take() {
            Some(e) => Err(e),
            None => self.out.flush(),
        }
    }
}

#[derive(Serialize, Deserialize)]
pub struct ResultFile {
    pub game: String,
    pub algorithm: String,
    pub seed: u64,
    pub terminated_by: Termination,
    pub iterations: usize,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub p: FiniteMixedStrategy,
    pub q: FiniteMixedStrategy,
    pub config: BTreeMap<String, String>,
}

impl ResultFile {
    pub fn new(config: BTreeMap<String, String>, seed: u64, outcome: &Outcome) -> Self {
        ResultFile {
            game: config["game"].clone(),
            algorithm: config["algorithm"].clone(),
            seed,
            terminated_by: outcome.terminated_by,
            iterations: outcome.iterations,
            value: outcome.value,
            lower: outcome.lower,
            upper: outcome.upper,
            gap: outcome.gap,
            p: outcome.p.clone(),
            q: outcome.q.clone(),
            config,
        }
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        out.flush()
    }
}

/// Side-by-side bounds of a double oracle and a fictitious play run. The
/// shorter trace is padded with its last row.
pub fn compare_rows(do_rows: &[TraceRow], fp_rows: &[TraceRow]) -> Vec<String> {
    let len = do_rows.len().max(fp_rows.len());
    let at = |rows: &[TraceRow], i: usize| rows.get(i).or(rows.last()).map(|r| (r.lower, r.upper));
    (0..len)
        .map(|i| {
            let (dl, du) = at(do_rows, i).unwrap_or((f64::NAN, f64::NAN));
            let (fl, fu) = at(fp_rows, i).unwrap_or((f64::NAN, f64::NAN));
            format!("{},{},{},{},{}", i + 1, fmt_num(dl), fmt_num(du), fmt_num(fl), fmt_num(fu))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(iter: usize, lower: f64, upper: f64) -> TraceRow {
        TraceRow {
            iter,
            lower,
            upper,
            subgame_value: 0.0,
            size_x: 1,
            size_y: 1,
            time_s: 0.5,
        }
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(-0.48), "-4.80000000000e-1");
        assert_eq!(fmt_num(0.0), "0.00000000000e0");
        let back: f64 = fmt_num(std::f64::consts::PI).parse().unwrap();
        assert!((back - std::f64::consts::PI).abs() < 1e-11);
    }

    #[test]
    fn shorter_run_is_padded() {
        let d = [row(1, -1.0, 0.0), row(2, -0.5, -0.4)];
        let f = [row(1, -2.0, 1.0), row(2, -1.5, 0.5), row(3, -1.0, 0.2)];
        let lines = compare_rows(&d, &f);
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("3,-5.00000000000e-1,-4.00000000000e-1,-1.00000000000e0,"));
    }

    #[test]
    fn timing_off_writes_zero() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut w = TraceWriter::create(&path, false).unwrap();
        w.push(&row(1, -1.0, 0.5));
        w.finish().unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], TRACE_HEADER);
        assert_eq!(
            lines[1],
            "1,-1.00000000000e0,5.00000000000e-1,1.50000000000e0,0.00000000000e0,1,1,0.00000000000e0"
        );
    }
}
