use super::{LinearProgram, LpSolution, LpStatus, Sense, COST_TOL, FEAS_TOL};
use crate::error::{Error, Result};

/// Smallest tableau entry accepted as a pivot.
const PIVOT_TOL: f64 = 1e-11;
/// Ratios closer than this count as tied in the ratio test.
const RATIO_TIE: f64 = 1e-12;
/// Consecutive degenerate pivots after which pricing falls back to Bland's rule.
const DEGENERATE_RUN: usize = 50;

/// How an original variable is expressed through the nonnegative columns of
/// the standard-form tableau.
#[derive(Clone, Copy, Debug)]
enum VarMap {
    Fixed(f64),
    /// `x = base + sign * col`.
    Shifted { col: usize, base: f64, sign: f64 },
    /// `x = pos - neg`.
    Free { pos: usize, neg: usize },
}

impl VarMap {
    fn value(&self, cols: &[f64]) -> f64 {
        match *self {
            VarMap::Fixed(v) => v,
            VarMap::Shifted { col, base, sign } => base + sign * cols[col],
            VarMap::Free { pos, neg } => cols[pos] - cols[neg],
        }
    }
}

struct Tableau {
    /// Row-major `rows x (cols + 1)`; the last entry of each row is the rhs.
    data: Vec<f64>,
    rows: usize,
    cols: usize,
    basis: Vec<usize>,
    /// Reduced costs of the current phase objective.
    cost: Vec<f64>,
    value: f64,
    pivots: usize,
}

impl Tableau {
    #[inline]
    fn width(&self) -> usize {
        self.cols + 1
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width() + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.data[i * self.width() + self.cols]
    }

    fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.data[i * w..(i + 1) * w]
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let w = self.width();
        let inv = 1.0 / self.at(r, e);
        let prow: Vec<f64> = self.row(r).iter().map(|v| v * inv).collect();
        let nz: Vec<usize> = (0..w).filter(|&j| prow[j] != 0.0).collect();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.data[i * w + e];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.data[i * w..(i + 1) * w];
            for &j in &nz {
                row[j] -= f * prow[j];
            }
            row[e] = 0.0;
        }
        let d = self.cost[e];
        if d != 0.0 {
            for &j in &nz {
                if j < self.cols {
                    self.cost[j] -= d * prow[j];
                }
            }
            self.cost[e] = 0.0;
            self.value += d * prow[self.cols];
        }
        self.data[r * w..(r + 1) * w].copy_from_slice(&prow);
        self.data[r * w + e] = 1.0;
        self.basis[r] = e;
        self.pivots += 1;
    }

    /// Recomputes reduced costs for the objective `c` given the current basis.
    fn price(&mut self, c: &[f64]) {
        let mut cost = c.to_vec();
        let mut value = 0.0;
        for i in 0..self.rows {
            let cb = c[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = self.row(i);
            for (j, cj) in cost.iter_mut().enumerate() {
                *cj -= cb * row[j];
            }
            value += cb * row[self.cols];
        }
        for &b in &self.basis {
            cost[b] = 0.0;
        }
        self.cost = cost;
        self.value = value;
    }

    /// Entering column: the largest reduced cost (Dantzig), or the lowest
    /// improving index under Bland's rule.
    fn entering(&self, allowed: usize, bland: bool) -> Option<usize> {
        if bland {
            return (0..allowed).find(|&j| self.cost[j] > COST_TOL);
        }
        let mut best: Option<(usize, f64)> = None;
        for (j, &d) in self.cost[..allowed].iter().enumerate() {
            if d > COST_TOL && best.is_none_or(|(_, b)| d > b) {
                best = Some((j, d));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Pivots over the columns `0..allowed` until optimal or unbounded.
    /// Returns false when unbounded.
    ///
    /// Uses Dantzig pricing, switching to Bland's rule after a run of
    /// degenerate pivots so that cycling is impossible.
    fn optimize(&mut self, allowed: usize, pivot_cap: usize) -> Result<bool> {
        let mut degenerate_run = 0usize;
        loop {
            let bland = degenerate_run >= DEGENERATE_RUN;
            let Some(e) = self.entering(allowed, bland) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, e);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        if ratio < best - RATIO_TIE || (ratio <= best + RATIO_TIE && self.basis[i] < self.basis[r]) {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
            let Some((r, ratio)) = leave else {
                return Ok(false);
            };
            if ratio <= RATIO_TIE {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, e);
            if self.pivots > pivot_cap {
                return Err(Error::ResourceLimit {
                    what: format!("simplex exceeded {pivot_cap} pivots"),
                    incumbent: None,
                    bound: f64::NAN,
                });
            }
        }
    }

    fn remove_row(&mut self, r: usize) {
        let w = self.width();
        self.data.drain(r * w..(r + 1) * w);
        self.basis.remove(r);
        self.rows -= 1;
    }
}

/// Solves a linear program (maximization) with the two-phase simplex method.
///
/// Variable bounds are folded into the tableau: finite lower bounds by
/// shifting, finite upper bounds as extra rows, free variables by splitting
/// and fixed variables by substitution. Artificial variables carry `>=` and
/// `=` rows through phase one.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars();

    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        let map = if lo == hi {
            VarMap::Fixed(lo)
        } else if lo.is_finite() {
            if hi.is_finite() {
                bound_rows.push((ncols, hi - lo));
            }
            ncols += 1;
            VarMap::Shifted { col: ncols - 1, base: lo, sign: 1.0 }
        } else if hi.is_finite() {
            ncols += 1;
            VarMap::Shifted { col: ncols - 1, base: hi, sign: -1.0 }
        } else {
            ncols += 2;
            VarMap::Free { pos: ncols - 2, neg: ncols - 1 }
        };
        maps.push(map);
    }
    let nstruct = ncols;

    // Structural rows over the tableau columns.
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::with_capacity(lp.num_rows() + bound_rows.len());
    for ((coeffs, &sense), &b) in lp.rows.iter().zip(&lp.senses).zip(&lp.rhs) {
        let mut row = vec![0.0; nstruct];
        let mut rhs = b;
        for (a, map) in coeffs.iter().zip(&maps) {
            if *a == 0.0 {
                continue;
            }
            match *map {
                VarMap::Fixed(v) => rhs -= a * v,
                VarMap::Shifted { col, base, sign } => {
                    rhs -= a * base;
                    row[col] += a * sign;
                }
                VarMap::Free { pos, neg } => {
                    row[pos] += a;
                    row[neg] -= a;
                }
            }
        }
        rows.push((row, sense, rhs));
    }
    for &(col, range) in &bound_rows {
        let mut row = vec![0.0; nstruct];
        row[col] = 1.0;
        rows.push((row, Sense::Le, range));
    }
    for (row, sense, rhs) in rows.iter_mut() {
        if *rhs < 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
            *rhs = -*rhs;
            *sense = match sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }

    let mut obj = vec![0.0; nstruct];
    for (c, map) in lp.objective.iter().zip(&maps) {
        match *map {
            VarMap::Fixed(_) => {}
            VarMap::Shifted { col, sign, .. } => obj[col] += c * sign,
            VarMap::Free { pos, neg } => {
                obj[pos] += c;
                obj[neg] -= c;
            }
        }
    }

    let m = rows.len();
    let nslack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let nart = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let art_start = nstruct + nslack;
    let cols = art_start + nart;
    let width = cols + 1;

    let mut data = vec![0.0; m * width];
    let mut basis = vec![0usize; m];
    let (mut next_slack, mut next_art) = (nstruct, art_start);
    for (i, (row, sense, rhs)) in rows.iter().enumerate() {
        let line = &mut data[i * width..(i + 1) * width];
        line[..nstruct].copy_from_slice(row);
        line[cols] = *rhs;
        match sense {
            Sense::Le => {
                line[next_slack] = 1.0;
                basis[i] = next_slack;
                next_slack += 1;
            }
            Sense::Ge => {
                line[next_slack] = -1.0;
                next_slack += 1;
                line[next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
            Sense::Eq => {
                line[next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
        }
    }

    let mut tab = Tableau {
        data,
        rows: m,
        cols,
        basis,
        cost: vec![0.0; cols],
        value: 0.0,
        pivots: 0,
    };
    let pivot_cap = 50_000 + 50 * (m + cols);

    if nart > 0 {
        let mut phase1 = vec![0.0; cols];
        phase1[art_start..].iter_mut().for_each(|c| *c = -1.0);
        tab.price(&phase1);
        tab.optimize(cols, pivot_cap)?;
        if tab.value < -FEAS_TOL {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: vec![f64::NAN; n],
                objective: f64::NAN,
                pivots: tab.pivots,
            });
        }
        // Drive remaining (zero-valued) artificials out of the basis.
        let mut r = 0;
        while r < tab.rows {
            if tab.basis[r] >= art_start {
                let entering = (0..art_start)
                    .filter(|&j| tab.at(r, j).abs() > 1e-9)
                    .max_by(|&a, &b| tab.at(r, a).abs().total_cmp(&tab.at(r, b).abs()));
                match entering {
                    Some(j) => tab.pivot(r, j),
                    None => {
                        tab.remove_row(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    let mut phase2 = vec![0.0; cols];
    phase2[..nstruct].copy_from_slice(&obj);
    tab.price(&phase2);
    let bounded = tab.optimize(art_start, pivot_cap)?;
    if !bounded {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            x: vec![f64::NAN; n],
            objective: f64::INFINITY,
            pivots: tab.pivots,
        });
    }

    let mut colvals = vec![0.0; cols];
    for i in 0..tab.rows {
        colvals[tab.basis[i]] = tab.rhs(i).max(0.0);
    }
    let x: Vec<f64> = maps.iter().map(|m| m.value(&colvals)).collect();
    let objective = lp.evaluate(&x);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
        pivots: tab.pivots,
    })
}
