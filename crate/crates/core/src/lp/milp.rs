use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{solve_lp, LinearProgram, LpSolution, LpStatus, INT_TOL};
use crate::error::{Error, Result};

/// A linear program with a set of `{0, 1}` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct MilpModel {
    pub lp: LinearProgram,
    pub binary_vars: Vec<usize>,
}

impl MilpModel {
    pub fn new(lp: LinearProgram, binary_vars: Vec<usize>) -> Self {
        MilpModel { lp, binary_vars }
    }

    pub fn validate(&self) -> Result<()> {
        self.lp.validate()?;
        for &j in &self.binary_vars {
            if j >= self.lp.num_vars() {
                return Err(Error::Model(format!("binary index {j} out of range")));
            }
            if self.lp.lower[j] != 0.0 || self.lp.upper[j] != 1.0 {
                return Err(Error::Model(format!(
                    "binary variable {j} has relaxation bounds [{}, {}], expected [0, 1]",
                    self.lp.lower[j], self.lp.upper[j]
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MilpOptions {
    pub int_tol: f64,
    /// Absolute optimality gap at which the search stops.
    pub gap_tol: f64,
    pub max_nodes: usize,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions {
            int_tol: INT_TOL,
            gap_tol: 1e-9,
            max_nodes: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MilpSolution {
    pub solution: LpSolution,
    /// LP relaxations solved, including the root.
    pub nodes: usize,
    /// Best upper bound on the optimum when the search ended.
    pub bound: f64,
}

struct Node {
    bound: f64,
    id: usize,
    /// Binary fixings `(var, value)` along the path from the root.
    fixings: Vec<(usize, f64)>,
    solution: LpSolution,
}

// Max-heap on the bound, older nodes first on ties.
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

enum Evaluated {
    Pruned,
    Unbounded(LpSolution),
    Open(Node),
}

/// Most fractional binary, lowest index on ties; `None` if all are integral.
fn branching_var(model: &MilpModel, x: &[f64], int_tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &j in &model.binary_vars {
        let frac = x[j] - x[j].floor();
        let dist = frac.min(1.0 - frac);
        if dist <= int_tol {
            continue;
        }
        match best {
            Some((b, d)) if d > dist || (d == dist && b < j) => {}
            _ => best = Some((j, dist)),
        }
    }
    best.map(|(j, _)| j)
}

/// Best-first branch-and-bound over the binary variables of `model`.
pub fn solve_milp(model: &MilpModel, options: &MilpOptions) -> Result<MilpSolution> {
    model.validate()?;
    let mut lp = model.lp.clone();
    let mut nodes = 0usize;
    let mut next_id = 0usize;
    let mut incumbent: Option<LpSolution> = None;
    let mut heap = BinaryHeap::new();

    let mut evaluate = |fixings: Vec<(usize, f64)>,
                        lp: &mut LinearProgram,
                        nodes: &mut usize,
                        incumbent: &mut Option<LpSolution>|
     -> Result<Evaluated> {
        for &j in &model.binary_vars {
            lp.lower[j] = 0.0;
            lp.upper[j] = 1.0;
        }
        for &(j, v) in &fixings {
            lp.lower[j] = v;
            lp.upper[j] = v;
        }
        let sol = solve_lp(lp)?;
        *nodes += 1;
        match sol.status {
            LpStatus::Infeasible => return Ok(Evaluated::Pruned),
            LpStatus::Unbounded => return Ok(Evaluated::Unbounded(sol)),
            LpStatus::Optimal => {}
        }
        let best = incumbent.as_ref().map_or(f64::NEG_INFINITY, |s| s.objective);
        if sol.objective <= best + options.gap_tol {
            return Ok(Evaluated::Pruned);
        }
        if branching_var(model, &sol.x, options.int_tol).is_none() {
            *incumbent = Some(sol);
            return Ok(Evaluated::Pruned);
        }
        next_id += 1;
        Ok(Evaluated::Open(Node {
            bound: sol.objective,
            id: next_id,
            fixings,
            solution: sol,
        }))
    };

    match evaluate(Vec::new(), &mut lp, &mut nodes, &mut incumbent)? {
        Evaluated::Open(node) => heap.push(node),
        Evaluated::Pruned => {}
        Evaluated::Unbounded(sol) => {
            return Ok(MilpSolution {
                solution: sol,
                nodes,
                bound: f64::INFINITY,
            })
        }
    }

    let mut bound = f64::NEG_INFINITY;
    while let Some(node) = heap.pop() {
        let best = incumbent.as_ref().map_or(f64::NEG_INFINITY, |s| s.objective);
        if node.bound <= best + options.gap_tol {
            bound = node.bound;
            break;
        }
        if nodes >= options.max_nodes {
            return Err(Error::ResourceLimit {
                what: format!("branch-and-bound exceeded {} nodes", options.max_nodes),
                incumbent: incumbent.map(|s| s.objective),
                bound: node.bound,
            });
        }
        let j = branching_var(model, &node.solution.x, options.int_tol)
            .expect("queued nodes have a fractional binary");
        for v in [1.0, 0.0] {
            let mut fixings = node.fixings.clone();
            fixings.push((j, v));
            match evaluate(fixings, &mut lp, &mut nodes, &mut incumbent)? {
                Evaluated::Open(child) => heap.push(child),
                Evaluated::Pruned => {}
                // A restriction of a bounded relaxation stays bounded.
                Evaluated::Unbounded(_) => unreachable!("child relaxation unbounded"),
            }
        }
    }

    match incumbent {
        Some(sol) => Ok(MilpSolution {
            bound: bound.max(sol.objective),
            solution: sol,
            nodes,
        }),
        None => Ok(MilpSolution {
            solution: LpSolution {
                status: LpStatus::Infeasible,
                x: vec![f64::NAN; model.lp.num_vars()],
                objective: f64::NAN,
                pivots: 0,
            },
            nodes,
            bound: f64::NEG_INFINITY,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Sense;

    #[test]
    fn rounds_down_relaxed_bound() {
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![1.0];
        lp.set_bounds(0, 0.0, 1.0);
        lp.add_row(vec![1.0], Sense::Le, 1.5);
        let sol = solve_milp(&MilpModel::new(lp, vec![0]), &MilpOptions::default()).unwrap();
        assert_eq!(sol.solution.status, LpStatus::Optimal);
        assert!((sol.solution.x[0] - 1.0).abs() < 1e-9);
        assert!((sol.solution.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn picks_larger_coefficient() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![2.0, 3.0];
        lp.set_bounds(0, 0.0, 1.0);
        lp.set_bounds(1, 0.0, 1.0);
        lp.add_row(vec![1.0, 1.0], Sense::Le, 1.0);
        let sol = solve_milp(&MilpModel::new(lp, vec![0, 1]), &MilpOptions::default()).unwrap();
        assert!((sol.solution.objective - 3.0).abs() < 1e-9);
        assert!(sol.solution.x[1] > 0.5 && sol.solution.x[0] < 0.5);
    }

    #[test]
    fn fractional_relaxation_needs_branching() {
        // max z1 + z2 s.t. 2 z1 + 2 z2 <= 3: relaxation 1.5, integer optimum 1.
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![1.0, 1.0];
        lp.set_bounds(0, 0.0, 1.0);
        lp.set_bounds(1, 0.0, 1.0);
        lp.add_row(vec![2.0, 2.0], Sense::Le, 3.0);
        let sol = solve_milp(&MilpModel::new(lp, vec![0, 1]), &MilpOptions::default()).unwrap();
        assert!((sol.solution.objective - 1.0).abs() < 1e-9);
        assert!(sol.nodes > 1);
    }

    #[test]
    fn integer_infeasible() {
        // 0.3 <= z <= 0.7 has no binary solution.
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![1.0];
        lp.set_bounds(0, 0.0, 1.0);
        lp.add_row(vec![1.0], Sense::Ge, 0.3);
        lp.add_row(vec![1.0], Sense::Le, 0.7);
        let sol = solve_milp(&MilpModel::new(lp, vec![0]), &MilpOptions::default()).unwrap();
        assert_eq!(sol.solution.status, LpStatus::Infeasible);
    }

    #[test]
    fn node_limit_reports_incumbent() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![1.0, 1.0];
        lp.set_bounds(0, 0.0, 1.0);
        lp.set_bounds(1, 0.0, 1.0);
        lp.add_row(vec![2.0, 2.0], Sense::Le, 3.0);
        let opts = MilpOptions {
            max_nodes: 1,
            ..MilpOptions::default()
        };
        let err = solve_milp(&MilpModel::new(lp, vec![0, 1]), &opts).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { .. }));
    }

    #[test]
    fn binaries_need_unit_bounds() {
        let lp = LinearProgram::new(1);
        assert!(matches!(
            solve_milp(&MilpModel::new(lp, vec![0]), &MilpOptions::default()),
            Err(Error::Model(_))
        ));
    }
}
