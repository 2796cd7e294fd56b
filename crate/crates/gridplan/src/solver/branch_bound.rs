//! Deterministic branch-and-bound MILP engine over simplex LP relaxations.
//!
//! Depth-first search, always branching the most fractional integer column
//! (lowest index on ties) and exploring the floor side first. Small models
//! only; the planning fixtures this crate targets have a handful of
//! binaries, so plain DFS with bound pruning is exact and fast.

use super::{RawSolution, SolveConfig, SolveStatus};
use crate::error::{Error, Result};
use crate::milp::{ParsedMps, Sense};
use microlp::{ComparisonOp, OptimizationDirection, Problem};

const INT_TOL: f64 = 1e-9;

struct Node {
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Relaxation objective of the parent; a lower bound for this node.
    bound: f64,
}

fn solve_relaxation(
    parsed: &ParsedMps,
    obj: &[f64],
    lower: &[f64],
    upper: &[f64],
) -> Result<Option<(f64, Vec<f64>)>> {
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<microlp::Variable> = (0..parsed.vars.len())
        .map(|vi| p.add_var(obj[vi], (lower[vi], upper[vi])))
        .collect();
    for row in &parsed.rows {
        let terms: Vec<(microlp::Variable, f64)> =
            row.terms.iter().map(|&(vi, c)| (vars[vi], c)).collect();
        let op = match row.sense {
            Sense::Le => ComparisonOp::Le,
            Sense::Ge => ComparisonOp::Ge,
            Sense::Eq => ComparisonOp::Eq,
        };
        p.add_constraint(terms, op, row.rhs);
    }
    match p.solve() {
        Ok(outcome) => match outcome.solution() {
            Some(sol) => {
                let values: Vec<f64> = vars.iter().map(|&v| sol.var_value(v)).collect();
                Ok(Some((sol.objective(), values)))
            }
            None => Err(Error::Solver(
                "LP relaxation terminated without a solution".into(),
            )),
        },
        Err(microlp::Error::Infeasible) => Ok(None),
        Err(microlp::Error::Unbounded) => Err(Error::Solver("relaxation unbounded".into())),
        Err(e) => Err(Error::Solver(format!("LP relaxation failed: {e}"))),
    }
}

pub(crate) fn solve(parsed: &ParsedMps, config: &SolveConfig) -> Result<RawSolution> {
    let start = std::time::Instant::now();
    let n = parsed.vars.len();
    let mut obj = vec![0.0; n];
    for &(vi, c) in &parsed.objective {
        obj[vi] += c;
    }
    let int_vars: Vec<usize> = (0..n).filter(|&vi| parsed.vars[vi].integer).collect();
    let lower: Vec<f64> = parsed.vars.iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = parsed.vars.iter().map(|v| v.upper).collect();

    // Root relaxation; its status decides infeasible/unbounded outright.
    let root = match solve_relaxation(parsed, &obj, &lower, &upper) {
        Ok(Some(r)) => r,
        Ok(None) => {
            return Ok(RawSolution {
                status: SolveStatus::Infeasible,
                columns: None,
                gap: None,
            })
        }
        Err(Error::Solver(msg)) if msg.contains("unbounded") => {
            return Ok(RawSolution {
                status: SolveStatus::Unbounded,
                columns: None,
                gap: None,
            })
        }
        Err(e) => return Err(e),
    };

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut stack = vec![Node {
        lower,
        upper,
        bound: root.0,
    }];
    let mut timed_out = false;
    let mut best_open_bound = root.0;

    while let Some(node) = stack.pop() {
        if start.elapsed().as_secs_f64() > config.time_limit_s {
            timed_out = true;
            break;
        }
        if let Some((inc_obj, _)) = &incumbent {
            let cutoff = inc_obj - (1e-12 + config.rel_gap * inc_obj.abs());
            if node.bound >= cutoff {
                continue;
            }
        }
        let Some((lp_obj, values)) = solve_relaxation(parsed, &obj, &node.lower, &node.upper)?
        else {
            continue;
        };
        if let Some((inc_obj, _)) = &incumbent {
            let cutoff = inc_obj - (1e-12 + config.rel_gap * inc_obj.abs());
            if lp_obj >= cutoff {
                continue;
            }
        }
        let frac = int_vars
            .iter()
            .map(|&vi| (vi, (values[vi] - values[vi].round()).abs()))
            .filter(|&(_, d)| d > INT_TOL)
            .max_by(|a, b| {
                a.1.partial_cmp(&b.1)
                    .unwrap()
                    .then(b.0.cmp(&a.0)) // prefer lowest index on ties
            });
        match frac {
            None => {
                let mut rounded = values;
                for &vi in &int_vars {
                    rounded[vi] = rounded[vi].round();
                }
                if incumbent.as_ref().map_or(true, |(o, _)| lp_obj < *o) {
                    incumbent = Some((lp_obj, rounded));
                }
            }
            Some((vi, _)) => {
                let x = values[vi];
                let mut up = Node {
                    lower: node.lower.clone(),
                    upper: node.upper.clone(),
                    bound: lp_obj,
                };
                up.lower[vi] = x.ceil();
                let mut down = Node {
                    lower: node.lower,
                    upper: node.upper,
                    bound: lp_obj,
                };
                down.upper[vi] = x.floor();
                stack.push(up);
                stack.push(down);
            }
        }
        best_open_bound = stack
            .iter()
            .map(|nd| nd.bound)
            .fold(f64::INFINITY, f64::min);
    }

    match incumbent {
        Some((inc_obj, values)) => {
            let status = if timed_out {
                SolveStatus::Feasible
            } else {
                SolveStatus::Optimal
            };
            let gap = if timed_out && !stack.is_empty() {
                Some((inc_obj - best_open_bound).max(0.0) / inc_obj.abs().max(1.0))
            } else {
                Some(0.0)
            };
            Ok(RawSolution {
                status,
                columns: Some(values),
                gap,
            })
        }
        None => Ok(RawSolution {
            status: if timed_out {
                SolveStatus::Timeout
            } else {
                SolveStatus::Infeasible
            },
            columns: None,
            gap: None,
        }),
    }
}
