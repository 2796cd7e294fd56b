//! Adapter for the HiGHS solver.

use super::{RawSolution, SolveConfig, SolveStatus};
use crate::error::{Error, Result};
use crate::milp::{ParsedMps, Sense};
use highs::{HighsModelStatus, HighsSolutionStatus, RowProblem};

pub(crate) fn solve(parsed: &ParsedMps, config: &SolveConfig) -> Result<RawSolution> {
    let mut pb = RowProblem::default();
    let mut obj = vec![0.0; parsed.vars.len()];
    for &(vi, c) in &parsed.objective {
        obj[vi] += c;
    }
    let has_integers = parsed.vars.iter().any(|v| v.integer);

    let cols: Vec<highs::Col> = parsed
        .vars
        .iter()
        .enumerate()
        .map(|(vi, v)| {
            use std::ops::Bound;
            let bounds = (Bound::Included(v.lower), Bound::Included(v.upper));
            if v.integer {
                pb.add_integer_column(obj[vi], bounds)
            } else {
                pb.add_column(obj[vi], bounds)
            }
        })
        .collect();

    for row in &parsed.rows {
        let terms: Vec<(highs::Col, f64)> =
            row.terms.iter().map(|&(vi, c)| (cols[vi], c)).collect();
        match row.sense {
            Sense::Le => pb.add_row(..=row.rhs, &terms),
            Sense::Ge => pb.add_row(row.rhs.., &terms),
            Sense::Eq => pb.add_row(row.rhs..=row.rhs, &terms),
        };
    }

    let mut model = pb.optimise(highs::Sense::Minimise);
    model.make_quiet();
    model.set_option("threads", config.threads.max(1) as i32);
    model.set_option("random_seed", 0);
    model.set_option("time_limit", config.time_limit_s);
    if has_integers {
        model.set_option("mip_rel_gap", config.rel_gap);
        // Keep branch-and-bound single-threaded for reproducibility.
        model.set_option("mip_abs_gap", 0.0);
    }
    let solved = model.solve();

    let status = solved.status();
    let gap = if has_integers && status == HighsModelStatus::Optimal {
        Some(solved.mip_gap())
    } else if status == HighsModelStatus::Optimal {
        Some(0.0)
    } else {
        None
    };

    let mapped = match status {
        HighsModelStatus::Optimal => SolveStatus::Optimal,
        HighsModelStatus::Infeasible => SolveStatus::Infeasible,
        HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => {
            SolveStatus::Unbounded
        }
        HighsModelStatus::ReachedTimeLimit => {
            if solved.primal_solution_status() == HighsSolutionStatus::Feasible {
                SolveStatus::Feasible
            } else {
                SolveStatus::Timeout
            }
        }
        other => {
            return Err(Error::Solver(format!(
                "HiGHS returned unusable status {other:?}"
            )))
        }
    };

    let columns = if mapped.has_solution() {
        Some(solved.get_solution().columns().to_vec())
    } else {
        None
    };

    Ok(RawSolution {
        status: if mapped == SolveStatus::Feasible {
            SolveStatus::Feasible
        } else {
            mapped
        },
        columns,
        gap,
    })
}
