use super::{share_bounds, AssignmentProblem, ConstraintKind, Method, PilotAssignment, SolverMeta};
use crate::{Error, Result};

/// Sequential baseline: pilot by pilot, the next target-cell user (in index
/// order) picks from every other active cell the user with the lowest cost
/// `U[target][candidate]` among those holding the fewest pilots so far.
/// Ties go to the lowest user index.
///
/// The target cell is the single-cell target, or the first active cell under
/// the all-cells equality form.
pub fn solve_greedy(problem: &AssignmentProblem) -> Result<PilotAssignment> {
    problem.check_solvable()?;
    let active = problem.active_cells();
    let target = match &problem.kind {
        ConstraintKind::AtLeastOne => {
            return Err(Error::Unsupported(
                "greedy assignment needs a one-user-per-cell-per-pilot formulation".into(),
            ))
        }
        ConstraintKind::SingleCell { target, .. } => *target,
        ConstraintKind::OnePerCellPerPilot => match active.first() {
            Some(&c) => c,
            None => {
                let y = vec![vec![false; problem.num_pilots]; problem.num_users()];
                return Ok(problem.finish(y, meta()));
            }
        },
    };
    let n = problem.num_users();
    let mut y = vec![vec![false; problem.num_pilots]; n];
    let mut counts = vec![0usize; n];
    let u = &problem.utility;
    // an empty target cell leaves nobody to pair against
    let target_users = &problem.cells[target];

    for p in 0..problem.num_pilots {
        let anchor = target_users.iter().copied().min_by_key(|&i| (counts[i], i));
        if let Some(t) = anchor {
            y[t][p] = true;
            counts[t] += 1;
        }
        for &c in active.iter().filter(|&&c| c != target) {
            let members = &problem.cells[c];
            let fewest = members
                .iter()
                .map(|&i| counts[i])
                .min()
                .expect("active cells are non-empty");
            let (_, cap) = share_bounds(problem.num_pilots, members.len());
            debug_assert!(fewest < cap);
            let pick = members
                .iter()
                .copied()
                .filter(|&i| counts[i] == fewest)
                .min_by(|&a, &b| {
                    let cost = |i: usize| anchor.map_or(0.0, |t| u[(t, i)]);
                    cost(a).total_cmp(&cost(b)).then(a.cmp(&b))
                })
                .expect("cell has a least-loaded user");
            y[pick][p] = true;
            counts[pick] += 1;
        }
    }
    Ok(problem.finish(y, meta()))
}

fn meta() -> SolverMeta {
    SolverMeta {
        method: Method::Greedy,
        nodes_explored: 0,
        proven_optimal: false,
    }
}
