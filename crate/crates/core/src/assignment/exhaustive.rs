use super::search::Space;
use super::{AssignmentProblem, Method, PilotAssignment, SolverMeta, TIE_EPS};
use crate::{Error, Result};

/// Largest number of pilot-subset combinations enumerated for the
/// inequality form.
pub const SUBSET_LIMIT: f64 = (1u64 << 24) as f64;
/// Largest number of seat combinations enumerated for the equality forms.
pub const EQUALITY_LIMIT: f64 = 1e7;

/// Enumerates every leaf of the decision tree, checks each with the
/// independent constraint checker and keeps the first minimum.
///
/// `nodes_explored` is the node count of the full decision tree.
pub fn solve_exhaustive(problem: &AssignmentProblem) -> Result<PilotAssignment> {
    problem.check_solvable()?;
    let space = Space::new(problem);
    let limit = if problem.kind.is_equality() {
        EQUALITY_LIMIT
    } else {
        SUBSET_LIMIT
    };
    let size = space.size();
    if size > limit {
        return Err(Error::SearchSpaceTooLarge { size, limit });
    }

    let len = space.len();
    let radix: Vec<usize> = space.positions.iter().map(|p| p.choices.len()).collect();
    let mut state = vec![0usize; len];
    let mut nodes = len as u64;
    let mut best: Option<(f64, Vec<Vec<bool>>)> = None;
    loop {
        let y = space.assignment(&state);
        if problem.check(&y).is_ok() {
            let value = problem.objective(&y);
            if best.as_ref().is_none_or(|(b, _)| value < b - TIE_EPS) {
                best = Some((value, y));
            }
        }
        // odometer with the last position varying fastest
        let mut k = len;
        loop {
            if k == 0 {
                let (_, y) = best.ok_or_else(|| {
                    Error::Infeasible("no assignment satisfies the constraints".into())
                })?;
                return Ok(problem.finish(
                    y,
                    SolverMeta {
                        method: Method::Exhaustive,
                        nodes_explored: nodes,
                        proven_optimal: true,
                    },
                ));
            }
            k -= 1;
            state[k] += 1;
            if state[k] < radix[k] {
                nodes += (len - k) as u64;
                break;
            }
            state[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::ConstraintKind;
    use nalgebra::DMatrix;

    #[test]
    fn node_count_is_full_tree() {
        let p = AssignmentProblem::new(
            DMatrix::zeros(3, 3),
            vec![vec![0], vec![1], vec![2]],
            2,
            ConstraintKind::AtLeastOne,
        )
        .unwrap();
        let a = solve_exhaustive(&p).unwrap();
        // radix 3 at each of 3 levels: 3 + 9 + 27
        assert_eq!(a.meta.nodes_explored, 39);
        assert!(a.meta.proven_optimal);
    }

    #[test]
    fn refuses_large_spaces() {
        // 3^16 leaves exceed 2^24
        let n = 16;
        let p = AssignmentProblem::new(
            DMatrix::zeros(n, n),
            vec![(0..n).collect()],
            2,
            ConstraintKind::AtLeastOne,
        )
        .unwrap();
        assert!(matches!(
            solve_exhaustive(&p),
            Err(Error::SearchSpaceTooLarge { .. })
        ));
    }
}
