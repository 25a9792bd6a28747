use std::time::{Duration, Instant};

use super::search::Space;
use super::{AssignmentProblem, Method, PilotAssignment, SolverMeta, TIE_EPS};
use crate::{Error, Result};

/// Depth-first branch and bound over the same decision tree as
/// [`solve_exhaustive`](super::solve_exhaustive), visiting choices in the same
/// order.
///
/// The bound adds, for every open position, the cheapest choice within the
/// share caps against the users fixed so far. With `U ≥ 0` this never
/// overestimates.
/// When `timeout` expires the incumbent is returned unproven.
pub fn solve_bnb(
    problem: &AssignmentProblem,
    timeout: Option<Duration>,
) -> Result<PilotAssignment> {
    problem.check_solvable()?;
    if let Some((row, col, value)) = problem
        .utility
        .iter()
        .enumerate()
        .map(|(k, &v)| (k % problem.num_users(), k / problem.num_users(), v))
        .find(|&(_, _, v)| v < 0.0 || v.is_nan())
    {
        return Err(Error::NegativeUtility { row, col, value });
    }
    let space = Space::new(problem);
    let mut search = Search {
        space: &space,
        on_pilot: vec![Vec::new(); problem.num_pilots],
        counts: vec![0; problem.num_users()],
        state: Vec::with_capacity(space.len()),
        best: None,
        nodes: 0,
        deadline: timeout.map(|t| Instant::now() + t),
        timed_out: false,
    };
    search.descend(0.0);
    let proven = !search.timed_out;
    let nodes = search.nodes;
    let (_, state) = search
        .best
        .ok_or_else(|| Error::Infeasible("no assignment satisfies the constraints".into()))?;
    Ok(problem.finish(
        space.assignment(&state),
        SolverMeta {
            method: Method::BranchAndBound,
            nodes_explored: nodes,
            proven_optimal: proven,
        },
    ))
}

struct Search<'s, 'p> {
    space: &'s Space<'p>,
    on_pilot: Vec<Vec<usize>>,
    counts: Vec<usize>,
    state: Vec<usize>,
    best: Option<(f64, Vec<usize>)>,
    nodes: u64,
    deadline: Option<Instant>,
    timed_out: bool,
}

impl Search<'_, '_> {
    fn incumbent(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |(v, _)| *v)
    }

    fn bound(&self, from: usize) -> f64 {
        // only the cap test is monotone along a path, so only it may filter
        self.space.positions[from..]
            .iter()
            .map(|pos| {
                pos.choices
                    .iter()
                    .filter(|c| self.space.within_cap(c, &self.counts))
                    .map(|c| self.space.increment(c, &self.on_pilot))
                    .fold(f64::INFINITY, f64::min)
            })
            .sum()
    }

    fn descend(&mut self, cost: f64) {
        let k = self.state.len();
        if k == self.space.len() {
            if cost < self.incumbent() - TIE_EPS {
                self.best = Some((cost, self.state.clone()));
            }
            return;
        }
        for c in 0..self.space.positions[k].choices.len() {
            if self.timed_out {
                return;
            }
            if let Some(deadline) = self.deadline {
                if self.best.is_some() && Instant::now() >= deadline {
                    self.timed_out = true;
                    return;
                }
            }
            let choice = &self.space.positions[k].choices[c];
            if !self.space.admissible(k, choice, &self.counts) {
                continue;
            }
            let next = cost + self.space.increment(choice, &self.on_pilot);
            self.nodes += 1;
            for &(u, p) in choice {
                self.on_pilot[p].push(u);
                self.counts[u] += 1;
            }
            self.state.push(c);
            if next + self.bound(k + 1) < self.incumbent() - TIE_EPS {
                self.descend(next);
            }
            self.state.pop();
            for &(u, p) in choice {
                self.on_pilot[p].pop();
                self.counts[u] -= 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::{solve_exhaustive, ConstraintKind};
    use nalgebra::DMatrix;

    #[test]
    fn zero_utility_returns_first_feasible() {
        let p = AssignmentProblem::new(
            DMatrix::zeros(4, 4),
            vec![vec![0, 1], vec![2, 3]],
            2,
            ConstraintKind::OnePerCellPerPilot,
        )
        .unwrap();
        let a = solve_bnb(&p, None).unwrap();
        assert_eq!(a.objective, 0.0);
        // first leaf in order: pilot 0 takes the first user of each cell
        assert_eq!(a.users_on(0), vec![0, 2]);
        assert_eq!(a.users_on(1), vec![1, 3]);
        assert_eq!(a.y, solve_exhaustive(&p).unwrap().y);
    }

    #[test]
    fn rejects_negative_entries() {
        let mut u = DMatrix::zeros(2, 2);
        u[(1, 0)] = -0.5;
        let p = AssignmentProblem::new(u, vec![vec![0], vec![1]], 1, ConstraintKind::AtLeastOne)
            .unwrap();
        assert!(matches!(
            solve_bnb(&p, None),
            Err(Error::NegativeUtility { row: 1, col: 0, .. })
        ));
    }

    #[test]
    fn expired_timeout_keeps_incumbent() {
        let n = 12;
        let u = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else {
                ((i * 31 + j * 17) % 13) as f64 / 6.0
            }
        });
        let cells: Vec<Vec<usize>> = (0..4).map(|c| (3 * c..3 * c + 3).collect()).collect();
        let p = AssignmentProblem::new(u, cells, 3, ConstraintKind::OnePerCellPerPilot).unwrap();
        let a = solve_bnb(&p, Some(Duration::ZERO)).unwrap();
        assert!(!a.meta.proven_optimal);
        assert!(p.check(&a.y).is_ok());
        let full = solve_bnb(&p, None).unwrap();
        assert!(full.meta.proven_optimal);
        assert!(full.objective <= a.objective + 1e-12);
    }
}
