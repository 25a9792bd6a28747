//! Decision-tree view of an assignment problem shared by the exact solvers
//! and local search.
//!
//! For the inequality form each position is a user and its choices are the
//! non-empty pilot subsets. For the equality forms each position is a
//! (pilot, cell) seat and its choices are the cell's users.

use super::{share_bounds, AssignmentProblem};

#[derive(Debug, Clone)]
pub(crate) struct Position {
    /// Cell whose share bounds apply; `None` for the inequality form.
    pub cell: Option<usize>,
    /// Each choice activates a list of (user, pilot) pairs.
    pub choices: Vec<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone)]
pub(crate) struct Space<'a> {
    pub problem: &'a AssignmentProblem,
    pub positions: Vec<Position>,
    /// Per user `(min, max)` number of pilots; unbounded above for the
    /// inequality form.
    pub share: Vec<(usize, usize)>,
    /// Seats of each cell at positions `k..`.
    remaining_seats: Vec<Vec<usize>>,
}

/// Non-empty subsets of `num_pilots` pilots, singletons first, then by
/// size and bit value.
pub(crate) fn pilot_subsets(num_pilots: usize) -> Vec<u32> {
    let mut subsets: Vec<u32> = (1..1u32 << num_pilots).collect();
    subsets.sort_by_key(|&s| (s.count_ones(), s));
    subsets
}

impl<'a> Space<'a> {
    pub fn new(problem: &'a AssignmentProblem) -> Self {
        let n = problem.num_users();
        let pilots = problem.num_pilots;
        let mut positions = Vec::new();
        let mut share = vec![(0, usize::MAX); n];
        if problem.kind.is_equality() {
            let active = problem.active_cells();
            for p in 0..pilots {
                for &c in &active {
                    positions.push(Position {
                        cell: Some(c),
                        choices: problem.cells[c].iter().map(|&u| vec![(u, p)]).collect(),
                    });
                }
            }
            for u in share.iter_mut() {
                *u = (0, 0);
            }
            for &c in &active {
                let bounds = share_bounds(pilots, problem.cells[c].len());
                for &u in &problem.cells[c] {
                    share[u] = bounds;
                }
            }
        } else {
            let subsets = pilot_subsets(pilots);
            for u in 0..n {
                share[u] = (1, usize::MAX);
                positions.push(Position {
                    cell: None,
                    choices: subsets
                        .iter()
                        .map(|&s| {
                            (0..pilots)
                                .filter(|&p| s >> p & 1 == 1)
                                .map(|p| (u, p))
                                .collect()
                        })
                        .collect(),
                });
            }
        }
        let len = positions.len();
        let mut remaining_seats = vec![vec![0; problem.cells.len()]; len + 1];
        for k in (0..len).rev() {
            remaining_seats[k] = remaining_seats[k + 1].clone();
            if let Some(c) = positions[k].cell {
                remaining_seats[k][c] += 1;
            }
        }
        Self {
            problem,
            positions,
            share,
            remaining_seats,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    /// Number of complete leaves.
    pub fn size(&self) -> f64 {
        self.positions
            .iter()
            .map(|p| p.choices.len() as f64)
            .product()
    }

    pub fn assignment(&self, state: &[usize]) -> Vec<Vec<bool>> {
        let mut y = vec![vec![false; self.problem.num_pilots]; self.problem.num_users()];
        for (pos, &c) in self.positions.iter().zip(state) {
            for &(u, p) in &pos.choices[c] {
                y[u][p] = true;
            }
        }
        y
    }

    /// Cost added by activating `choice` given the users already on each pilot.
    pub fn increment(&self, choice: &[(usize, usize)], on_pilot: &[Vec<usize>]) -> f64 {
        let u = &self.problem.utility;
        choice
            .iter()
            .map(|&(i, p)| {
                on_pilot[p]
                    .iter()
                    .map(|&j| u[(i, j)] + u[(j, i)])
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn within_cap(&self, choice: &[(usize, usize)], counts: &[usize]) -> bool {
        choice.iter().all(|&(u, _)| counts[u] < self.share[u].1)
    }

    /// Whether `choice` at position `k` keeps the prefix completable under the
    /// share bounds, given pilot counts before it.
    pub fn admissible(&self, k: usize, choice: &[(usize, usize)], counts: &[usize]) -> bool {
        let Some(cell) = self.positions[k].cell else {
            return true;
        };
        let (u, _) = choice[0];
        if counts[u] >= self.share[u].1 {
            return false;
        }
        let deficit: usize = self.problem.cells[cell]
            .iter()
            .map(|&v| {
                let have = counts[v] + usize::from(v == u);
                self.share[v].0.saturating_sub(have)
            })
            .sum();
        deficit <= self.remaining_seats[k + 1][cell]
    }

    /// Full-state feasibility under the share bounds.
    pub fn balanced(&self, state: &[usize]) -> bool {
        let mut counts = vec![0usize; self.problem.num_users()];
        for (pos, &c) in self.positions.iter().zip(state) {
            for &(u, _) in &pos.choices[c] {
                counts[u] += 1;
            }
        }
        if !self.problem.kind.is_equality() {
            return true;
        }
        self.problem
            .active_cells()
            .iter()
            .flat_map(|&c| self.problem.cells[c].iter())
            .all(|&u| (self.share[u].0..=self.share[u].1).contains(&counts[u]))
    }
}
