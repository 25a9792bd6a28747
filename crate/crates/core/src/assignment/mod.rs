//! Pilot assignment as a binary quadratic program.
//!
//! A user `i` is active on pilot `p` when `y[i][p]` is set. The objective is
//! the ordered sum `Σ_p Σ_i Σ_{j≠i} U_ij y_ip y_jp`, i.e. `yᵀ (I_P ⊗ U) y`.
//!
//! Three constraint systems are supported:
//!
//! * [`ConstraintKind::AtLeastOne`]: every user holds at least one pilot.
//! * [`ConstraintKind::OnePerCellPerPilot`]: every non-empty cell places
//!   exactly one user on every pilot.
//! * [`ConstraintKind::SingleCell`]: as above but only for a target cell and
//!   its neighbors, with cost rows of non-target users zeroed.
//!
//! Under the per-cell equality constraints a cell with at least as many users
//! as pilots gives each user at most one pilot. A smaller cell must repeat
//! users across pilots; its users then share the pilots as evenly as possible
//! and the result is flagged as forced reuse.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::angular::UtilityMatrix;
use crate::geometry::Scenario;
use crate::{Error, Result};

mod bnb;
mod exhaustive;
mod greedy;
mod local;
mod search;

pub use bnb::solve_bnb;
pub use exhaustive::{solve_exhaustive, EQUALITY_LIMIT, SUBSET_LIMIT};
pub use greedy::solve_greedy;
pub use local::{local_search_with_trace, solve_local_search, LocalSearchTrace};

/// Objective differences below this are treated as ties.
pub const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintKind {
    AtLeastOne,
    OnePerCellPerPilot,
    SingleCell {
        target: usize,
        neighbors: Vec<usize>,
    },
}

impl ConstraintKind {
    pub fn is_equality(&self) -> bool {
        !matches!(self, ConstraintKind::AtLeastOne)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Exhaustive,
    BranchAndBound,
    LocalSearch,
    Greedy,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exhaustive => "exhaustive",
            Method::BranchAndBound => "bnb",
            Method::LocalSearch => "local",
            Method::Greedy => "greedy",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Method::Exhaustive),
            "bnb" => Ok(Method::BranchAndBound),
            "local" => Ok(Method::LocalSearch),
            "greedy" => Ok(Method::Greedy),
            other => Err(Error::Unsupported(format!(
                "unknown assignment method '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverMeta {
    pub method: Method,
    pub nodes_explored: u64,
    pub proven_optimal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PilotAssignment {
    /// `y[user][pilot]`
    pub y: Vec<Vec<bool>>,
    pub objective: f64,
    pub meta: SolverMeta,
    /// Some cell has fewer users than pilots and repeats users across pilots.
    pub forced_reuse: bool,
}

impl PilotAssignment {
    pub fn num_users(&self) -> usize {
        self.y.len()
    }

    pub fn pilots_of(&self, user: usize) -> Vec<usize> {
        (0..self.y[user].len())
            .filter(|&p| self.y[user][p])
            .collect()
    }

    pub fn users_on(&self, pilot: usize) -> Vec<usize> {
        (0..self.y.len()).filter(|&i| self.y[i][pilot]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentProblem {
    /// `U`, or `Ū` for the single-cell formulation.
    pub utility: DMatrix<f64>,
    pub num_pilots: usize,
    pub kind: ConstraintKind,
    /// Global user indices per cell.
    pub cells: Vec<Vec<usize>>,
    /// Refuse instances that need forced reuse instead of flagging them.
    pub allow_reuse: bool,
}

impl AssignmentProblem {
    pub fn new(
        utility: DMatrix<f64>,
        cells: Vec<Vec<usize>>,
        num_pilots: usize,
        kind: ConstraintKind,
    ) -> Result<Self> {
        let n = utility.nrows();
        if !utility.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "utility matrix is {}x{}",
                utility.nrows(),
                utility.ncols()
            )));
        }
        if num_pilots == 0 {
            return Err(Error::InvalidScenario("need at least one pilot".into()));
        }
        let mut seen = vec![false; n];
        for &u in cells.iter().flatten() {
            if u >= n || seen[u] {
                return Err(Error::InvalidScenario(format!(
                    "user {u} is out of range or listed in two cells"
                )));
            }
            seen[u] = true;
        }
        if let Some(u) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidScenario(format!(
                "user {u} belongs to no cell"
            )));
        }
        let mut utility = utility;
        if let ConstraintKind::SingleCell { target, neighbors } = &kind {
            if *target >= cells.len() || neighbors.iter().any(|&c| c >= cells.len() || c == *target)
            {
                return Err(Error::InvalidScenario(format!(
                    "invalid target cell {target} or neighbor list {neighbors:?}"
                )));
            }
            for (c, members) in cells.iter().enumerate() {
                if c != *target {
                    for &i in members {
                        utility.row_mut(i).fill(0.0);
                    }
                }
            }
        }
        Ok(Self {
            utility,
            num_pilots,
            kind,
            cells,
            allow_reuse: true,
        })
    }

    /// `Σ_p y_ip ≥ 1` for every user.
    pub fn multicell(scenario: &Scenario, u: &UtilityMatrix) -> Result<Self> {
        Self::new(
            u.values.clone(),
            scenario.cell_members(),
            scenario.params.num_pilots,
            ConstraintKind::AtLeastOne,
        )
    }

    /// One user from each non-empty cell on every pilot.
    pub fn multicell_qos(scenario: &Scenario, u: &UtilityMatrix) -> Result<Self> {
        Self::new(
            u.values.clone(),
            scenario.cell_members(),
            scenario.params.num_pilots,
            ConstraintKind::OnePerCellPerPilot,
        )
    }

    /// Contamination of cell `target`'s users only, over the target and its
    /// neighboring cells.
    pub fn singlecell(scenario: &Scenario, target: usize, u: &UtilityMatrix) -> Result<Self> {
        if target >= scenario.cells.len() {
            return Err(Error::InvalidScenario(format!("no cell {target}")));
        }
        Self::new(
            u.values.clone(),
            scenario.cell_members(),
            scenario.params.num_pilots,
            ConstraintKind::SingleCell {
                target,
                neighbors: scenario.neighbors(target),
            },
        )
    }

    pub fn with_reuse(mut self, allow: bool) -> Self {
        self.allow_reuse = allow;
        self
    }

    pub fn num_users(&self) -> usize {
        self.utility.nrows()
    }

    /// Cells carrying per-pilot equality constraints, ascending. Empty cells
    /// are dropped.
    pub fn active_cells(&self) -> Vec<usize> {
        let mut cells: Vec<usize> = match &self.kind {
            ConstraintKind::AtLeastOne => Vec::new(),
            ConstraintKind::OnePerCellPerPilot => (0..self.cells.len()).collect(),
            ConstraintKind::SingleCell { target, neighbors } => std::iter::once(*target)
                .chain(neighbors.iter().copied())
                .collect(),
        };
        cells.sort_unstable();
        cells.dedup();
        cells.retain(|&c| !self.cells[c].is_empty());
        cells
    }

    /// Active cells that must repeat a user across pilots.
    pub fn forced_reuse_cells(&self) -> Vec<usize> {
        self.active_cells()
            .into_iter()
            .filter(|&c| self.cells[c].len() < self.num_pilots)
            .collect()
    }

    /// Fails when forced reuse is needed but disallowed.
    pub fn check_solvable(&self) -> Result<()> {
        let forced = self.forced_reuse_cells();
        if !self.allow_reuse && !forced.is_empty() {
            return Err(Error::Infeasible(format!(
                "cells {:?} have fewer users than the {} pilots",
                forced.iter().map(|c| c + 1).collect::<Vec<_>>(),
                self.num_pilots
            )));
        }
        Ok(())
    }

    pub fn objective(&self, y: &[Vec<bool>]) -> f64 {
        objective(&self.utility, y, self.num_pilots)
    }

    /// Row contribution of each user: `Σ_p y_ip Σ_{j≠i} U_ij y_jp`. Sums to
    /// the objective.
    pub fn contributions(&self, y: &[Vec<bool>]) -> Vec<f64> {
        let n = self.num_users();
        (0..n)
            .map(|i| {
                (0..self.num_pilots)
                    .filter(|&p| y[i][p])
                    .map(|p| {
                        (0..n)
                            .filter(|&j| j != i && y[j][p])
                            .map(|j| self.utility[(i, j)])
                            .sum::<f64>()
                    })
                    .sum()
            })
            .collect()
    }

    /// Independent post-hoc check of the constraint system.
    pub fn check(&self, y: &[Vec<bool>]) -> std::result::Result<(), String> {
        let n = self.num_users();
        if y.len() != n || y.iter().any(|row| row.len() != self.num_pilots) {
            return Err(format!(
                "assignment shape differs from {n} users x {} pilots",
                self.num_pilots
            ));
        }
        let count = |i: usize| y[i].iter().filter(|&&b| b).count();
        if !self.kind.is_equality() {
            return match (0..n).find(|&i| count(i) == 0) {
                Some(i) => Err(format!("user {i} holds no pilot")),
                None => Ok(()),
            };
        }
        let active = self.active_cells();
        for (c, members) in self.cells.iter().enumerate() {
            if !active.contains(&c) {
                if let Some(&i) = members.iter().find(|&&i| count(i) > 0) {
                    return Err(format!("user {i} of unconstrained cell {c} holds a pilot"));
                }
                continue;
            }
            for p in 0..self.num_pilots {
                let on = members.iter().filter(|&&i| y[i][p]).count();
                if on != 1 {
                    return Err(format!("cell {c} has {on} users on pilot {p}"));
                }
            }
            let (lo, hi) = share_bounds(self.num_pilots, members.len());
            if let Some(&i) = members.iter().find(|&&i| count(i) < lo || count(i) > hi) {
                return Err(format!(
                    "user {i} of cell {c} holds {} pilots, expected {lo}..={hi}",
                    count(i)
                ));
            }
        }
        Ok(())
    }

    pub(crate) fn finish(&self, y: Vec<Vec<bool>>, meta: SolverMeta) -> PilotAssignment {
        debug_assert!(self.check(&y).is_ok(), "{:?}", self.check(&y));
        PilotAssignment {
            objective: self.objective(&y),
            y,
            meta,
            forced_reuse: self.kind.is_equality() && !self.forced_reuse_cells().is_empty(),
        }
    }
}

/// Minimum and maximum number of pilots per user in a cell of `size` users
/// under the equality constraints.
pub(crate) fn share_bounds(num_pilots: usize, size: usize) -> (usize, usize) {
    (num_pilots / size, num_pilots.div_ceil(size))
}

/// `Σ_p Σ_i Σ_{j≠i} U_ij y_ip y_jp`.
pub fn objective(utility: &DMatrix<f64>, y: &[Vec<bool>], num_pilots: usize) -> f64 {
    let mut total = 0.0;
    for p in 0..num_pilots {
        let on: Vec<usize> = (0..y.len()).filter(|&i| y[i][p]).collect();
        for &i in &on {
            for &j in &on {
                if i != j {
                    total += utility[(i, j)];
                }
            }
        }
    }
    total
}

/// Dispatches on `method`. `seed` and `iters` only affect local search.
pub fn solve(
    problem: &AssignmentProblem,
    method: Method,
    seed: u64,
    iters: usize,
) -> Result<PilotAssignment> {
    match method {
        Method::Exhaustive => solve_exhaustive(problem),
        Method::BranchAndBound => solve_bnb(problem, None),
        Method::LocalSearch => solve_local_search(problem, seed, iters),
        Method::Greedy => solve_greedy(problem),
    }
}
