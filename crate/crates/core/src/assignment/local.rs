use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::search::Space;
use super::{AssignmentProblem, Method, PilotAssignment, SolverMeta, TIE_EPS};
use crate::Result;

/// Objective after each accepted move, one list per descent (restart).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LocalSearchTrace {
    pub descents: Vec<Vec<f64>>,
}

/// First-improvement descent with random restarts. Moves either reassign a
/// seat to another user of the same cell (a user's pilot subset in the
/// inequality form) or swap the choices of two positions of the same cell.
/// `iters` bounds the number of evaluated moves.
pub fn solve_local_search(
    problem: &AssignmentProblem,
    seed: u64,
    iters: usize,
) -> Result<PilotAssignment> {
    local_search_with_trace(problem, seed, iters).map(|(a, _)| a)
}

pub fn local_search_with_trace(
    problem: &AssignmentProblem,
    seed: u64,
    iters: usize,
) -> Result<(PilotAssignment, LocalSearchTrace)> {
    problem.check_solvable()?;
    let space = Space::new(problem);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let value = |state: &[usize]| problem.objective(&space.assignment(state));

    let mut moves = Vec::new();
    for k in 0..space.len() {
        for c in 0..space.positions[k].choices.len() {
            moves.push(Move::Reassign(k, c));
        }
        for l in k + 1..space.len() {
            if space.positions[k].cell == space.positions[l].cell {
                moves.push(Move::Swap(k, l));
            }
        }
    }

    let mut trace = LocalSearchTrace::default();
    let mut current = random_start(&space, &mut rng);
    let mut current_value = value(&current);
    trace.descents.push(vec![current_value]);
    let mut best = (current_value, current.clone());
    let mut evaluations = 0usize;

    'search: while evaluations < iters {
        moves.shuffle(&mut rng);
        let mut improved = false;
        let mut tried = 0usize;
        for mv in &moves {
            let Some(candidate) = mv.apply(&current) else {
                continue;
            };
            if evaluations >= iters {
                break 'search;
            }
            evaluations += 1;
            tried += 1;
            if !space.balanced(&candidate) {
                continue;
            }
            let v = value(&candidate);
            if v < current_value - TIE_EPS {
                current = candidate;
                current_value = v;
                trace.descents.last_mut().expect("trace started").push(v);
                improved = true;
                break;
            }
        }
        if !improved {
            if current_value < best.0 - TIE_EPS {
                best = (current_value, current.clone());
            }
            if tried == 0 {
                // nothing to move: the only feasible point
                break;
            }
            current = random_start(&space, &mut rng);
            current_value = value(&current);
            trace.descents.push(vec![current_value]);
        }
    }
    if current_value < best.0 - TIE_EPS {
        best = (current_value, current);
    }

    let assignment = problem.finish(
        space.assignment(&best.1),
        SolverMeta {
            method: Method::LocalSearch,
            nodes_explored: evaluations as u64,
            proven_optimal: false,
        },
    );
    Ok((assignment, trace))
}

#[derive(Debug, Clone, Copy)]
enum Move {
    Reassign(usize, usize),
    Swap(usize, usize),
}

impl Move {
    fn apply(&self, state: &[usize]) -> Option<Vec<usize>> {
        let mut next = state.to_vec();
        match *self {
            Move::Reassign(k, c) => {
                if state[k] == c {
                    return None;
                }
                next[k] = c;
            }
            Move::Swap(k, l) => {
                if state[k] == state[l] {
                    return None;
                }
                next.swap(k, l);
            }
        }
        Some(next)
    }
}

/// Uniformly shuffled feasible point: a single pilot per user in the
/// inequality form, evenly shared seats per cell otherwise.
fn random_start(space: &Space, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let problem = space.problem;
    if !problem.kind.is_equality() {
        // the first `num_pilots` choices are the singletons
        return (0..space.len())
            .map(|_| rng.random_range(0..problem.num_pilots))
            .collect();
    }
    let active = problem.active_cells();
    let mut state = vec![0; space.len()];
    for (slot, &c) in active.iter().enumerate() {
        let size = problem.cells[c].len();
        let mut order: Vec<usize> = (0..size).collect();
        order.shuffle(rng);
        let mut seq: Vec<usize> = (0..problem.num_pilots).map(|p| order[p % size]).collect();
        seq.shuffle(rng);
        for (p, choice) in seq.into_iter().enumerate() {
            state[p * active.len() + slot] = choice;
        }
    }
    debug_assert!(space.balanced(&state));
    state
}
