#![allow(dead_code)]

use nalgebra::DMatrix;
use pilotdecon::assignment::{AssignmentProblem, ConstraintKind};
use pilotdecon::harness::ResultRow;
use rand::seq::SliceRandom;
use rand::Rng;

/// Random instance with at most `max_users` users, 1 or 2 pilots, up to
/// three cells and a random formulation. Utilities are in `[0, 2]`, a few
/// set to exactly zero to create ties.
pub fn random_problem<R: Rng>(rng: &mut R, max_users: usize) -> AssignmentProblem {
    let n = rng.random_range(2..=max_users);
    let pilots = rng.random_range(1..=2);
    let num_cells = rng.random_range(1..=3usize.min(n));
    let mut cells = vec![Vec::new(); num_cells];
    for u in 0..n {
        // every cell gets at least one user
        let c = if u < num_cells {
            u
        } else {
            rng.random_range(0..num_cells)
        };
        cells[c].push(u);
    }
    let utility = DMatrix::from_fn(n, n, |i, j| {
        if i == j || rng.random::<f64>() < 0.15 {
            0.0
        } else {
            2.0 * rng.random::<f64>()
        }
    });
    let kind = match rng.random_range(0..3) {
        0 => ConstraintKind::AtLeastOne,
        1 => ConstraintKind::OnePerCellPerPilot,
        _ => {
            let target = rng.random_range(0..num_cells);
            let mut others: Vec<usize> = (0..num_cells).filter(|&c| c != target).collect();
            others.shuffle(rng);
            let keep = rng.random_range(0..=others.len());
            others.truncate(keep);
            others.sort_unstable();
            ConstraintKind::SingleCell {
                target,
                neighbors: others,
            }
        }
    };
    AssignmentProblem::new(utility, cells, pilots, kind).unwrap()
}

/// Mean error of the row matching `series`, `pilot` (1-based) and `antennas`.
pub fn mean_error(rows: &[ResultRow], series: &str, pilot: usize, antennas: usize) -> f64 {
    let hits: Vec<&ResultRow> = rows
        .iter()
        .filter(|r| r.series == series && r.pilot == pilot && r.antennas == antennas)
        .collect();
    assert_eq!(
        hits.len(),
        1,
        "{series} pilot {pilot} M={antennas}: {} rows",
        hits.len()
    );
    hits[0].mean_error_db
}

/// Mean error of one user's row in `series` at `antennas`.
pub fn user_error(rows: &[ResultRow], series: &str, user: &str, antennas: usize) -> f64 {
    let hits: Vec<&ResultRow> = rows
        .iter()
        .filter(|r| r.series == series && r.user == user && r.antennas == antennas)
        .collect();
    assert_eq!(
        hits.len(),
        1,
        "{series} {user} M={antennas}: {} rows",
        hits.len()
    );
    hits[0].mean_error_db
}
