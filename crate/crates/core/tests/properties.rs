mod common;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pilotdecon::angular::{dar, pair_cost, pair_cost_in};
use pilotdecon::assignment::{solve_bnb, solve_greedy, AssignmentProblem, PilotAssignment};
use pilotdecon::channel::Ula;
use pilotdecon::geometry::{
    hex_layout, place_users_uniform, AngularSupport, Cell, Scenario, SystemParams,
};
use pilotdecon::harness::experiments::{cell_series, mutual_two_cell_scenario, BASELINE_SERIES};
use pilotdecon::harness::{
    build_problem, gain, run_experiment, trial_errors, ExperimentConfig, ExperimentKind,
    Formulation, Link, Source,
};

use common::user_error;

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Average ranks, ties sharing the mean of their positions.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let r = 0.5 * (i + j) as f64;
        for &k in &order[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let (mx, my) = (mean(&rx), mean(&ry));
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[test]
fn spearman_helper() {
    assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-12);
    assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
    assert_eq!(ranks(&[5.0, 1.0, 5.0, 0.0]), vec![2.5, 1.0, 2.5, 0.0]);
}

fn single_link(target: &Source, interferer: Option<Source>) -> Link {
    Link {
        series: "probe".into(),
        method: "none".into(),
        pilot: 0,
        user: "c1u1".into(),
        key: 0,
        target: target.clone(),
        interferers: interferer.into_iter().collect(),
    }
}

#[test]
fn pair_cost_predicts_contamination() {
    let params = SystemParams::default();
    let ula = Ula::from_params(&params).with_antennas(10);
    let spread = (params.scatter_radius / 500.0).asin();
    let region = dar(spread, &ula).unwrap();
    let target = Source::new(AngularSupport::wrapped(0.0, spread), gain(&params, 500.0));
    let errors = |link: &Link| {
        mean(&trial_errors(link, &params, ExperimentKind::Custom, 3, 10, 200).unwrap())
    };
    let baseline = errors(&single_link(&target, None));

    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let (mut cost, mut loss) = (Vec::new(), Vec::new());
    for _ in 0..50 {
        let d: f64 = rng.random_range(600.0..1500.0);
        let support = AngularSupport::wrapped(
            rng.random_range(0.0..PI),
            (params.scatter_radius / d).asin(),
        );
        cost.push(pair_cost(&region, &support));
        loss.push(
            errors(&single_link(
                &target,
                Some(Source::new(support, gain(&params, d))),
            )) - baseline,
        );
    }
    let rho = spearman(&cost, &loss);
    assert!(rho > 0.5, "Spearman rho {rho}");
}

#[test]
fn half_runs_agree_with_full_run() {
    let params = SystemParams::default();
    let target = Source::new(AngularSupport::wrapped(0.0, 0.1), gain(&params, 500.0));
    let other = Source::new(AngularSupport::wrapped(2.5, 0.05), gain(&params, 1000.0));
    let link = single_link(&target, Some(other));
    let full = trial_errors(&link, &params, ExperimentKind::Custom, 11, 10, 400).unwrap();
    let a = trial_errors(&link, &params, ExperimentKind::Custom, 12, 10, 200).unwrap();
    let b = trial_errors(&link, &params, ExperimentKind::Custom, 13, 10, 200).unwrap();
    let pooled = mean(&[a, b].concat());
    let m = mean(&full);
    let sd = (full.iter().map(|e| (e - m).powi(2)).sum::<f64>() / (full.len() - 1) as f64).sqrt();
    // difference of two independent means of 400 draws each
    let sigma = sd * (2.0 / 400.0f64).sqrt();
    assert!(
        (pooled - m).abs() < 3.0 * sigma,
        "pooled {pooled}, full {m}, sigma {sigma}"
    );
}

/// Two adjacent cells, two uniformly placed users each, two pilots.
fn random_two_cells(seed: u64) -> Scenario {
    let params = SystemParams {
        num_pilots: 2,
        ..SystemParams::default()
    };
    let bs = hex_layout(1, params.cell_radius);
    let mut attempt = seed * 1000;
    loop {
        let cells = vec![
            Cell::new(
                bs[0],
                place_users_uniform(bs[0], params.cell_radius, 2, attempt),
            ),
            Cell::new(
                bs[1],
                place_users_uniform(bs[1], params.cell_radius, 2, attempt + 1),
            ),
        ];
        // users closer than the scatter radius to some BS are rejected
        if let Ok(s) = Scenario::new(cells, params.clone()) {
            return s;
        }
        attempt += 2;
    }
}

fn worst_pilot(problem: &AssignmentProblem, a: &PilotAssignment) -> f64 {
    (0..problem.num_pilots)
        .map(|p| {
            let users = a.users_on(p);
            let mut total = 0.0;
            for &i in &users {
                for &j in &users {
                    if i != j {
                        total += problem.utility[(i, j)];
                    }
                }
            }
            total
        })
        .fold(0.0, f64::max)
}

/// (seed, problem, joint, greedy) for 50 random instances.
fn joint_and_greedy() -> Vec<(u64, AssignmentProblem, PilotAssignment, PilotAssignment)> {
    (0..50)
        .map(|seed| {
            let scenario = random_two_cells(seed);
            let problem = build_problem(&scenario, Formulation::SingleCell, 0).unwrap();
            let greedy = solve_greedy(&problem).unwrap();
            let joint = solve_bnb(&problem, None).unwrap();
            (seed, problem, joint, greedy)
        })
        .collect()
}

#[test]
fn joint_total_never_exceeds_greedy() {
    for (seed, _, joint, greedy) in joint_and_greedy() {
        assert!(joint.objective <= greedy.objective + 1e-12, "seed {seed}");
    }
}

/// The joint solver minimizes the sum over pilots, so it may accept one
/// expensive pilot to save more on the other.
#[test]
#[ignore = "fails on 1 of 50 instances: the sum objective does not bound the worst pilot"]
fn joint_worst_pilot_never_exceeds_greedy() {
    let misses: Vec<(u64, f64, f64)> = joint_and_greedy()
        .into_iter()
        .map(|(seed, problem, joint, greedy)| {
            (
                seed,
                worst_pilot(&problem, &joint),
                worst_pilot(&problem, &greedy),
            )
        })
        .filter(|&(_, j, g)| j > g + 1e-12)
        .collect();
    assert!(misses.is_empty(), "{misses:?}");
}

#[test]
fn mutual_pairing_is_free_at_both_stations() {
    let params = SystemParams::default();
    let scenario = mutual_two_cell_scenario(&params).unwrap();
    let ula = Ula::from_params(&scenario.params);
    let users = scenario.users();
    let cost = |i: usize, j: usize| pair_cost_in(&scenario, &users[i], &users[j], &ula).unwrap();
    // c1u1 with c2u2 and c1u2 with c2u1
    for (i, j) in [(0, 3), (1, 2)] {
        assert_eq!(cost(i, j), 0.0);
        assert_eq!(cost(j, i), 0.0);
    }
    assert!(cost(0, 2) + cost(2, 0) + cost(1, 3) + cost(3, 1) > 1.0);
    let problem = build_problem(&scenario, Formulation::Qos, 0).unwrap();
    let a = solve_bnb(&problem, None).unwrap();
    assert_eq!(a.objective, 0.0);
    let mut pairs: Vec<Vec<usize>> = (0..2).map(|p| a.users_on(p)).collect();
    pairs.sort();
    assert_eq!(pairs, vec![vec![0, 3], vec![1, 2]]);
}

/// Three-point moving average.
fn smooth(v: &[f64]) -> Vec<f64> {
    (0..v.len())
        .map(|k| {
            let lo = k.saturating_sub(1);
            let hi = (k + 1).min(v.len() - 1);
            mean(&v[lo..=hi])
        })
        .collect()
}

#[test]
fn mutual_two_cell_trends() {
    let config = ExperimentConfig::new(ExperimentKind::Mutual2Cell);
    let rows = run_experiment(&config).unwrap();
    let sweep = &config.antennas;
    for (cell, user) in [(0, "c1u1"), (0, "c1u2"), (1, "c2u1"), (1, "c2u2")] {
        let curve: Vec<f64> = sweep
            .iter()
            .map(|&m| user_error(&rows, &cell_series(cell), user, m))
            .collect();
        let smoothed = smooth(&curve);
        assert!(
            smoothed.windows(2).all(|w| w[1] <= w[0] + 1e-9),
            "{user}: {curve:?} is not decreasing"
        );
        // contaminated and clean estimates converge
        let clean = user_error(&rows, BASELINE_SERIES, user, 50);
        let contaminated = user_error(&rows, &cell_series(cell), user, 50);
        assert!(
            contaminated - clean < 1.0,
            "{user}: {contaminated} vs {clean}"
        );
    }
    // the two cells see statistically equivalent conditions
    let at10 = |cell: usize, users: [&str; 2]| {
        mean(&users.map(|u| user_error(&rows, &cell_series(cell), u, 10)))
    };
    let gap = (at10(0, ["c1u1", "c1u2"]) - at10(1, ["c2u1", "c2u2"])).abs();
    assert!(gap < 3.0, "cell means differ by {gap} dB at M=10");
}
