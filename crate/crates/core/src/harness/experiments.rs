//! Canned geometries and the link sets of each experiment.
//!
//! The single-link sweeps place the target at bearing 0 from its base
//! station, so base-station angles and angles relative to the target agree
//! and interferer supports can be given directly.

use crate::assignment::Method;
use crate::geometry::{AngularSupport, Cell, Position, Scenario, SystemParams};
use crate::{Error, Result};

use super::{
    assignment_links, build_problem, gain, solve_checked, ExperimentConfig, Formulation, Link,
    Source,
};

pub const TARGET_DISTANCE: f64 = 500.0;
pub const AOA_INTERFERER_DISTANCE: f64 = 1000.0;
pub const AOA_IN_DAR_MEANS_DEG: [f64; 3] = [60.0, 90.0, 120.0];
/// Interferer support outside the target's region, in degrees.
pub const AOA_OUTSIDE_SUPPORT_DEG: (f64, f64) = (136.3, 147.7);

pub const DISTANCE_SWEEP_SCATTER_RADIUS: f64 = 100.0;
pub const DISTANCE_SWEEP_MEANS_DEG: [f64; 3] = [60.0, 90.0, 150.0];
pub const DISTANCE_SWEEP_DISTANCES: [f64; 4] = [500.0, 1000.0, 1500.0, 2000.0];

pub const BASELINE_SERIES: &str = "interference-free";

pub fn in_dar_series(mean_deg: f64) -> String {
    format!("in-dar-{mean_deg}deg")
}

pub fn outside_series() -> String {
    let (lo, hi) = AOA_OUTSIDE_SUPPORT_DEG;
    format!("outside-{lo}-{hi}deg")
}

pub fn distance_series(mean_deg: f64, d: f64) -> String {
    format!("aoa-{mean_deg}deg-d-{d}m")
}

fn single_link(series: String, target: &Source, interferers: Vec<Source>) -> Link {
    Link {
        series,
        method: "none".into(),
        pilot: 0,
        user: "c1u1".into(),
        key: 0,
        target: target.clone(),
        interferers,
    }
}

fn spread(scatter_radius: f64, d: f64) -> f64 {
    (scatter_radius / d).asin()
}

/// Target at 500 m; interferers at 1000 m with supports inside the target's
/// desired region, and one with a fixed support outside it.
pub fn aoa_sweep_links(params: &SystemParams) -> Result<Vec<Link>> {
    let r_s = params.scatter_radius;
    let target = Source::new(
        AngularSupport::wrapped(0.0, spread(r_s, TARGET_DISTANCE)),
        gain(params, TARGET_DISTANCE),
    );
    let beta_i = gain(params, AOA_INTERFERER_DISTANCE);
    let mut links = vec![single_link(BASELINE_SERIES.into(), &target, Vec::new())];
    for mean in AOA_IN_DAR_MEANS_DEG {
        let support =
            AngularSupport::wrapped(mean.to_radians(), spread(r_s, AOA_INTERFERER_DISTANCE));
        links.push(single_link(
            in_dar_series(mean),
            &target,
            vec![Source::new(support, beta_i)],
        ));
    }
    let (lo, hi) = AOA_OUTSIDE_SUPPORT_DEG;
    let outside = AngularSupport::from_bounds(lo.to_radians(), hi.to_radians());
    links.push(single_link(
        outside_series(),
        &target,
        vec![Source::new(outside, beta_i)],
    ));
    Ok(links)
}

/// Scatter radius 100 m; one interferer per (mean angle, distance).
pub fn distance_sweep_links(params: &SystemParams) -> Result<Vec<Link>> {
    let r_s = DISTANCE_SWEEP_SCATTER_RADIUS;
    let target = Source::new(
        AngularSupport::wrapped(0.0, spread(r_s, TARGET_DISTANCE)),
        gain(params, TARGET_DISTANCE),
    );
    let mut links = vec![single_link(BASELINE_SERIES.into(), &target, Vec::new())];
    for mean in DISTANCE_SWEEP_MEANS_DEG {
        for d in DISTANCE_SWEEP_DISTANCES {
            let support = AngularSupport::wrapped(mean.to_radians(), spread(r_s, d));
            links.push(single_link(
                distance_series(mean, d),
                &target,
                vec![Source::new(support, gain(params, d))],
            ));
        }
    }
    Ok(links)
}

/// Two neighboring cells with two users each and two pilots. Users are given
/// by distance (m) and bearing (deg) from the base station named in `from`.
fn two_cells(params: &SystemParams, users: [(usize, f64, f64); 4]) -> Result<Scenario> {
    let params = SystemParams {
        num_pilots: 2,
        ..params.clone()
    };
    // flat-topped neighbor straight above
    let bs = [
        Position::new(0.0, 0.0),
        Position::new(0.0, 3f64.sqrt() * params.cell_radius),
    ];
    let place = |k: usize| {
        let (from, d, deg) = users[k];
        Position::polar(bs[from], d, deg.to_radians())
    };
    Scenario::new(
        vec![
            Cell::new(bs[0], vec![place(0), place(1)]),
            Cell::new(bs[1], vec![place(2), place(3)]),
        ],
        params,
    )
}

/// Cell-1 user 1 sees both second-cell users inside its desired region and
/// prefers user 1, whose bearing is farther from its own. Cell-1 user 2 is
/// only compatible with second-cell user 1. The second cell's users are
/// placed from the first base station.
pub fn greedy_vs_joint_scenario(params: &SystemParams) -> Result<Scenario> {
    two_cells(
        params,
        [
            (0, 500.0, 0.0),
            (0, 500.0, 115.0),
            (0, 1500.0, 65.0),
            (0, 1300.0, 115.0),
        ],
    )
}

/// Pairing cell-1 user 1 with cell-2 user 2 and cell-1 user 2 with cell-2
/// user 1 puts every support inside its partner's desired region at both
/// base stations; the other pairing does not.
pub fn mutual_two_cell_scenario(params: &SystemParams) -> Result<Scenario> {
    two_cells(
        params,
        [
            (0, 600.0, 0.0),
            (0, 600.0, 150.0),
            (1, 600.0, 120.0),
            (1, 600.0, 330.0),
        ],
    )
}

fn file_scenario(config: &ExperimentConfig) -> Option<Scenario> {
    config.scenario.as_ref().map(|f| f.scenario.clone())
}

fn require_pilots(scenario: &Scenario, at_least: usize) -> Result<()> {
    if scenario.params.num_pilots < at_least || scenario.cells.len() < 2 {
        return Err(Error::InvalidExperiment(format!(
            "need at least two cells and {at_least} pilots, got {} cells and {} pilots",
            scenario.cells.len(),
            scenario.params.num_pilots
        )));
    }
    Ok(())
}

/// Greedy and jointly optimal single-cell assignments, each simulated for
/// the target cell's users.
pub fn greedy_vs_joint_links(config: &ExperimentConfig) -> Result<Vec<Link>> {
    let scenario = match file_scenario(config) {
        Some(s) => s,
        None => greedy_vs_joint_scenario(&config.params)?,
    };
    require_pilots(&scenario, 1)?;
    let target = config
        .scenario
        .as_ref()
        .and_then(|f| f.target_cell)
        .unwrap_or(0);
    let problem = build_problem(&scenario, Formulation::SingleCell, target)?;
    let greedy = solve_checked(&problem, Method::Greedy, config.seed)?;
    let joint = solve_checked(&problem, config.method, config.seed)?;
    let mut links = assignment_links(
        &scenario,
        &joint,
        &[target],
        |_| "joint".into(),
        config.method.as_str(),
        true,
    )?;
    links.extend(assignment_links(
        &scenario,
        &greedy,
        &[target],
        |_| "greedy".into(),
        "greedy",
        false,
    )?);
    Ok(links)
}

/// One-user-per-cell-per-pilot assignment, every served user tracked at its
/// own base station.
pub fn mutual_two_cell_links(config: &ExperimentConfig) -> Result<Vec<Link>> {
    let scenario = match file_scenario(config) {
        Some(s) => s,
        None => mutual_two_cell_scenario(&config.params)?,
    };
    require_pilots(&scenario, 1)?;
    let problem = build_problem(&scenario, Formulation::Qos, 0)?;
    let a = solve_checked(&problem, config.method, config.seed)?;
    let all: Vec<usize> = (0..scenario.cells.len()).collect();
    assignment_links(
        &scenario,
        &a,
        &all,
        cell_series,
        config.method.as_str(),
        true,
    )
}

/// Assignment from the scenario file's formulation (default one user per
/// cell per pilot), then every served user of the tracked cells.
pub fn custom_links(config: &ExperimentConfig) -> Result<Vec<Link>> {
    let file = config.scenario.as_ref().ok_or_else(|| {
        Error::InvalidExperiment("the custom experiment needs a scenario file".into())
    })?;
    let formulation = file.formulation.unwrap_or(Formulation::Qos);
    let target = file.target_cell.unwrap_or(0);
    let problem = build_problem(&file.scenario, formulation, target)?;
    let a = solve_checked(&problem, config.method, config.seed)?;
    let tracked: Vec<usize> = match formulation {
        Formulation::SingleCell => vec![target],
        _ => (0..file.scenario.cells.len()).collect(),
    };
    assignment_links(
        &file.scenario,
        &a,
        &tracked,
        cell_series,
        config.method.as_str(),
        true,
    )
}

pub fn cell_series(cell: usize) -> String {
    format!("cell-{}", cell + 1)
}
