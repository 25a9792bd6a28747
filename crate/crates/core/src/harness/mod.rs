//! Monte Carlo experiment driver.
//!
//! A [`Link`] is one tracked user together with the users sharing its pilot
//! at its base station. For every array size and trial the driver draws the
//! channels, forms the received pilot block, applies the MMSE filter built
//! from the known covariances and records the normalized error in dB.
//!
//! Every (experiment, link key, array size, trial) gets its own RNG stream.
//! The target channel and noise come from one stream and the interferers
//! from another, so series that share a link key see the same target
//! channels and noise.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::angular::utility_matrix;
use crate::assignment::{self, AssignmentProblem, Method, PilotAssignment};
use crate::channel::{
    cell_edge_alpha, covariance, draw_channel, gain_at_distance, large_scale_gain,
    CovarianceMatrix, Ula, DEFAULT_QUAD_NODES,
};
use crate::estimator::{error_db, pilot_set, receive, MmseFilter};
use crate::geometry::{support_at, AngularSupport, Scenario, SystemParams};
use crate::{Error, Result};

pub mod config;
pub mod experiments;
pub mod output;

pub use config::ScenarioFile;
pub use output::{emit_csv, parse_csv, read_csv, write_csv, ResultRow};

pub const DEFAULT_TRIALS: usize = 200;
pub const FULL_TRIALS: usize = 1000;
pub const DEFAULT_SWEEP: [usize; 6] = [2, 5, 10, 20, 35, 50];
/// Local-search budget used when an experiment asks for `local`.
pub const LOCAL_SEARCH_ITERS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    AoaSweep,
    DistanceSweep,
    GreedyVsJoint,
    Mutual2Cell,
    Custom,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::AoaSweep,
        ExperimentKind::DistanceSweep,
        ExperimentKind::GreedyVsJoint,
        ExperimentKind::Mutual2Cell,
        ExperimentKind::Custom,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::AoaSweep => "aoa-sweep",
            ExperimentKind::DistanceSweep => "distance-sweep",
            ExperimentKind::GreedyVsJoint => "greedy-vs-joint",
            ExperimentKind::Mutual2Cell => "mutual-2cell",
            ExperimentKind::Custom => "custom",
        }
    }

    fn id(&self) -> u64 {
        match self {
            ExperimentKind::AoaSweep => 1,
            ExperimentKind::DistanceSweep => 2,
            ExperimentKind::GreedyVsJoint => 3,
            ExperimentKind::Mutual2Cell => 4,
            ExperimentKind::Custom => 5,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidExperiment(format!("unknown experiment '{s}'")))
    }
}

/// Which assignment problem to build from a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formulation {
    /// Every user holds at least one pilot.
    Multicell,
    /// One user per cell per pilot.
    Qos,
    /// Only the target cell's contamination counts.
    SingleCell,
}

impl FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multicell" => Ok(Formulation::Multicell),
            "qos" => Ok(Formulation::Qos),
            "single" => Ok(Formulation::SingleCell),
            other => Err(Error::Unsupported(format!(
                "unknown formulation '{other}' (expected multicell, qos or single)"
            ))),
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formulation::Multicell => "multicell",
            Formulation::Qos => "qos",
            Formulation::SingleCell => "single",
        })
    }
}

/// Builds the assignment problem with `U` evaluated at the scenario's
/// design array size.
pub fn build_problem(
    scenario: &Scenario,
    formulation: Formulation,
    target: usize,
) -> Result<AssignmentProblem> {
    let u = utility_matrix(scenario, &Ula::from_params(&scenario.params))?;
    match formulation {
        Formulation::Multicell => AssignmentProblem::multicell(scenario, &u),
        Formulation::Qos => AssignmentProblem::multicell_qos(scenario, &u),
        Formulation::SingleCell => AssignmentProblem::singlecell(scenario, target, &u),
    }
}

/// Solves and re-checks the constraints independently.
pub fn solve_checked(
    problem: &AssignmentProblem,
    method: Method,
    seed: u64,
) -> Result<PilotAssignment> {
    let a = assignment::solve(problem, method, seed, LOCAL_SEARCH_ITERS)?;
    problem.check(&a.y).map_err(|msg| {
        Error::Infeasible(format!(
            "{method} returned an assignment that violates: {msg}"
        ))
    })?;
    Ok(a)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Scenario file contents; required for the custom experiment.
    pub scenario: Option<ScenarioFile>,
    pub params: SystemParams,
    pub antennas: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Exact solver used where an experiment needs an optimal assignment.
    pub method: Method,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            scenario: None,
            params: SystemParams::default(),
            antennas: DEFAULT_SWEEP.to_vec(),
            trials: DEFAULT_TRIALS,
            seed: 1,
            method: Method::BranchAndBound,
        }
    }

    /// Takes parameters and run settings from a scenario file.
    pub fn with_file(mut self, file: ScenarioFile) -> Self {
        self.params = file.scenario.params.clone();
        if let Some(s) = &file.sweep {
            self.antennas = s.clone();
        }
        if let Some(t) = file.trials {
            self.trials = t;
        }
        if let Some(s) = file.seed {
            self.seed = s;
        }
        if let Some(m) = file.method {
            self.method = m;
        }
        self.scenario = Some(file);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidExperiment(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.antennas.is_empty() {
            return bad("antenna sweep is empty".into());
        }
        if self.antennas.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!(
                "antenna sweep {:?} is not strictly ascending",
                self.antennas
            ));
        }
        if self.antennas[0] < 2 {
            return bad("arrays need at least 2 antennas".into());
        }
        if self.params.num_pilots > self.params.pilot_length {
            return Err(Error::TooManyPilots {
                count: self.params.num_pilots,
                length: self.params.pilot_length,
            });
        }
        if self.experiment == ExperimentKind::Custom && self.scenario.is_none() {
            return bad("the custom experiment needs a scenario file".into());
        }
        Ok(())
    }
}

/// Angular support seen at a base station and the matching large-scale gain.
#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    pub support: AngularSupport,
    pub beta: f64,
}

impl Source {
    pub fn new(support: AngularSupport, beta: f64) -> Self {
        Self { support, beta }
    }

    fn covariance(&self, ula: &Ula) -> CovarianceMatrix {
        covariance(&self.support, self.beta, ula, DEFAULT_QUAD_NODES)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub series: String,
    pub method: String,
    /// 0-based.
    pub pilot: usize,
    pub user: String,
    /// Links with equal keys share target channel and noise draws.
    pub key: u64,
    pub target: Source,
    pub interferers: Vec<Source>,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of an independent stream identified by `parts` under `master`.
pub fn stream_seed(master: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix(master), |h, &p| splitmix(h ^ p))
}

/// Large-scale gain of a user at distance `d` under `params`.
pub fn gain(params: &SystemParams, d: f64) -> f64 {
    let alpha = cell_edge_alpha(
        params.cell_edge_snr_db,
        params.pathloss_exponent,
        params.cell_radius,
        params.noise_variance,
    );
    gain_at_distance(d, alpha, params.pathloss_exponent)
}

/// Per-trial errors (dB) of `link` at `antennas` elements.
pub fn trial_errors(
    link: &Link,
    params: &SystemParams,
    experiment: ExperimentKind,
    seed: u64,
    antennas: usize,
    trials: usize,
) -> Result<Vec<f64>> {
    let ula = Ula::from_params(params).with_antennas(antennas);
    let pilots = pilot_set(params.pilot_length, link.pilot + 1)?;
    let pilot = &pilots[link.pilot];
    let desired = link.target.covariance(&ula);
    let others: Vec<CovarianceMatrix> = link
        .interferers
        .iter()
        .map(|s| s.covariance(&ula))
        .collect();
    let refs: Vec<&CovarianceMatrix> = others.iter().collect();
    let filter = MmseFilter::new(&desired, &refs, params.noise_variance, params.pilot_length)?;

    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let base = [experiment.id(), link.key, antennas as u64, trial as u64];
            let mut main = ChaCha8Rng::seed_from_u64(stream_seed(
                seed,
                &[base[0], base[1], base[2], base[3], 0],
            ));
            let mut side = ChaCha8Rng::seed_from_u64(stream_seed(
                seed,
                &[base[0], base[1], base[2], base[3], 1],
            ));
            let h = draw_channel(
                &link.target.support,
                link.target.beta,
                params.num_paths,
                &ula,
                &mut main,
            );
            let interferers: Vec<_> = link
                .interferers
                .iter()
                .map(|s| draw_channel(&s.support, s.beta, params.num_paths, &ula, &mut side))
                .collect();
            let block = receive(&h, &interferers, pilot, params.noise_variance, &mut main)?;
            error_db(&filter.estimate(&block, pilot)?, &h.h)
        })
        .collect()
}

/// Mean error of every link at every array size, link by link.
pub fn run_links(links: &[Link], config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::with_capacity(links.len() * config.antennas.len());
    for link in links {
        for &m in &config.antennas {
            let errors = trial_errors(
                link,
                &config.params,
                config.experiment,
                config.seed,
                m,
                config.trials,
            )?;
            rows.push(ResultRow {
                experiment: config.experiment.name().to_string(),
                series: link.series.clone(),
                method: link.method.clone(),
                antennas: m,
                pilot: link.pilot + 1,
                user: link.user.clone(),
                trials: errors.len(),
                mean_error_db: errors.iter().sum::<f64>() / errors.len() as f64,
            });
        }
    }
    Ok(rows)
}

/// One link per (pilot, tracked user): the user at its own base station with
/// every other user on that pilot as interferer. `tracked` selects cells.
pub fn assignment_links(
    scenario: &Scenario,
    assignment: &PilotAssignment,
    tracked: &[usize],
    series: impl Fn(usize) -> String,
    method: &str,
    with_baseline: bool,
) -> Result<Vec<Link>> {
    let params = &scenario.params;
    let alpha = cell_edge_alpha(
        params.cell_edge_snr_db,
        params.pathloss_exponent,
        params.cell_radius,
        params.noise_variance,
    );
    let users = scenario.users();
    let num_pilots = assignment.y.first().map_or(0, Vec::len);
    let mut links = Vec::new();
    for p in 0..num_pilots {
        let on = assignment.users_on(p);
        for &t in on.iter().filter(|&&t| tracked.contains(&users[t].cell)) {
            let bs = scenario.cells[users[t].cell].bs;
            let source = |i: usize| -> Result<Source> {
                let pos = users[i].position;
                Ok(Source::new(
                    support_at(pos, bs, params.scatter_radius)?,
                    large_scale_gain(pos, bs, alpha, params.pathloss_exponent)?,
                ))
            };
            let target = source(t)?;
            let interferers = on
                .iter()
                .filter(|&&j| j != t)
                .map(|&j| source(j))
                .collect::<Result<Vec<_>>>()?;
            let key = t as u64;
            if with_baseline {
                links.push(Link {
                    series: experiments::BASELINE_SERIES.into(),
                    method: "none".into(),
                    pilot: p,
                    user: users[t].label(),
                    key,
                    target: target.clone(),
                    interferers: Vec::new(),
                });
            }
            links.push(Link {
                series: series(users[t].cell),
                method: method.to_string(),
                pilot: p,
                user: users[t].label(),
                key,
                target,
                interferers,
            });
        }
    }
    Ok(links)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let links = match config.experiment {
        ExperimentKind::AoaSweep => experiments::aoa_sweep_links(&config.params)?,
        ExperimentKind::DistanceSweep => experiments::distance_sweep_links(&config.params)?,
        ExperimentKind::GreedyVsJoint => experiments::greedy_vs_joint_links(config)?,
        ExperimentKind::Mutual2Cell => experiments::mutual_two_cell_links(config)?,
        ExperimentKind::Custom => experiments::custom_links(config)?,
    };
    run_links(&links, config)
}
