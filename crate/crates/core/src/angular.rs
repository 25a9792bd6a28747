//! Finite-array interference analysis.
//!
//! All angles here are in the frame of a target user `i`: its mean AoA is the
//! zero axis, so its own support is `[0, θδ] ∪ [π - θδ, π]`. The array gain
//! between a path at `θ` and a probe direction `φ` is the Dirichlet kernel
//! [`cost_j`]; its zeros bound the *desired angular region* (DAR) in which
//! an interferer's support causes little contamination.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::channel::{covariance, CovarianceMatrix, Ula, DEFAULT_QUAD_NODES};
use crate::geometry::{angular_spread, support_wrt, AngularSupport, Scenario, UserRef};
use crate::{Error, Result};

/// Grid points used by [`true_cost`].
pub const TRUE_COST_GRID: usize = 512;

/// `|Σ_{m=1}^{M} exp(2πj (m-1) (D/λ)(cos φ - cos θ))|` via the closed form
/// `|sin(π M x) / sin(π x)|`, with the limit `M` at grating lobes.
pub fn cost_j(theta: f64, phi: f64, ula: &Ula) -> f64 {
    let x = ula.spacing_ratio() * (phi.cos() - theta.cos());
    let m = ula.num_antennas as f64;
    if (x - x.round()).abs() < 1e-12 {
        return m;
    }
    ((PI * m * x).sin() / (PI * x).sin()).abs()
}

/// `(1/M) a(φ)ᴴ R a(φ)`, the interference seen along direction `φ` by a user
/// with covariance `R`.
pub fn interference_metric(phi: f64, cov: &CovarianceMatrix, ula: &Ula) -> f64 {
    assert_eq!(
        cov.dim(),
        ula.num_antennas,
        "covariance and array size differ"
    );
    let a = ula.steering(phi);
    let q = a.dotc(&(&cov.r * &a));
    (q.re / ula.num_antennas as f64).max(0.0)
}

/// All `φ ∈ [0, π]` with `cos φ = cos θ + z λ/(M D)`, `z ∈ ℤ` not a multiple
/// of `M` (those reproduce `θ` itself or a grating lobe), sorted ascending.
pub fn zeros_of_j(theta: f64, ula: &Ula) -> Vec<f64> {
    let m = ula.num_antennas as i64;
    assert!(m >= 2, "zeros need at least two antennas");
    let step = 1.0 / (ula.num_antennas as f64 * ula.spacing_ratio());
    let c0 = theta.cos();
    let tol = 1e-12;
    let z_lo = ((-1.0 - c0) / step - tol).ceil() as i64;
    let z_hi = ((1.0 - c0) / step + tol).floor() as i64;
    let mut out: Vec<f64> = (z_lo..=z_hi)
        .filter(|z| z % m != 0)
        .map(|z| (c0 + z as f64 * step).clamp(-1.0, 1.0).acos())
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Desired angular region `[ψ_min, ψ_max]` of a user with angular spread `θδ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesiredAngularRegion {
    pub psi_min: f64,
    pub psi_max: f64,
    pub theta_delta: f64,
    pub antennas: usize,
}

impl DesiredAngularRegion {
    pub fn contains(&self, phi: f64) -> bool {
        self.psi_min <= phi && phi <= self.psi_max
    }

    /// Width measured in the cosine domain.
    pub fn cos_width(&self) -> f64 {
        self.psi_min.cos() - self.psi_max.cos()
    }
}

/// Builds the DAR from the zeros of `J(θδ, ·)` and `J(π - θδ, ·)` that fall
/// strictly between the two edges of the user's own support.
pub fn dar(theta_delta: f64, ula: &Ula) -> Result<DesiredAngularRegion> {
    assert!(
        theta_delta > 0.0 && theta_delta < PI / 2.0,
        "angular spread {theta_delta} outside (0, π/2)"
    );
    let no_dar = || Error::NoDesiredRegion {
        antennas: ula.num_antennas,
        spread: theta_delta,
    };
    let inside = |phi: &f64| *phi > theta_delta + 1e-12 && *phi < PI - theta_delta - 1e-12;
    let lower: Vec<f64> = zeros_of_j(theta_delta, ula)
        .into_iter()
        .filter(inside)
        .collect();
    let upper: Vec<f64> = zeros_of_j(PI - theta_delta, ula)
        .into_iter()
        .filter(inside)
        .collect();
    if lower.is_empty() || upper.is_empty() {
        return Err(no_dar());
    }
    // both lists are sorted ascending
    let psi_min = lower[0].max(upper[0]);
    let psi_max = lower[lower.len() - 1].min(upper[upper.len() - 1]);
    if psi_min >= psi_max {
        return Err(no_dar());
    }
    Ok(DesiredAngularRegion {
        psi_min,
        psi_max,
        theta_delta,
        antennas: ula.num_antennas,
    })
}

/// `max_{θ ∈ support} J(θ, φ)` over a grid of at least [`TRUE_COST_GRID`] points.
pub fn true_cost(phi: f64, support: &AngularSupport, ula: &Ula) -> f64 {
    true_cost_with_grid(phi, support, ula, TRUE_COST_GRID)
}

pub fn true_cost_with_grid(phi: f64, support: &AngularSupport, ula: &Ula, grid: usize) -> f64 {
    let total = support.measure();
    let mut best: f64 = 0.0;
    for iv in support.intervals() {
        let n = if total > 0.0 {
            ((grid as f64 * iv.len() / total).ceil() as usize).max(2)
        } else {
            1
        };
        for k in 0..n {
            let t = if n == 1 {
                0.0
            } else {
                k as f64 / (n - 1) as f64
            };
            best = best.max(cost_j(iv.lo + t * iv.len(), phi, ula));
        }
    }
    best
}

/// Piecewise-linear approximation of the normalized combined cost, evaluated
/// in the `cos φ` domain: 1 beyond `±cos θδ`, 0 on the DAR, linear ramps in
/// between.
pub fn approx_cost(phi: f64, dar: &DesiredAngularRegion) -> f64 {
    let c = phi.cos();
    let edge = dar.theta_delta.cos();
    let c_min = dar.psi_min.cos();
    let c_max = dar.psi_max.cos();
    if c >= edge || c <= -edge {
        1.0
    } else if c >= c_min {
        ((c - c_min) / (edge - c_min)).clamp(0.0, 1.0)
    } else if c <= c_max {
        (1.0 - (c + edge) / (c_max + edge)).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Interference cost of an interferer whose support (already rotated into the
/// target's frame) is `interferer`: the approximate cost at the two extreme
/// endpoints of the support, summed. Lies in `[0, 2]`.
pub fn pair_cost(dar: &DesiredAngularRegion, interferer: &AngularSupport) -> f64 {
    approx_cost(interferer.lower(), dar) + approx_cost(interferer.upper(), dar)
}

/// Pairwise interference costs `U[i][j]`: the cost user `j` imposes on user
/// `i` at `i`'s serving base station. Zero on the diagonal, not symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityMatrix {
    pub values: DMatrix<f64>,
    pub users: Vec<UserRef>,
}

impl UtilityMatrix {
    /// Wraps a raw matrix; users are labelled as a single cell.
    pub fn from_matrix(values: DMatrix<f64>) -> Self {
        assert!(values.is_square());
        let users = (0..values.nrows())
            .map(|k| UserRef {
                global: k,
                cell: 0,
                local: k,
                position: crate::geometry::Position::new(0.0, 0.0),
            })
            .collect();
        Self { values, users }
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }
}

/// DAR of `user` at its serving BS.
pub fn user_dar(scenario: &Scenario, user: &UserRef, ula: &Ula) -> Result<DesiredAngularRegion> {
    let bs = scenario.cells[user.cell].bs;
    let spread = angular_spread(user.position, bs, scenario.params.scatter_radius)?;
    dar(spread, ula)
}

/// Cost user `j` imposes on user `i` at `i`'s serving BS.
pub fn pair_cost_in(scenario: &Scenario, i: &UserRef, j: &UserRef, ula: &Ula) -> Result<f64> {
    let target_dar = user_dar(scenario, i, ula)?;
    let bs = scenario.cells[i.cell].bs;
    let support = support_wrt(j.position, bs, i.position, scenario.params.scatter_radius)?;
    Ok(pair_cost(&target_dar, &support))
}

pub fn utility_matrix(scenario: &Scenario, ula: &Ula) -> Result<UtilityMatrix> {
    let users = scenario.users();
    let n = users.len();
    let r_s = scenario.params.scatter_radius;
    let mut values = DMatrix::zeros(n, n);
    for i in &users {
        let target_dar = user_dar(scenario, i, ula)?;
        let bs = scenario.cells[i.cell].bs;
        for j in users.iter().filter(|j| j.global != i.global) {
            let support = support_wrt(j.position, bs, i.position, r_s)?;
            values[(i.global, j.global)] = pair_cost(&target_dar, &support);
        }
    }
    Ok(UtilityMatrix { values, users })
}

/// One sample of the cost curves around a user's own support, for plotting.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DarProfileRow {
    pub cos_phi: f64,
    pub j_lower_edge: f64,
    pub j_upper_edge: f64,
    pub j_true: f64,
    pub j_approx: f64,
}

/// Samples `J(θδ, φ)`, `J(π - θδ, φ)`, `J^True` and `J^Apprx` on `points`
/// equally spaced values of `cos φ ∈ [-1, 1]`.
pub fn dar_profile(
    theta_delta: f64,
    ula: &Ula,
    points: usize,
) -> Result<(DesiredAngularRegion, Vec<DarProfileRow>)> {
    assert!(points >= 2);
    let region = dar(theta_delta, ula)?;
    let own = AngularSupport::wrapped(0.0, theta_delta);
    let rows = (0..points)
        .map(|k| {
            let cos_phi = -1.0 + 2.0 * k as f64 / (points - 1) as f64;
            let phi = cos_phi.acos();
            DarProfileRow {
                cos_phi,
                j_lower_edge: cost_j(theta_delta, phi, ula),
                j_upper_edge: cost_j(PI - theta_delta, phi, ula),
                j_true: true_cost(phi, &own, ula),
                j_approx: approx_cost(phi, &region),
            }
        })
        .collect();
    Ok((region, rows))
}

/// Covariance of a user's own support in its frame, `[0, θδ] ∪ [π-θδ, π]`.
pub fn own_covariance(theta_delta: f64, beta: f64, ula: &Ula) -> CovarianceMatrix {
    covariance(
        &AngularSupport::wrapped(0.0, theta_delta),
        beta,
        ula,
        DEFAULT_QUAD_NODES,
    )
}
