//! Cell layout, positions and angle-of-arrival bookkeeping.
//!
//! Angles live canonically in `[0, π)`: a bearing and its mod-π image are
//! treated as the same direction at a base station. Angular supports are
//! stored as a union of at most two closed intervals inside `[0, π]`, which
//! keeps overlap and containment tests trivial.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Point at `distance` meters from `origin` along `bearing` radians.
    pub fn polar(origin: Position, distance: f64, bearing: f64) -> Self {
        Self::new(
            origin.x + distance * bearing.cos(),
            origin.y + distance * bearing.sin(),
        )
    }

    pub fn distance_to(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Mean angle of arrival of `user` at `bs`, folded into `[0, π)`.
pub fn mean_aoa(user: Position, bs: Position) -> Result<f64> {
    let dx = user.x - bs.x;
    let dy = user.y - bs.y;
    if dx == 0.0 && dy == 0.0 {
        return Err(Error::CoincidentPositions {
            x: user.x,
            y: user.y,
        });
    }
    Ok(wrap_pi(dy.atan2(dx)))
}

/// Half-width of the angle-of-arrival support induced by a scattering ring of
/// radius `scatter_radius` around the user.
pub fn angular_spread(user: Position, bs: Position, scatter_radius: f64) -> Result<f64> {
    let distance = user.distance_to(&bs);
    if distance == 0.0 {
        return Err(Error::CoincidentPositions {
            x: user.x,
            y: user.y,
        });
    }
    if scatter_radius >= distance {
        return Err(Error::ScatterRingEnclosesBs {
            scatter_radius,
            distance,
        });
    }
    Ok((scatter_radius / distance).asin())
}

/// Rotation operator: `mod(angle - pivot, π)`, in `[0, π)`.
pub fn rotate(angle: f64, pivot: f64) -> f64 {
    wrap_pi(angle - pivot)
}

fn wrap_pi(angle: f64) -> f64 {
    let r = angle.rem_euclid(PI);
    // rem_euclid can round up to exactly π for tiny negative inputs
    if r >= PI {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, angle: f64) -> bool {
        self.lo <= angle && angle <= self.hi
    }
}

/// Angle-of-arrival support `[mean - spread, mean + spread]` wrapped into `[0, π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularSupport {
    intervals: Vec<Interval>,
    mean: f64,
    spread: f64,
}

impl AngularSupport {
    /// Builds the support around `mean` (any real angle, reduced mod π) with
    /// half-width `spread`, which must lie in `[0, π/2)`.
    pub fn wrapped(mean: f64, spread: f64) -> Self {
        assert!(
            (0.0..PI / 2.0).contains(&spread),
            "angular spread {spread} outside [0, π/2)"
        );
        let mean = wrap_pi(mean);
        let lo = mean - spread;
        let hi = mean + spread;
        let intervals = if lo < 0.0 {
            vec![
                Interval { lo: 0.0, hi },
                Interval {
                    lo: lo + PI,
                    hi: PI,
                },
            ]
        } else if hi > PI {
            vec![
                Interval {
                    lo: 0.0,
                    hi: hi - PI,
                },
                Interval { lo, hi: PI },
            ]
        } else {
            vec![Interval { lo, hi }]
        };
        Self {
            intervals,
            mean,
            spread,
        }
    }

    /// Support between two bounds given in either order (radians, before
    /// wrapping).
    pub fn from_bounds(a: f64, b: f64) -> Self {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        Self::wrapped(0.5 * (lo + hi), 0.5 * (hi - lo))
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn spread(&self) -> f64 {
        self.spread
    }

    pub fn is_wrapped(&self) -> bool {
        self.intervals.len() == 2
    }

    /// Total angular measure; equals `2 * spread`.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::len).sum()
    }

    /// Smallest angle of the union.
    pub fn lower(&self) -> f64 {
        self.intervals[0].lo
    }

    /// Largest angle of the union.
    pub fn upper(&self) -> f64 {
        self.intervals[self.intervals.len() - 1].hi
    }

    pub fn contains(&self, angle: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(angle))
    }

    /// Same support expressed in the frame whose zero axis is `pivot`.
    pub fn rotated(&self, pivot: f64) -> Self {
        Self::wrapped(rotate(self.mean, pivot), self.spread)
    }
}

/// Support of `user` at `bs` in the frame of `pivot_user` (whose mean AoA at
/// `bs` becomes the zero axis).
pub fn support_wrt(
    user: Position,
    bs: Position,
    pivot_user: Position,
    scatter_radius: f64,
) -> Result<AngularSupport> {
    let pivot = mean_aoa(pivot_user, bs)?;
    let spread = angular_spread(user, bs, scatter_radius)?;
    let mean = mean_aoa(user, bs)?;
    Ok(AngularSupport::wrapped(rotate(mean, pivot), spread))
}

/// Support of `user` at `bs` in the base station's own frame.
pub fn support_at(user: Position, bs: Position, scatter_radius: f64) -> Result<AngularSupport> {
    let spread = angular_spread(user, bs, scatter_radius)?;
    Ok(AngularSupport::wrapped(mean_aoa(user, bs)?, spread))
}

/// Base-station positions of a flat-topped hexagonal layout with `num_rings`
/// rings around a center cell at the origin. Inter-site distance is `√3 R`.
pub fn hex_layout(num_rings: usize, cell_radius: f64) -> Vec<Position> {
    // axial coordinates for flat-topped hexagons
    const DIRECTIONS: [(i64, i64); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];
    let to_xy = |q: i64, r: i64| {
        Position::new(
            1.5 * cell_radius * q as f64,
            SQRT_3 * cell_radius * (r as f64 + 0.5 * q as f64),
        )
    };

    let mut out = vec![Position::new(0.0, 0.0)];
    for ring in 1..=num_rings as i64 {
        let (mut q, mut r) = (DIRECTIONS[4].0 * ring, DIRECTIONS[4].1 * ring);
        for (dq, dr) in DIRECTIONS {
            for _ in 0..ring {
                out.push(to_xy(q, r));
                q += dq;
                r += dr;
            }
        }
    }
    out
}

/// Point-in-hexagon test for a flat-topped hexagon of circumradius `cell_radius`.
pub fn in_hexagon(point: Position, center: Position, cell_radius: f64) -> bool {
    let dx = (point.x - center.x).abs();
    let dy = (point.y - center.y).abs();
    let eps = 1e-9 * cell_radius;
    dy <= 0.5 * SQRT_3 * cell_radius + eps && SQRT_3 * dx + dy <= SQRT_3 * cell_radius + eps
}

/// Rejection-sampled uniform user positions inside the hexagonal cell.
pub fn place_users_uniform(
    center: Position,
    cell_radius: f64,
    count: usize,
    seed: u64,
) -> Vec<Position> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half_height = 0.5 * SQRT_3 * cell_radius;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = Position::new(
            center.x + rng.random_range(-cell_radius..=cell_radius),
            center.y + rng.random_range(-half_height..=half_height),
        );
        if in_hexagon(p, center, cell_radius) {
            out.push(p);
        }
    }
    out
}

/// Propagation and array constants shared by every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub cell_radius: f64,
    pub scatter_radius: f64,
    pub pathloss_exponent: f64,
    pub wavelength: f64,
    pub antenna_spacing: f64,
    pub num_antennas: usize,
    pub noise_variance: f64,
    pub cell_edge_snr_db: f64,
    pub num_paths: usize,
    pub pilot_length: usize,
    pub num_pilots: usize,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            cell_radius: 1000.0,
            scatter_radius: 50.0,
            pathloss_exponent: 2.5,
            wavelength: 0.1,
            antenna_spacing: 0.05,
            num_antennas: 10,
            noise_variance: 0.001,
            cell_edge_snr_db: 20.0,
            num_paths: 50,
            pilot_length: 10,
            num_pilots: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub bs: Position,
    pub users: Vec<Position>,
    /// Surrounding cells; `None` means "derive from BS spacing".
    pub neighbors: Option<Vec<usize>>,
}

impl Cell {
    pub fn new(bs: Position, users: Vec<Position>) -> Self {
        Self {
            bs,
            users,
            neighbors: None,
        }
    }
}

/// A user addressed both globally and by (cell, index within cell).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserRef {
    pub global: usize,
    pub cell: usize,
    pub local: usize,
    pub position: Position,
}

impl UserRef {
    pub fn label(&self) -> String {
        format!("c{}u{}", self.cell + 1, self.local + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub cells: Vec<Cell>,
    pub params: SystemParams,
}

impl Scenario {
    pub fn new(cells: Vec<Cell>, params: SystemParams) -> Result<Self> {
        let scenario = Self { cells, params };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        let invalid = |msg: String| Err(Error::InvalidScenario(msg));
        if p.num_antennas < 2 {
            return invalid(format!("need at least 2 antennas, got {}", p.num_antennas));
        }
        if p.num_paths < 1 {
            return invalid("need at least one path".into());
        }
        if p.num_pilots < 1 || p.pilot_length < p.num_pilots {
            return invalid(format!(
                "{} orthogonal pilots do not fit in length {}",
                p.num_pilots, p.pilot_length
            ));
        }
        if !(p.cell_radius > 0.0) || !(p.pathloss_exponent > 0.0) {
            return invalid("cell radius and path-loss exponent must be positive".into());
        }
        if !(p.wavelength > 0.0) || !(p.antenna_spacing > 0.0) || !(p.noise_variance >= 0.0) {
            return invalid("wavelength and spacing must be positive, noise non-negative".into());
        }
        if !(p.scatter_radius >= 0.0) {
            return invalid("scatter radius must be non-negative".into());
        }
        for (c, cell) in self.cells.iter().enumerate() {
            if !cell.bs.is_finite() || cell.users.iter().any(|u| !u.is_finite()) {
                return invalid(format!("cell {c} has non-finite coordinates"));
            }
            if let Some(nb) = &cell.neighbors {
                if let Some(&bad) = nb.iter().find(|&&n| n >= self.cells.len() || n == c) {
                    return invalid(format!("cell {c} lists invalid neighbor {bad}"));
                }
            }
        }
        for user in self.users() {
            for cell in &self.cells {
                let d = user.position.distance_to(&cell.bs);
                if p.scatter_radius >= d {
                    return invalid(format!(
                        "user {} is {d:.3} m from a BS, not farther than r_s = {}",
                        user.label(),
                        p.scatter_radius
                    ));
                }
            }
        }
        Ok(())
    }

    /// Users in global order: cell by cell, then by index within the cell.
    pub fn users(&self) -> Vec<UserRef> {
        let mut out = Vec::new();
        for (cell, c) in self.cells.iter().enumerate() {
            for (local, &position) in c.users.iter().enumerate() {
                out.push(UserRef {
                    global: out.len(),
                    cell,
                    local,
                    position,
                });
            }
        }
        out
    }

    pub fn num_users(&self) -> usize {
        self.cells.iter().map(|c| c.users.len()).sum()
    }

    /// Global user indices grouped by cell.
    pub fn cell_members(&self) -> Vec<Vec<usize>> {
        let mut next = 0;
        self.cells
            .iter()
            .map(|c| {
                let ids = (next..next + c.users.len()).collect();
                next += c.users.len();
                ids
            })
            .collect()
    }

    /// Surrounding cells of `cell`: explicit list when given, otherwise every
    /// cell whose BS is within one inter-site distance.
    pub fn neighbors(&self, cell: usize) -> Vec<usize> {
        if let Some(nb) = &self.cells[cell].neighbors {
            return nb.clone();
        }
        let reach = SQRT_3 * self.params.cell_radius * (1.0 + 1e-6);
        let bs = self.cells[cell].bs;
        (0..self.cells.len())
            .filter(|&k| k != cell && self.cells[k].bs.distance_to(&bs) <= reach)
            .collect()
    }
}
