//! Uniform-linear-array channel model: steering vectors, multipath channel
//! draws, path-loss gains and location-aided covariance matrices.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::geometry::{AngularSupport, Position, SystemParams};
use crate::quadrature::GaussLegendre;
use crate::{Error, Result};

/// Default Gauss–Legendre nodes per support interval.
pub const DEFAULT_QUAD_NODES: usize = 64;

/// Uniform linear array: element count, element spacing and carrier wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ula {
    pub num_antennas: usize,
    pub spacing: f64,
    pub wavelength: f64,
}

impl Ula {
    pub fn new(num_antennas: usize, spacing: f64, wavelength: f64) -> Self {
        assert!(num_antennas >= 1 && spacing > 0.0 && wavelength > 0.0);
        Self {
            num_antennas,
            spacing,
            wavelength,
        }
    }

    /// Half-wavelength array of `num_antennas` elements.
    pub fn half_wavelength(num_antennas: usize) -> Self {
        Self::new(num_antennas, 0.5, 1.0)
    }

    pub fn from_params(params: &SystemParams) -> Self {
        Self::new(
            params.num_antennas,
            params.antenna_spacing,
            params.wavelength,
        )
    }

    pub fn with_antennas(&self, num_antennas: usize) -> Self {
        Self::new(num_antennas, self.spacing, self.wavelength)
    }

    /// Spacing in wavelengths, `D/λ`.
    pub fn spacing_ratio(&self) -> f64 {
        self.spacing / self.wavelength
    }

    /// Array response `a(θ)`: entry `m` is `exp(-j 2π m (D/λ) cos θ)`, `m = 0..M-1`.
    pub fn steering(&self, theta: f64) -> DVector<Complex64> {
        let phase = -2.0 * PI * self.spacing_ratio() * theta.cos();
        DVector::from_iterator(
            self.num_antennas,
            (0..self.num_antennas).map(|m| Complex64::from_polar(1.0, phase * m as f64)),
        )
    }
}

/// Path-loss constant `α` (linear) anchored by the cell-edge SNR.
pub fn cell_edge_alpha_db(
    snr_db: f64,
    pathloss_exponent: f64,
    cell_radius: f64,
    noise_variance: f64,
) -> f64 {
    snr_db + 10.0 * pathloss_exponent * cell_radius.log10() + 10.0 * noise_variance.log10()
}

pub fn cell_edge_alpha(
    snr_db: f64,
    pathloss_exponent: f64,
    cell_radius: f64,
    noise_variance: f64,
) -> f64 {
    db_to_linear(cell_edge_alpha_db(
        snr_db,
        pathloss_exponent,
        cell_radius,
        noise_variance,
    ))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Large-scale gain `β = α d^-η`.
pub fn large_scale_gain(
    user: Position,
    bs: Position,
    alpha: f64,
    pathloss_exponent: f64,
) -> Result<f64> {
    let d = user.distance_to(&bs);
    if d == 0.0 {
        return Err(Error::CoincidentPositions {
            x: user.x,
            y: user.y,
        });
    }
    Ok(gain_at_distance(d, alpha, pathloss_exponent))
}

pub fn gain_at_distance(distance: f64, alpha: f64, pathloss_exponent: f64) -> f64 {
    alpha * distance.powf(-pathloss_exponent)
}

/// One multipath channel draw, kept together with its paths.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: DVector<Complex64>,
    pub angles: Vec<f64>,
    pub gains: Vec<Complex64>,
}

impl ChannelRealization {
    /// `h = (1/√B) Σ_b a(θ_b) α_b`.
    pub fn from_paths(ula: &Ula, angles: Vec<f64>, gains: Vec<Complex64>) -> Self {
        assert_eq!(angles.len(), gains.len());
        assert!(!angles.is_empty());
        let scale = 1.0 / (angles.len() as f64).sqrt();
        let mut h = DVector::zeros(ula.num_antennas);
        for (&theta, &g) in angles.iter().zip(&gains) {
            h += ula.steering(theta) * (g * scale);
        }
        Self { h, angles, gains }
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }
}

/// Angle drawn uniformly over the union of the support's intervals.
pub fn sample_angle<R: Rng + ?Sized>(support: &AngularSupport, rng: &mut R) -> f64 {
    let total = support.measure();
    if total == 0.0 {
        return support.intervals()[0].lo;
    }
    let mut u = rng.random::<f64>() * total;
    let intervals = support.intervals();
    for iv in &intervals[..intervals.len() - 1] {
        if u < iv.len() {
            return iv.lo + u;
        }
        u -= iv.len();
    }
    let last = intervals[intervals.len() - 1];
    (last.lo + u).min(last.hi)
}

/// Circularly-symmetric complex Gaussian with variance `variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Draws a channel with `num_paths` i.i.d. angles uniform on `support` and
/// i.i.d. `CN(0, beta)` path gains.
pub fn draw_channel<R: Rng + ?Sized>(
    support: &AngularSupport,
    beta: f64,
    num_paths: usize,
    ula: &Ula,
    rng: &mut R,
) -> ChannelRealization {
    let mut angles = Vec::with_capacity(num_paths);
    let mut gains = Vec::with_capacity(num_paths);
    for _ in 0..num_paths {
        angles.push(sample_angle(support, rng));
        gains.push(complex_gaussian(beta, rng));
    }
    ChannelRealization::from_paths(ula, angles, gains)
}

/// Channel covariance matrix together with its large-scale gain.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    pub r: DMatrix<Complex64>,
    pub beta: f64,
}

impl CovarianceMatrix {
    pub fn dim(&self) -> usize {
        self.r.nrows()
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            r: DMatrix::zeros(dim, dim),
            beta: 0.0,
        }
    }

    pub fn trace(&self) -> f64 {
        self.r.diagonal().iter().map(|z| z.re).sum()
    }

    /// `‖R - Rᴴ‖_F / ‖R‖_F`.
    pub fn hermitian_defect(&self) -> f64 {
        let norm = self.r.norm();
        if norm == 0.0 {
            return 0.0;
        }
        (&self.r - self.r.adjoint()).norm() / norm
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.r + self.r.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Rows of interleaved `re,im` pairs.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for row in self.r.row_iter() {
            let line: Vec<String> = row
                .iter()
                .flat_map(|z| [z.re.to_string(), z.im.to_string()])
                .collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Location-aided covariance `β ∫ p(θ) a(θ) a(θ)ᴴ dθ` for `p` uniform on
/// `support`, by composite Gauss–Legendre quadrature with `quad_nodes` nodes
/// per interval.
///
/// The ULA response makes `R` Hermitian Toeplitz, so only the first column is
/// integrated; the diagonal is exactly `β`.
pub fn covariance(
    support: &AngularSupport,
    beta: f64,
    ula: &Ula,
    quad_nodes: usize,
) -> CovarianceMatrix {
    assert!(quad_nodes >= 2, "need at least two quadrature nodes");
    let m = ula.num_antennas;
    let k = 2.0 * PI * ula.spacing_ratio();
    let total = support.measure();
    // first column: c[l] = E[exp(-j k l cos θ)]
    let mut col = vec![Complex64::new(0.0, 0.0); m];
    if total == 0.0 {
        let c = support.intervals()[0].lo.cos();
        for (l, v) in col.iter_mut().enumerate() {
            *v = Complex64::from_polar(1.0, -k * l as f64 * c);
        }
    } else {
        let rule = GaussLegendre::new(quad_nodes);
        for iv in support.intervals() {
            for (theta, w) in rule.on_interval(iv.lo, iv.hi) {
                let weight = w / total;
                let c = theta.cos();
                for (l, v) in col.iter_mut().enumerate().skip(1) {
                    *v += Complex64::from_polar(weight, -k * l as f64 * c);
                }
            }
        }
        col[0] = Complex64::new(1.0, 0.0);
    }
    let r = DMatrix::from_fn(m, m, |i, j| {
        if i >= j {
            col[i - j] * beta
        } else {
            col[j - i].conj() * beta
        }
    });
    CovarianceMatrix { r, beta }
}
