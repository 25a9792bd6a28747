//! Uplink pilot reception and MMSE channel estimation.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;
use rand::Rng;

use crate::channel::{complex_gaussian, ChannelRealization, CovarianceMatrix};
use crate::{Error, Result};

/// Value reported by [`error_db`] when the estimate is exact (or closer than this).
pub const ERROR_DB_FLOOR: f64 = -300.0;

/// Unit-modulus pilot sequence of length τ, so that `sᴴs = τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotSequence(pub DVector<Complex64>);

impl PilotSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &DVector<Complex64> {
        &self.0
    }
}

/// The first `count` columns of the τ-point DFT matrix (unit-modulus entries).
pub fn pilot_set(length: usize, count: usize) -> Result<Vec<PilotSequence>> {
    if count > length {
        return Err(Error::TooManyPilots { count, length });
    }
    Ok((0..count)
        .map(|p| {
            PilotSequence(DVector::from_iterator(
                length,
                (0..length).map(|t| {
                    Complex64::from_polar(
                        1.0,
                        -2.0 * PI * ((p * t) % length) as f64 / length as f64,
                    )
                }),
            ))
        })
        .collect())
}

/// Received `M × τ` pilot block at a base station.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedBlock(pub DMatrix<Complex64>);

impl ReceivedBlock {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    /// De-spread `Y s*`, equal to `(s ⊗ I)ᴴ vec(Y)`.
    pub fn despread(&self, pilot: &PilotSequence) -> Result<DVector<Complex64>> {
        if self.0.ncols() != pilot.len() {
            return Err(Error::DimensionMismatch(format!(
                "block has {} columns, pilot has length {}",
                self.0.ncols(),
                pilot.len()
            )));
        }
        Ok(&self.0 * pilot.0.conjugate())
    }
}

/// `Y = (h_desired + Σ h_interferer) sᵀ + N` with i.i.d. `CN(0, σ²)` noise.
pub fn receive<R: Rng + ?Sized>(
    desired: &ChannelRealization,
    interferers: &[ChannelRealization],
    pilot: &PilotSequence,
    noise_variance: f64,
    rng: &mut R,
) -> Result<ReceivedBlock> {
    let m = desired.len();
    let mut sum = desired.h.clone();
    for (k, ch) in interferers.iter().enumerate() {
        if ch.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "interferer {k} has {} antennas, desired channel has {m}",
                ch.len()
            )));
        }
        sum += &ch.h;
    }
    let mut y = &sum * pilot.0.transpose();
    if noise_variance > 0.0 {
        for v in y.iter_mut() {
            *v += complex_gaussian(noise_variance, rng);
        }
    }
    Ok(ReceivedBlock(y))
}

/// Linear MMSE filter `R_d (σ² I + τ (R_d + Σ R_j))⁻¹` kept in factored form so
/// it can be applied to many de-spread observations.
#[derive(Debug, Clone)]
pub struct MmseFilter {
    desired: DMatrix<Complex64>,
    factor: Cholesky<Complex64, Dyn>,
}

impl MmseFilter {
    pub fn new(
        desired: &CovarianceMatrix,
        interferers: &[&CovarianceMatrix],
        noise_variance: f64,
        pilot_length: usize,
    ) -> Result<Self> {
        let m = desired.dim();
        let mut total = desired.r.clone();
        for (k, r) in interferers.iter().enumerate() {
            if r.dim() != m {
                return Err(Error::DimensionMismatch(format!(
                    "interferer covariance {k} is {}x{}, desired is {m}x{m}",
                    r.dim(),
                    r.dim()
                )));
            }
            total += &r.r;
        }
        let mut system = total * Complex64::new(pilot_length as f64, 0.0);
        for i in 0..m {
            system[(i, i)] += noise_variance;
        }
        // symmetrize away quadrature round-off before factoring
        let system = (&system + system.adjoint()) * Complex64::new(0.5, 0.0);
        let factor = Cholesky::new(system).ok_or(Error::SingularSystem)?;
        if noise_variance == 0.0 {
            // without noise loading a rank-deficient prior factors only by round-off
            let diag: Vec<f64> = factor
                .l_dirty()
                .diagonal()
                .iter()
                .map(|z| z.norm_sqr())
                .collect();
            let max = diag.iter().cloned().fold(0.0, f64::max);
            if diag.iter().any(|&d| d <= 1e-12 * max) {
                return Err(Error::SingularSystem);
            }
        }
        Ok(Self {
            desired: desired.r.clone(),
            factor,
        })
    }

    /// Applies the filter to a de-spread observation `Y s*`.
    pub fn apply(&self, despread: &DVector<Complex64>) -> DVector<Complex64> {
        &self.desired * self.factor.solve(despread)
    }

    pub fn estimate(
        &self,
        block: &ReceivedBlock,
        pilot: &PilotSequence,
    ) -> Result<DVector<Complex64>> {
        let z = block.despread(pilot)?;
        if z.len() != self.desired.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "block has {} antennas, filter expects {}",
                z.len(),
                self.desired.nrows()
            )));
        }
        Ok(self.apply(&z))
    }
}

/// MMSE estimate of the desired channel accounting for co-pilot interferers.
pub fn mmse_estimate(
    desired: &CovarianceMatrix,
    interferers: &[&CovarianceMatrix],
    block: &ReceivedBlock,
    pilot: &PilotSequence,
    noise_variance: f64,
) -> Result<DVector<Complex64>> {
    MmseFilter::new(desired, interferers, noise_variance, pilot.len())?.estimate(block, pilot)
}

/// MMSE estimate that ignores interference.
pub fn mmse_estimate_no_interference(
    desired: &CovarianceMatrix,
    block: &ReceivedBlock,
    pilot: &PilotSequence,
    noise_variance: f64,
) -> Result<DVector<Complex64>> {
    mmse_estimate(desired, &[], block, pilot, noise_variance)
}

/// Least-squares de-spread `Y s* / τ`.
pub fn ls_estimate(block: &ReceivedBlock, pilot: &PilotSequence) -> Result<DVector<Complex64>> {
    Ok(block.despread(pilot)? / Complex64::new(pilot.len() as f64, 0.0))
}

/// Normalized estimation error `10 log10(‖ĥ - h‖² / ‖h‖²)`, floored at
/// [`ERROR_DB_FLOOR`].
pub fn error_db(estimate: &DVector<Complex64>, truth: &DVector<Complex64>) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "estimate has {} entries, truth has {}",
            estimate.len(),
            truth.len()
        )));
    }
    let energy = truth.norm_squared();
    if energy == 0.0 {
        return Err(Error::ZeroChannel);
    }
    let ratio = (estimate - truth).norm_squared() / energy;
    if ratio == 0.0 {
        return Ok(ERROR_DB_FLOOR);
    }
    Ok((10.0 * ratio.log10()).max(ERROR_DB_FLOOR))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{covariance, Ula, DEFAULT_QUAD_NODES};
    use crate::geometry::AngularSupport;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cvec(v: &[(f64, f64)]) -> DVector<Complex64> {
        DVector::from_iterator(v.len(), v.iter().map(|&(a, b)| Complex64::new(a, b)))
    }

    fn realization(h: DVector<Complex64>) -> ChannelRealization {
        ChannelRealization {
            h,
            angles: vec![],
            gains: vec![],
        }
    }

    #[test]
    fn pilots_are_orthogonal() {
        let pilots = pilot_set(10, 2).unwrap();
        let s1 = pilots[0].symbols();
        let s2 = pilots[1].symbols();
        assert!(s1.dotc(s2).norm() <= 1e-12);
        assert_abs_diff_eq!(s1.dotc(s1).re, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s2.dotc(s2).re, 10.0, epsilon = 1e-12);
        let single = pilot_set(1, 1).unwrap();
        assert_eq!(single[0].symbols()[0], Complex64::new(1.0, 0.0));
        assert!(matches!(pilot_set(3, 4), Err(Error::TooManyPilots { .. })));
        let all = pilot_set(7, 7).unwrap();
        for a in &all {
            for b in &all {
                let ip = a.symbols().dotc(b.symbols()).norm();
                if a == b {
                    assert_abs_diff_eq!(ip, 7.0, epsilon = 1e-12);
                } else {
                    assert!(ip < 1e-12);
                }
            }
        }
    }

    #[test]
    fn noiseless_block_is_rank_one() {
        let pilot = &pilot_set(4, 2).unwrap()[1];
        let h = cvec(&[(1.0, 0.5), (-0.2, 0.3), (0.0, -1.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let y = receive(&realization(h.clone()), &[], pilot, 0.0, &mut rng).unwrap();
        assert_eq!(y.matrix().shape(), (3, 4));
        assert!((y.matrix() - &h * pilot.symbols().transpose()).norm() < 1e-15);
        assert_eq!(y.matrix().rank(1e-9), 1);
        // de-spread of a noiseless block is τ h
        let z = y.despread(pilot).unwrap();
        assert!((z - &h * Complex64::new(4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn noise_has_requested_variance() {
        let pilot = &pilot_set(10, 1).unwrap()[0];
        let h = DVector::zeros(10_000);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y = receive(&realization(h), &[], pilot, 0.001, &mut rng).unwrap();
        let var = y.matrix().iter().map(|z| z.norm_sqr()).sum::<f64>() / 100_000.0;
        assert!((var / 0.001 - 1.0).abs() < 0.03, "variance {var}");
    }

    #[test]
    fn received_block_is_linear_in_channels() {
        let pilot = &pilot_set(3, 1).unwrap()[0];
        let d = cvec(&[(1.0, 0.0), (0.0, 1.0)]);
        let a = cvec(&[(0.5, 0.5), (2.0, 0.0)]);
        let b = cvec(&[(-1.0, 0.25), (0.0, -3.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let both = receive(
            &realization(d.clone()),
            &[realization(a.clone()), realization(b.clone())],
            pilot,
            0.0,
            &mut rng,
        )
        .unwrap();
        let sum = &d + &a + &b;
        assert!((both.matrix() - sum * pilot.symbols().transpose()).norm() < 1e-14);
        let bad = receive(
            &realization(d),
            &[realization(cvec(&[(1.0, 0.0)]))],
            pilot,
            0.0,
            &mut rng,
        );
        assert!(matches!(bad, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn zero_prior_gives_zero_estimate() {
        let pilot = &pilot_set(4, 1).unwrap()[0];
        let zero = CovarianceMatrix::zeros(3);
        let block = ReceivedBlock(DMatrix::from_element(3, 4, Complex64::new(1.0, -1.0)));
        let est = mmse_estimate_no_interference(&zero, &block, pilot, 0.1).unwrap();
        assert_eq!(est.norm(), 0.0);
    }

    #[test]
    fn vanishing_noise_recovers_channel() {
        let ula = Ula::half_wavelength(4);
        // wide support keeps the covariance well conditioned
        let r = covariance(
            &AngularSupport::wrapped(1.0, 1.2),
            1.0,
            &ula,
            DEFAULT_QUAD_NODES,
        );
        let pilot = &pilot_set(5, 1).unwrap()[0];
        let h = cvec(&[(0.3, 0.1), (-0.4, 0.8), (1.0, 0.0), (0.2, -0.6)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let y = receive(&realization(h.clone()), &[], pilot, 0.0, &mut rng).unwrap();
        let est = mmse_estimate_no_interference(&r, &y, pilot, 1e-12).unwrap();
        assert!((est - &h).norm() / h.norm() < 1e-6);
    }

    #[test]
    fn singular_system_is_reported() {
        let ula = Ula::half_wavelength(4);
        let r = covariance(
            &AngularSupport::wrapped(1.0, 0.0),
            1.0,
            &ula,
            DEFAULT_QUAD_NODES,
        );
        let pilot = &pilot_set(2, 1).unwrap()[0];
        let block = ReceivedBlock(DMatrix::zeros(4, 2));
        assert!(matches!(
            mmse_estimate(&r, &[], &block, pilot, 0.0),
            Err(Error::SingularSystem)
        ));
    }

    #[test]
    fn huge_noise_shrinks_estimate() {
        let ula = Ula::half_wavelength(4);
        let r = covariance(
            &AngularSupport::wrapped(1.0, 0.2),
            1.0,
            &ula,
            DEFAULT_QUAD_NODES,
        );
        let pilot = &pilot_set(2, 1).unwrap()[0];
        let block = ReceivedBlock(DMatrix::from_element(4, 2, Complex64::new(1.0, 0.0)));
        let est = mmse_estimate_no_interference(&r, &block, pilot, 1e12).unwrap();
        assert!(est.norm() < 1e-9);
    }

    #[test]
    fn no_interference_matches_empty_list() {
        let ula = Ula::half_wavelength(3);
        let r = covariance(
            &AngularSupport::wrapped(0.4, 0.1),
            2.0,
            &ula,
            DEFAULT_QUAD_NODES,
        );
        let pilot = &pilot_set(3, 1).unwrap()[0];
        let block = ReceivedBlock(DMatrix::from_fn(3, 3, |i, j| {
            Complex64::new(i as f64, j as f64)
        }));
        let a = mmse_estimate_no_interference(&r, &block, pilot, 0.01).unwrap();
        let b = mmse_estimate(&r, &[], &block, pilot, 0.01).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn error_metric_examples() {
        let h = cvec(&[(1.0, 2.0), (-0.5, 0.0)]);
        assert_eq!(error_db(&h, &h).unwrap(), ERROR_DB_FLOOR);
        assert_abs_diff_eq!(
            error_db(&DVector::zeros(2), &h).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        let scaled = &h * Complex64::new(0.9, 0.0);
        assert_abs_diff_eq!(error_db(&scaled, &h).unwrap(), -20.0, epsilon = 1e-9);
        assert!(matches!(
            error_db(&h, &DVector::zeros(2)),
            Err(Error::ZeroChannel)
        ));
    }

    #[test]
    fn mmse_beats_least_squares() {
        use crate::channel::{draw_channel, gain_at_distance};
        let ula = Ula::half_wavelength(10);
        let beta = gain_at_distance(500.0, 10f64.powf(6.5), 3.0);
        let own = AngularSupport::wrapped(0.0, 0.1);
        let other = AngularSupport::wrapped(2.5, 0.05);
        let beta_j = gain_at_distance(1000.0, 10f64.powf(6.5), 3.0);
        let r = covariance(&own, beta, &ula, DEFAULT_QUAD_NODES);
        let rj = covariance(&other, beta_j, &ula, DEFAULT_QUAD_NODES);
        let pilot = &pilot_set(4, 1).unwrap()[0];
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (mut mmse, mut ls) = (0.0, 0.0);
        let trials = 200;
        for _ in 0..trials {
            let h = draw_channel(&own, beta, 20, &ula, &mut rng);
            let i = draw_channel(&other, beta_j, 20, &ula, &mut rng);
            let block = receive(&h, std::slice::from_ref(&i), pilot, 1.0, &mut rng).unwrap();
            mmse += error_db(
                &mmse_estimate(&r, &[&rj], &block, pilot, 1.0).unwrap(),
                &h.h,
            )
            .unwrap();
            ls += error_db(&ls_estimate(&block, pilot).unwrap(), &h.h).unwrap();
        }
        assert!(mmse / trials as f64 <= ls / trials as f64);
    }
}
