use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::PropagationSpec;
use crate::error::{Error, Result};
use crate::sampling::{GridSpec, SampledWaveFunction, FATAL_TAIL_MASS};
use crate::scalar::Scalar;

/// Frequency response of the dispersion kernel.
///
/// With ψ̂(ω) = ∫ψ(t)e^{−iωt}dt, the Fourier transform of
/// exp(is²/(4βL)) / (2√(πiβL)) is exp(−iβLω²) for either sign of β
/// (principal square roots), so propagation is a pointwise product in ω.
pub fn transfer_function<S: Scalar>(beta_l: S, omega: S) -> Complex<S> {
    Complex::from_polar(S::one(), -beta_l * omega * omega)
}

/// Angular frequencies of the DFT bins in FFT order.
fn angular_frequencies<S: Scalar>(grid: &GridSpec<S>) -> Vec<S> {
    let n = grid.len();
    let d_omega = S::TAU() / (S::from_usize_lossy(n) * grid.dt());
    (0..n)
        .map(|j| {
            let signed = if j < n / 2 {
                S::from_usize_lossy(j)
            } else {
                -S::from_usize_lossy(n - j)
            };
            signed * d_omega
        })
        .collect()
}

/// Holds the spectrum of one sampled wave function so that many lengths can
/// be propagated with one inverse transform each.
pub struct SpectralPropagator<S: Scalar> {
    grid: GridSpec<S>,
    spectrum: Vec<Complex<S>>,
    omega: Vec<S>,
    inverse: Arc<dyn Fft<S>>,
}

impl<S: Scalar> SpectralPropagator<S> {
    pub fn new(swf: &SampledWaveFunction<S>) -> Self {
        let grid = *swf.grid();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.len());
        let inverse = planner.plan_fft_inverse(grid.len());
        let mut spectrum = swf.amplitudes().to_vec();
        forward.process(&mut spectrum);
        Self {
            grid,
            spectrum,
            omega: angular_frequencies(&grid),
            inverse,
        }
    }

    pub fn grid(&self) -> &GridSpec<S> {
        &self.grid
    }

    /// Propagated samples without the edge check.
    pub fn propagate_unchecked(&self, spec: &PropagationSpec<S>) -> SampledWaveFunction<S> {
        let beta_l = spec.beta_l();
        let scale = S::one() / S::from_usize_lossy(self.grid.len());
        let mut buf: Vec<Complex<S>> = self
            .spectrum
            .iter()
            .zip(&self.omega)
            .map(|(&a, &w)| a * transfer_function(beta_l, w) * scale)
            .collect();
        self.inverse.process(&mut buf);
        SampledWaveFunction::from_parts(self.grid, buf)
            .expect("propagated buffer matches grid length")
    }

    pub fn propagate(&self, spec: &PropagationSpec<S>) -> Result<SampledWaveFunction<S>> {
        let out = self.propagate_unchecked(spec);
        let tail = out.edge_tail_mass().to_f64_lossy();
        if !(tail <= FATAL_TAIL_MASS) {
            return Err(Error::Resolution(format!(
                "propagated wave function leaves edge tail mass {tail:.3e} on a {}-point grid; widen the grid",
                self.grid.len()
            )));
        }
        Ok(out)
    }
}

/// Propagates sampled amplitudes by FFT, multiplication with the transfer
/// function and inverse FFT. The grid must be wide enough for the result.
pub fn propagate_spectral<S: Scalar>(
    swf: &SampledWaveFunction<S>,
    spec: &PropagationSpec<S>,
) -> Result<SampledWaveFunction<S>> {
    SpectralPropagator::new(swf).propagate(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{lookup_medium, propagate_gaussian_closed_form};
    use crate::modes::{ChirpedGaussianMode, TemporalMode};
    use crate::sampling::{plan_grid, sample};

    const PS: f64 = 1e-12;

    #[test]
    fn zero_length_round_trip() {
        let m = TemporalMode::from(ChirpedGaussianMode::new(4.25 * PS, 2.0).unwrap());
        let g = plan_grid(&m, 0.0, 0.0).unwrap();
        let swf = sample(&m, &g).unwrap();
        let spec = PropagationSpec::new(lookup_medium("air").unwrap(), 0.0).unwrap();
        let out = propagate_spectral(&swf, &spec).unwrap();
        let peak = swf
            .amplitudes()
            .iter()
            .map(|a| a.norm())
            .fold(0.0, f64::max);
        for (a, b) in swf.amplitudes().iter().zip(out.amplitudes()) {
            assert!((a - b).norm() < 1e-12 * peak);
        }
    }

    #[test]
    fn matches_closed_form_in_fibre() {
        let mode = ChirpedGaussianMode::new(4.25 * PS, 2.0).unwrap();
        let tm = TemporalMode::from(mode);
        let spec = PropagationSpec::new(lookup_medium("smf").unwrap(), 500.0).unwrap();
        let g = plan_grid(&tm, spec.medium.beta, spec.length).unwrap();
        let out = propagate_spectral(&sample(&tm, &g).unwrap(), &spec).unwrap();
        let mut worst = 0.0f64;
        for (k, a) in out.amplitudes().iter().enumerate() {
            let exact = propagate_gaussian_closed_form(&mode, &spec, g.time(k));
            worst = worst.max((a - exact).norm());
        }
        // amplitudes are O(1e6) s^-1/2; compare in ps^-1/2
        assert!(worst * PS.sqrt() < 1e-6, "worst {}", worst * PS.sqrt());
    }

    #[test]
    fn too_narrow_grid_is_rejected() {
        let m = TemporalMode::from(ChirpedGaussianMode::plain(4.25 * PS).unwrap());
        let g = plan_grid(&m, 0.0, 0.0).unwrap();
        let swf = sample(&m, &g).unwrap();
        let spec = PropagationSpec::new(lookup_medium("smf").unwrap(), 5_000.0).unwrap();
        assert!(matches!(
            propagate_spectral(&swf, &spec),
            Err(Error::Resolution(_))
        ));
    }
}
