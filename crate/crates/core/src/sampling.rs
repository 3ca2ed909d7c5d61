//! Uniform time grids, sampled wave functions and their moments.

use num_complex::Complex;

use crate::dispersion::{PropagationSpec, SpectralPropagator};
use crate::error::{Error, Result};
use crate::modes::TemporalMode;
use crate::scalar::Scalar;

/// Edge tail mass below which a sampled function counts as well resolved.
pub const USABLE_TAIL_MASS: f64 = 1e-9;
/// Edge tail mass above which moments are refused.
pub const FATAL_TAIL_MASS: f64 = 1e-6;
/// Allowed |norm − 1| right after sampling a normalized family.
pub const SAMPLED_NORM_TOLERANCE: f64 = 1e-6;

/// Uniform grid t_k = t_start + k·dt, k = 0..n, symmetric about the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<S> {
    t_start: S,
    dt: S,
    n: usize,
}

impl<S: Scalar> GridSpec<S> {
    pub const MIN_N: usize = 256;

    pub fn new(dt: S, n: usize) -> Result<Self> {
        if !(dt > S::zero()) || !dt.is_finite() {
            return Err(Error::ParameterDomain(format!(
                "grid step must be positive, got {dt:e}"
            )));
        }
        if n < Self::MIN_N || !n.is_power_of_two() {
            return Err(Error::ParameterDomain(format!(
                "grid size must be a power of two >= {}, got {n}",
                Self::MIN_N
            )));
        }
        let t_start = -dt * S::from_usize_lossy(n) * S::lit(0.5);
        Ok(Self { t_start, dt, n })
    }

    pub fn t_start(&self) -> S {
        self.t_start
    }

    pub fn dt(&self) -> S {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn half_width(&self) -> S {
        self.dt * S::from_usize_lossy(self.n) * S::lit(0.5)
    }

    #[inline]
    pub fn time(&self, k: usize) -> S {
        self.t_start + S::from_usize_lossy(k) * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = S> + '_ {
        (0..self.n).map(move |k| self.time(k))
    }

    /// Same step, twice the window.
    pub fn widened(&self) -> Result<Self> {
        Self::new(self.dt, self.n * 2)
    }

    /// Same window, half the step.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.dt * S::lit(0.5), self.n * 2)
    }
}

/// Knobs for [`plan_grid_with`]. All widths are in units of the relevant SD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub max_n: usize,
    /// Window half-width in predicted post-propagation SDs.
    pub window_sigmas: f64,
    /// Samples per compressed width σ/√(1 + C²).
    pub samples_per_min_sigma: f64,
    /// Nyquist frequency must reach this many 2ω_rms (√(1 + C²)/σ for a Gaussian).
    pub spectral_span: f64,
    /// Analytic initial tail mass allowed outside the window for non-Gaussian families.
    pub initial_tail_mass: f64,
    /// Extra step refinement for modes with algebraically decaying spectra.
    pub nonsmooth_refinement: f64,
    /// Such modes also get room for their spectral tail, which disperses to
    /// t = 2βLω: the window grows by 2|β|L·ω up to this many √(1 + C²)/σ.
    /// The allowance is cut back to fit `max_n`.
    pub nonsmooth_tail_span: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            max_n: 1 << 22,
            window_sigmas: 12.0,
            samples_per_min_sigma: 16.0,
            spectral_span: 8.0,
            initial_tail_mass: 1e-12,
            nonsmooth_refinement: 32.0,
            nonsmooth_tail_span: 1000.0,
        }
    }
}

/// Standard deviation of a chirped Gaussian after propagation over `length`.
pub(crate) fn predicted_sd<S: Scalar>(sd: S, chirp_c: S, beta: S, length: S) -> S {
    let lb = length * beta;
    let s2 = sd * sd;
    (lb * lb + (s2 - chirp_c * lb) * (s2 - chirp_c * lb)).sqrt() / sd
}

pub fn plan_grid<S: Scalar>(mode: &TemporalMode<S>, beta: S, l_max: S) -> Result<GridSpec<S>> {
    plan_grid_with(mode, beta, l_max, &GridConfig::default())
}

/// Sizes a grid that holds `mode` both initially and after propagating over
/// any length up to `l_max` in a medium with GVD `beta`.
pub fn plan_grid_with<S: Scalar>(
    mode: &TemporalMode<S>,
    beta: S,
    l_max: S,
    config: &GridConfig,
) -> Result<GridSpec<S>> {
    if !(l_max >= S::zero()) {
        return Err(Error::ParameterDomain(format!(
            "maximum length must be non-negative, got {l_max:e}"
        )));
    }
    let env = mode.envelope();
    let c2 = S::one() + env.chirp_c * env.chirp_c;
    // σ_L² is a convex quadratic in L, so the widest packet over [0, l_max]
    // sits at an end
    let finite_spectrum = env.omega_rms.is_finite();
    let at_end = if finite_spectrum {
        env.propagated_sd(beta, l_max)
    } else {
        predicted_sd(env.sd, env.chirp_c, beta, l_max)
    };
    let widest = env.sd.max(at_end);
    let mut half_width = S::lit(config.window_sigmas) * widest + env.offset;

    if !mode.is_gaussian_family() {
        let target = S::lit(config.initial_tail_mass);
        let mut guard = 0;
        while mode.tail_mass_outside(half_width) >= target {
            half_width = half_width * S::lit(1.25);
            guard += 1;
            if guard > 200 {
                return Err(Error::Resolution(
                    "initial tail mass never falls below target".into(),
                ));
            }
        }
    }

    let sigma_min = env.sd / c2.sqrt();
    let by_width = sigma_min / S::lit(config.samples_per_min_sigma);
    // span is counted in Gaussian spectral widths √(1 + C²)/σ = 2ω_rms
    let by_span = if finite_spectrum {
        S::PI() / (S::lit(2.0 * config.spectral_span) * env.omega_rms)
    } else {
        S::PI() * env.sd / (S::lit(config.spectral_span) * c2.sqrt())
    };
    let mut dt = by_width.min(by_span);
    if !mode.is_smooth() {
        dt = dt / S::lit(config.nonsmooth_refinement);
    }

    if !mode.is_smooth() {
        let cap = S::lit(0.5 * config.max_n as f64) * dt;
        let reach =
            S::lit(2.0) * (beta * l_max).abs() * S::lit(config.nonsmooth_tail_span) * c2.sqrt()
                / env.sd;
        if half_width < cap {
            half_width = (half_width + reach).min(cap);
        }
    }

    let needed = (S::lit(2.0) * half_width / dt).ceil().to_f64_lossy();
    if !needed.is_finite() || needed > config.max_n as f64 {
        return Err(Error::Resolution(format!(
            "grid needs {needed:.3e} samples (half-width {:.3e} s, step {:.3e} s), cap is {}",
            half_width.to_f64_lossy(),
            dt.to_f64_lossy(),
            config.max_n
        )));
    }
    let n = (needed as usize)
        .next_power_of_two()
        .max(GridSpec::<S>::MIN_N);
    let grid = GridSpec::new(dt, n)?;
    if mode.is_gaussian_family() || !mode.is_smooth() || beta * l_max == S::zero() {
        return Ok(grid);
    }
    verified_window(mode, beta, l_max, grid, config.max_n)
}

/// Window doublings tried when a trial propagation leaves too much at the edges.
const PLAN_WIDENINGS: usize = 4;

/// Smooth non-Gaussian modes can develop heavier tails than a Gaussian of the
/// same SD; a trial propagation to `l_max` checks the edges.
fn verified_window<S: Scalar>(
    mode: &TemporalMode<S>,
    beta: S,
    l_max: S,
    mut grid: GridSpec<S>,
    max_n: usize,
) -> Result<GridSpec<S>> {
    let spec = PropagationSpec::with_beta(beta, l_max)?;
    for _ in 0..PLAN_WIDENINGS {
        let out =
            SpectralPropagator::new(&sample_unchecked(mode, &grid)).propagate_unchecked(&spec);
        if out.edge_tail_mass().to_f64_lossy() < USABLE_TAIL_MASS || grid.len() * 2 > max_n {
            break;
        }
        grid = grid.widened()?;
    }
    Ok(grid)
}

/// A wave function sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaveFunction<S> {
    grid: GridSpec<S>,
    amps: Vec<Complex<S>>,
}

impl<S: Scalar> SampledWaveFunction<S> {
    pub fn from_parts(grid: GridSpec<S>, amps: Vec<Complex<S>>) -> Result<Self> {
        if amps.len() != grid.len() {
            return Err(Error::ParameterDomain(format!(
                "{} samples for a grid of {}",
                amps.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, amps })
    }

    pub fn grid(&self) -> &GridSpec<S> {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex<S>] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex<S>> {
        self.amps
    }

    pub fn pdf(&self) -> Vec<S> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Trapezoid ∫|ψ|² dt.
    pub fn norm(&self) -> S {
        trapezoid(self.amps.iter().map(|a| a.norm_sqr()), self.grid.dt())
    }

    /// Fraction of the norm carried by the outer 1% of samples on each side.
    pub fn edge_tail_mass(&self) -> S {
        let n = self.amps.len();
        let k = n.div_ceil(100);
        let sum = |range: &[Complex<S>]| range.iter().fold(S::zero(), |acc, a| acc + a.norm_sqr());
        let edge = (sum(&self.amps[..k]) + sum(&self.amps[n - k..])) * self.grid.dt();
        edge / self.norm()
    }

    pub fn normalize(&mut self) {
        let scale = S::one() / self.norm().sqrt();
        for a in &mut self.amps {
            *a = *a * scale;
        }
    }
}

fn trapezoid<S: Scalar>(values: impl ExactSizeIterator<Item = S>, dt: S) -> S {
    let n = values.len();
    let half = S::lit(0.5);
    let mut acc = S::zero();
    for (k, v) in values.enumerate() {
        acc = acc + if k == 0 || k + 1 == n { half * v } else { v };
    }
    acc * dt
}

/// Evaluates `mode` on every grid point without any resolution checks.
pub fn sample_unchecked<S: Scalar>(
    mode: &TemporalMode<S>,
    grid: &GridSpec<S>,
) -> SampledWaveFunction<S> {
    let amps = grid.times().map(|t| mode.evaluate(t)).collect();
    SampledWaveFunction { grid: *grid, amps }
}

pub fn sample<S: Scalar>(
    mode: &TemporalMode<S>,
    grid: &GridSpec<S>,
) -> Result<SampledWaveFunction<S>> {
    let swf = sample_unchecked(mode, grid);
    let tail = swf.edge_tail_mass().to_f64_lossy();
    if !(tail < USABLE_TAIL_MASS) {
        return Err(Error::Resolution(format!(
            "{} mode leaves tail mass {tail:.3e} in the outer 1% of a {}-point grid",
            mode.family_name(),
            grid.len()
        )));
    }
    let norm = swf.norm().to_f64_lossy();
    if !((norm - 1.0).abs() <= SAMPLED_NORM_TOLERANCE) {
        return Err(Error::Resolution(format!(
            "sampled norm {norm:.12} drifts from 1 by more than {SAMPLED_NORM_TOLERANCE:e}"
        )));
    }
    Ok(swf)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport<S> {
    pub mean: S,
    /// Square root of the second central moment.
    pub sd: S,
    pub norm: S,
    pub edge_tail_mass: S,
}

/// Mean and central SD of |ψ|², normalized by the trapezoid norm.
pub fn moments<S: Scalar>(swf: &SampledWaveFunction<S>) -> Result<MomentReport<S>> {
    let norm = swf.norm();
    if !(norm > S::zero()) {
        return Err(Error::Resolution("wave function has zero norm".into()));
    }
    let edge_tail_mass = swf.edge_tail_mass();
    if !(edge_tail_mass.to_f64_lossy() <= FATAL_TAIL_MASS) {
        return Err(Error::Resolution(format!(
            "edge tail mass {:.3e} exceeds {FATAL_TAIL_MASS:e}; widen the grid",
            edge_tail_mass.to_f64_lossy()
        )));
    }
    let grid = swf.grid();
    let dt = grid.dt();
    let pdf = swf.pdf();
    let first = trapezoid(pdf.iter().enumerate().map(|(k, &p)| grid.time(k) * p), dt);
    let mean = first / norm;
    let second = trapezoid(
        pdf.iter().enumerate().map(|(k, &p)| {
            let d = grid.time(k) - mean;
            d * d * p
        }),
        dt,
    );
    Ok(MomentReport {
        mean,
        sd: (second / norm).sqrt(),
        norm,
        edge_tail_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{ChirpedGaussianMode, GeneralizedGaussianMode, SechMode, TimeBinQubitMode};
    use std::f64::consts::PI;

    const PS: f64 = 1e-12;

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(1e-13, 100).is_err());
        assert!(GridSpec::new(1e-13, 128).is_err());
        assert!(GridSpec::new(0.0, 256).is_err());
        let g = GridSpec::new(1e-13f64, 256).unwrap();
        assert_eq!(g.time(128), 0.0);
        assert!((g.t_start() + g.half_width()).abs() < 1e-30);
    }

    #[test]
    fn plain_gaussian_window_without_propagation() {
        let mode = TemporalMode::from(ChirpedGaussianMode::plain(4.25 * PS).unwrap());
        for (beta, l) in [(0.0, 1e5), (20.05e-30, 0.0)] {
            let g = plan_grid(&mode, beta, l).unwrap();
            assert!(g.half_width() >= 51.0 * PS);
            assert!(g.dt() <= 0.266 * PS);
        }
    }

    #[test]
    fn chirped_gaussian_plan_holds_propagated_tails() {
        // Propagated Gaussian width at 10 km of SMF, then the closed-form ψ_L on the planned grid
        let sigma = 4.25 * PS;
        let beta = -1.15e-26;
        let l = 1e4;
        let mode = ChirpedGaussianMode::new(sigma, 15.0).unwrap();
        let g = plan_grid(&TemporalMode::from(mode), beta, l).unwrap();
        let lb = l * beta;
        let sigma_l = ((lb * lb) + (sigma * sigma - 15.0 * lb).powi(2)).sqrt() / sigma;
        assert!(g.half_width() >= 12.0 * sigma_l);
        // propagated PDF is Gaussian with SD sigma_l; mass in the outer 1%
        let inner = 0.98 * g.half_width();
        let tail = crate::special::erfc(inner / (2f64.sqrt() * sigma_l));
        assert!(tail < 1e-9, "tail {tail}");
    }

    #[test]
    fn qubit_plan_covers_broadened_packets() {
        let q = TimeBinQubitMode::new(5.0 * PS, 0.25 * PS, 2.0, PI / 2.0, 0.0).unwrap();
        let g = plan_grid(&TemporalMode::from(q), -1.15e-26, 1500.0).unwrap();
        assert!(g.half_width() > 100.0 * PS);
        let packet_sd = 0.25 * PS / 2f64.sqrt();
        assert!(g.dt() <= packet_sd / 5f64.sqrt() / 16.0);
    }

    #[test]
    fn plan_refuses_oversized_grids() {
        let mode = TemporalMode::from(ChirpedGaussianMode::plain(4.25 * PS).unwrap());
        let err = plan_grid(&mode, -1.15e-26, 1e8).unwrap_err();
        assert!(matches!(err, Error::Resolution(_)));
        let small = GridConfig {
            max_n: 256,
            ..GridConfig::default()
        };
        assert!(plan_grid_with(&mode, 0.0, 0.0, &small).is_err());
    }

    #[test]
    fn sampled_norms() {
        let sigma = 4.25 * PS;
        let modes: Vec<TemporalMode<f64>> = vec![
            ChirpedGaussianMode::plain(sigma).unwrap().into(),
            GeneralizedGaussianMode::new(sigma, 1.0, 8.0)
                .unwrap()
                .into(),
            SechMode::new(sigma, 0.0).unwrap().into(),
        ];
        for m in &modes {
            let g = plan_grid(m, 0.0, 0.0).unwrap();
            let swf = sample(m, &g).unwrap();
            assert!(
                (swf.norm() - 1.0).abs() < 1e-9,
                "{}: {}",
                m.family_name(),
                swf.norm()
            );
        }
    }

    #[test]
    fn sample_flags_truncated_window() {
        let m = TemporalMode::from(ChirpedGaussianMode::plain(4.25 * PS).unwrap());
        let g = GridSpec::new(0.1 * PS, 256).unwrap();
        assert!(matches!(sample(&m, &g), Err(Error::Resolution(_))));
    }

    #[test]
    fn plain_gaussian_moments() {
        let sigma = 4.25 * PS;
        let m = TemporalMode::from(ChirpedGaussianMode::plain(sigma).unwrap());
        let swf = sample(&m, &plan_grid(&m, 0.0, 0.0).unwrap()).unwrap();
        let r = moments(&swf).unwrap();
        assert!(r.mean.abs() < 1e-15 * sigma);
        assert!((r.sd / sigma - 1.0).abs() < 1e-6);
    }

    #[test]
    fn laplacian_ggd_sd_equals_sigma() {
        let sigma = 4.25 * PS;
        let m = TemporalMode::from(GeneralizedGaussianMode::new(sigma, 0.0, 1.0).unwrap());
        let swf = sample(&m, &plan_grid(&m, 0.0, 0.0).unwrap()).unwrap();
        let r = moments(&swf).unwrap();
        assert!((r.sd / sigma - 1.0).abs() < 1e-4);
    }

    #[test]
    fn moments_refuse_heavy_edges() {
        let m = TemporalMode::from(ChirpedGaussianMode::plain(4.25 * PS).unwrap());
        let g = GridSpec::new(0.05 * PS, 256).unwrap();
        let swf = sample_unchecked(&m, &g);
        assert!(matches!(moments(&swf), Err(Error::Resolution(_))));
    }

    #[test]
    fn normalize_restores_unit_norm() {
        let m = TemporalMode::from(SechMode::new(4.25 * PS, 1.0).unwrap());
        let g = plan_grid(&m, 0.0, 0.0).unwrap();
        let amps = sample_unchecked(&m, &g)
            .into_amplitudes()
            .into_iter()
            .map(|a| a * 3.0)
            .collect();
        let mut swf = SampledWaveFunction::from_parts(g, amps).unwrap();
        swf.normalize();
        assert!((swf.norm() - 1.0).abs() < 1e-12);
    }
}
