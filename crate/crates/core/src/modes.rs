//! Temporal-mode families of a single photon.
//!
//! Every family is an immutable, validated value whose `evaluate` returns the
//! complex amplitude ψ(t) in s^{-1/2}. All families are unit-normalized:
//! ∫|ψ(t)|² dt = 1. Times are in seconds.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special::{erfc, gamma, gamma_upper_regularized};

/// Admissible parameter ranges. The defaults keep planned grids finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeLimits {
    pub q_min: f64,
    pub q_max: f64,
    pub chirp_max_abs: f64,
}

impl Default for ModeLimits {
    fn default() -> Self {
        Self {
            q_min: 0.1,
            q_max: 64.0,
            chirp_max_abs: 100.0,
        }
    }
}

impl ModeLimits {
    fn check_chirp<S: Scalar>(&self, chirp_c: S) -> Result<()> {
        let c = chirp_c.to_f64_lossy();
        if !c.is_finite() || c.abs() > self.chirp_max_abs {
            return Err(Error::ParameterDomain(format!(
                "chirp C = {c} outside [-{m}, {m}]",
                m = self.chirp_max_abs
            )));
        }
        Ok(())
    }
}

fn check_duration<S: Scalar>(name: &str, value: S) -> Result<()> {
    if !(value > S::zero()) || !value.is_finite() {
        return Err(Error::ParameterDomain(format!(
            "{name} must be positive and finite, got {value:e}"
        )));
    }
    Ok(())
}

/// Generalized-Gaussian mode with the chirp applied to the same |t|^q term as
/// the envelope: ψ(t) = √(q / (2αΓ(1/q))) · exp(−(1 + iC)|t|^q / (2α^q)).
///
/// α = σ·√(Γ(1/q)/Γ(3/q)) makes σ the standard deviation of |ψ|².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedGaussianMode<S> {
    sigma: S,
    chirp_c: S,
    shape_q: S,
    alpha: S,
    prefactor: S,
}

impl<S: Scalar> GeneralizedGaussianMode<S> {
    pub fn new(sigma: S, chirp_c: S, shape_q: S) -> Result<Self> {
        Self::with_limits(sigma, chirp_c, shape_q, &ModeLimits::default())
    }

    pub fn with_limits(sigma: S, chirp_c: S, shape_q: S, limits: &ModeLimits) -> Result<Self> {
        check_duration("sigma", sigma)?;
        limits.check_chirp(chirp_c)?;
        let q = shape_q.to_f64_lossy();
        if !(q >= limits.q_min && q <= limits.q_max) {
            return Err(Error::ParameterDomain(format!(
                "shape q = {q} outside [{}, {}]",
                limits.q_min, limits.q_max
            )));
        }
        let g1 = gamma(S::one() / shape_q);
        let g3 = gamma(S::lit(3.0) / shape_q);
        let alpha = sigma * (g1 / g3).sqrt();
        if !(alpha > S::zero()) || !alpha.is_finite() {
            return Err(Error::ParameterDomain(format!(
                "derived scale alpha = {alpha:e} is not positive and finite"
            )));
        }
        let prefactor = (shape_q / (S::lit(2.0) * alpha * g1)).sqrt();
        Ok(Self {
            sigma,
            chirp_c,
            shape_q,
            alpha,
            prefactor,
        })
    }

    pub fn sigma(&self) -> S {
        self.sigma
    }

    pub fn chirp(&self) -> S {
        self.chirp_c
    }

    pub fn shape(&self) -> S {
        self.shape_q
    }

    pub fn alpha(&self) -> S {
        self.alpha
    }

    /// ⟨ω²⟩ = ∫|ψ'|² dt = (1 + C²) q² Γ(2 − 1/q) / (4α² Γ(1/q)); infinite
    /// for q ≤ 1/2.
    pub fn spectral_second_moment(&self) -> S {
        let q = self.shape_q;
        let two = S::lit(2.0);
        if q <= S::lit(0.5) {
            return S::infinity();
        }
        let c2 = S::one() + self.chirp_c * self.chirp_c;
        c2 * q * q * gamma(two - q.recip())
            / (S::lit(4.0) * self.alpha * self.alpha * gamma(q.recip()))
    }

    pub fn evaluate(&self, t: S) -> Complex<S> {
        let x = (t.abs() / self.alpha).powf(self.shape_q);
        let half = S::lit(0.5);
        Complex::from_polar(self.prefactor * (-half * x).exp(), -half * self.chirp_c * x)
    }

    /// Even integer shapes are entire functions of t; every other shape has a
    /// |t|^q singularity at the origin and an algebraically decaying spectrum.
    pub fn is_smooth(&self) -> bool {
        let q = self.shape_q.to_f64_lossy();
        q.fract() == 0.0 && (q as i64) % 2 == 0
    }

    /// Probability mass of |ψ|² outside [−h, h].
    pub fn tail_mass_outside(&self, h: S) -> S {
        if h <= S::zero() {
            return S::one();
        }
        let x = (h / self.alpha).powf(self.shape_q);
        gamma_upper_regularized(S::one() / self.shape_q, x)
    }

    /// Radius beyond which |ψ| drops below `rel` times its peak.
    pub fn amplitude_radius(&self, rel: S) -> S {
        self.alpha * (S::lit(2.0) * (S::one() / rel).ln()).powf(S::one() / self.shape_q)
    }
}

/// Chirped Gaussian: ψ(t) = (2π)^{-1/4} σ^{-1/2} exp(−(1 + iC) t² / (4σ²)).
/// With C = 0 this is the plain Gaussian mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpedGaussianMode<S> {
    sigma: S,
    chirp_c: S,
}

impl<S: Scalar> ChirpedGaussianMode<S> {
    pub fn new(sigma: S, chirp_c: S) -> Result<Self> {
        Self::with_limits(sigma, chirp_c, &ModeLimits::default())
    }

    pub fn with_limits(sigma: S, chirp_c: S, limits: &ModeLimits) -> Result<Self> {
        check_duration("sigma", sigma)?;
        limits.check_chirp(chirp_c)?;
        Ok(Self { sigma, chirp_c })
    }

    /// Unchirped Gaussian.
    pub fn plain(sigma: S) -> Result<Self> {
        Self::new(sigma, S::zero())
    }

    pub fn sigma(&self) -> S {
        self.sigma
    }

    pub fn chirp(&self) -> S {
        self.chirp_c
    }

    /// ⟨ω²⟩ = (1 + C²)/(4σ²).
    pub fn spectral_second_moment(&self) -> S {
        (S::one() + self.chirp_c * self.chirp_c) / (S::lit(4.0) * self.sigma * self.sigma)
    }

    pub fn peak_amplitude(&self) -> S {
        (S::lit(2.0) * S::PI()).powf(S::lit(-0.25)) / self.sigma.sqrt()
    }

    pub fn evaluate(&self, t: S) -> Complex<S> {
        let x = t * t / (S::lit(4.0) * self.sigma * self.sigma);
        Complex::from_polar(self.peak_amplitude() * (-x).exp(), -self.chirp_c * x)
    }

    pub fn tail_mass_outside(&self, h: S) -> S {
        if h <= S::zero() {
            return S::one();
        }
        erfc(h / (S::SQRT_2() * self.sigma))
    }

    pub fn amplitude_radius(&self, rel: S) -> S {
        S::lit(2.0) * self.sigma * (S::one() / rel).ln().sqrt()
    }
}

/// Hyperbolic-secant mode:
/// ψ(t) = √(sech(πt/(2σ)) / (2σ)) · exp(−iCt²/(4σ²)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SechMode<S> {
    sigma: S,
    chirp_c: S,
}

impl<S: Scalar> SechMode<S> {
    pub fn new(sigma: S, chirp_c: S) -> Result<Self> {
        Self::with_limits(sigma, chirp_c, &ModeLimits::default())
    }

    pub fn with_limits(sigma: S, chirp_c: S, limits: &ModeLimits) -> Result<Self> {
        check_duration("sigma", sigma)?;
        limits.check_chirp(chirp_c)?;
        Ok(Self { sigma, chirp_c })
    }

    pub fn sigma(&self) -> S {
        self.sigma
    }

    pub fn chirp(&self) -> S {
        self.chirp_c
    }

    pub fn evaluate(&self, t: S) -> Complex<S> {
        let two = S::lit(2.0);
        let x = (S::PI() * t / (two * self.sigma)).abs();
        // sech(x) = 2e^{-x} / (1 + e^{-2x}), overflow-free
        let e = (-x).exp();
        let sech = two * e / (S::one() + e * e);
        let amp = (sech / (two * self.sigma)).sqrt();
        let phase = -self.chirp_c * t * t / (S::lit(4.0) * self.sigma * self.sigma);
        Complex::from_polar(amp, phase)
    }

    /// ⟨ω²⟩ = (π²/8 + C²)/(4σ²).
    pub fn spectral_second_moment(&self) -> S {
        (S::PI() * S::PI() / S::lit(8.0) + self.chirp_c * self.chirp_c)
            / (S::lit(4.0) * self.sigma * self.sigma)
    }

    pub fn tail_mass_outside(&self, h: S) -> S {
        if h <= S::zero() {
            return S::one();
        }
        let x = S::PI() * h / (S::lit(2.0) * self.sigma);
        S::lit(4.0) / S::PI() * (-x).exp().atan()
    }

    pub fn amplitude_radius(&self, rel: S) -> S {
        // sqrt(sech x) < rel  <=>  cosh x > rel^-2
        let y = (S::one() / rel).powi(2);
        let x = if y > S::lit(1e8) {
            (S::lit(2.0) * y).ln()
        } else {
            y.acosh()
        };
        S::lit(2.0) * self.sigma * x / S::PI()
    }
}

/// Time-bin qubit ψ(t) = a φ(t − T/2) + b φ(t + T/2) with
/// φ(t) = (√π σ̃)^{-1/2} exp(−(1 + iC) t² / (2σ̃²)),
/// a = cos(θ/2), b = sin(θ/2) e^{iφ}.
///
/// The overlap between the two packets makes the raw norm exceed one; the
/// evaluated amplitude is divided by the exact square root of that norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeBinQubitMode<S> {
    separation_t: S,
    packet_sigma: S,
    chirp_c: S,
    theta: S,
    phi: S,
    amp_a: Complex<S>,
    amp_b: Complex<S>,
    inv_sqrt_norm: S,
}

impl<S: Scalar> TimeBinQubitMode<S> {
    pub fn new(separation_t: S, packet_sigma: S, chirp_c: S, theta: S, phi: S) -> Result<Self> {
        Self::with_limits(
            separation_t,
            packet_sigma,
            chirp_c,
            theta,
            phi,
            &ModeLimits::default(),
        )
    }

    pub fn with_limits(
        separation_t: S,
        packet_sigma: S,
        chirp_c: S,
        theta: S,
        phi: S,
        limits: &ModeLimits,
    ) -> Result<Self> {
        if !(separation_t >= S::zero()) || !separation_t.is_finite() {
            return Err(Error::ParameterDomain(format!(
                "separation T must be non-negative, got {separation_t:e}"
            )));
        }
        check_duration("packet sigma", packet_sigma)?;
        limits.check_chirp(chirp_c)?;
        if !(theta >= S::zero() && theta <= S::PI()) {
            return Err(Error::ParameterDomain(format!(
                "theta = {theta} outside [0, pi]"
            )));
        }
        if !(phi >= S::zero() && phi < S::TAU()) {
            return Err(Error::ParameterDomain(format!(
                "phi = {phi} outside [0, 2pi)"
            )));
        }
        let half = S::lit(0.5);
        let amp_a = Complex::new((half * theta).cos(), S::zero());
        let amp_b = Complex::from_polar((half * theta).sin(), phi);
        let mut mode = Self {
            separation_t,
            packet_sigma,
            chirp_c,
            theta,
            phi,
            amp_a,
            amp_b,
            inv_sqrt_norm: S::one(),
        };
        mode.inv_sqrt_norm = S::one() / mode.raw_norm().sqrt();
        Ok(mode)
    }

    pub fn separation(&self) -> S {
        self.separation_t
    }

    pub fn packet_sigma(&self) -> S {
        self.packet_sigma
    }

    pub fn chirp(&self) -> S {
        self.chirp_c
    }

    pub fn theta(&self) -> S {
        self.theta
    }

    pub fn phi(&self) -> S {
        self.phi
    }

    /// (a, b) with |a|² + |b|² = 1.
    pub fn amplitudes(&self) -> (Complex<S>, Complex<S>) {
        (self.amp_a, self.amp_b)
    }

    /// Standard deviation of one packet's |φ|², σ̃/√2.
    pub fn packet_sd(&self) -> S {
        self.packet_sigma / S::SQRT_2()
    }

    /// One packet written as the equivalent chirped Gaussian.
    pub fn packet(&self) -> ChirpedGaussianMode<S> {
        ChirpedGaussianMode {
            sigma: self.packet_sd(),
            chirp_c: self.chirp_c,
        }
    }

    /// ∫|aφ(t − T/2) + bφ(t + T/2)|² dt = 1 + sinθ cosφ exp(−(1 + C²)T²/(4σ̃²)).
    pub fn raw_norm(&self) -> S {
        let c2 = S::one() + self.chirp_c * self.chirp_c;
        let t = self.separation_t;
        let s = self.packet_sigma;
        S::one() + self.theta.sin() * self.phi.cos() * (-c2 * t * t / (S::lit(4.0) * s * s)).exp()
    }

    fn packet_amplitude(&self, t: S) -> Complex<S> {
        let s = self.packet_sigma;
        let x = t * t / (S::lit(2.0) * s * s);
        let peak = S::one() / (S::PI().sqrt() * s).sqrt();
        Complex::from_polar(peak * (-x).exp(), -self.chirp_c * x)
    }

    /// Unnormalized superposition aφ(t − T/2) + bφ(t + T/2).
    pub fn evaluate_raw(&self, t: S) -> Complex<S> {
        let half_t = S::lit(0.5) * self.separation_t;
        self.amp_a * self.packet_amplitude(t - half_t)
            + self.amp_b * self.packet_amplitude(t + half_t)
    }

    pub fn evaluate(&self, t: S) -> Complex<S> {
        self.evaluate_raw(t) * self.inv_sqrt_norm
    }

    /// Upper bound on the mass outside [−h, h] from the two packet tails.
    pub fn tail_mass_outside(&self, h: S) -> S {
        let half = S::lit(0.5);
        let sd = self.packet_sd();
        let mu = half * self.separation_t;
        let one_packet = |m: S| {
            half * erfc((h - m) / (S::SQRT_2() * sd)) + half * erfc((h + m) / (S::SQRT_2() * sd))
        };
        let wa = self.amp_a.norm_sqr();
        let wb = self.amp_b.norm_sqr();
        ((wa * one_packet(mu) + wb * one_packet(-mu)) * self.inv_sqrt_norm * self.inv_sqrt_norm)
            .min(S::one())
    }

    pub fn amplitude_radius(&self, rel: S) -> S {
        S::lit(0.5) * self.separation_t
            + self.packet_sigma * (S::lit(2.0) * (S::one() / rel).ln()).sqrt()
    }
}

/// Tagged union over every supported mode family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TemporalMode<S> {
    GeneralizedGaussian(GeneralizedGaussianMode<S>),
    ChirpedGaussian(ChirpedGaussianMode<S>),
    Sech(SechMode<S>),
    TimeBin(TimeBinQubitMode<S>),
}

impl<S: Scalar> From<GeneralizedGaussianMode<S>> for TemporalMode<S> {
    fn from(m: GeneralizedGaussianMode<S>) -> Self {
        TemporalMode::GeneralizedGaussian(m)
    }
}

impl<S: Scalar> From<ChirpedGaussianMode<S>> for TemporalMode<S> {
    fn from(m: ChirpedGaussianMode<S>) -> Self {
        TemporalMode::ChirpedGaussian(m)
    }
}

impl<S: Scalar> From<SechMode<S>> for TemporalMode<S> {
    fn from(m: SechMode<S>) -> Self {
        TemporalMode::Sech(m)
    }
}

impl<S: Scalar> From<TimeBinQubitMode<S>> for TemporalMode<S> {
    fn from(m: TimeBinQubitMode<S>) -> Self {
        TemporalMode::TimeBin(m)
    }
}

/// Envelope summary used to size grids: one packet's SD and chirp, plus the
/// offset of the packet centres from the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope<S> {
    pub sd: S,
    pub chirp_c: S,
    pub offset: S,
    /// √⟨ω²⟩ of one packet.
    pub omega_rms: S,
}

impl<S: Scalar> Envelope<S> {
    /// Packet SD after propagation, σ_L² = σ² − 2CβL + 4β²L²⟨ω²⟩. Exact for
    /// every single-packet family since ⟨t·φ'(t)⟩ = −C/2 for all of them.
    pub fn propagated_sd(&self, beta: S, length: S) -> S {
        let lb = length * beta;
        let two = S::lit(2.0);
        let var = self.sd * self.sd - two * self.chirp_c * lb
            + S::lit(4.0) * lb * lb * self.omega_rms * self.omega_rms;
        var.max(S::zero()).sqrt()
    }
}

impl<S: Scalar> TemporalMode<S> {
    pub fn evaluate(&self, t: S) -> Complex<S> {
        match self {
            TemporalMode::GeneralizedGaussian(m) => m.evaluate(t),
            TemporalMode::ChirpedGaussian(m) => m.evaluate(t),
            TemporalMode::Sech(m) => m.evaluate(t),
            TemporalMode::TimeBin(m) => m.evaluate(t),
        }
    }

    /// Arrival-time density |ψ(t)|².
    pub fn pdf(&self, t: S) -> S {
        self.evaluate(t).norm_sqr()
    }

    pub fn chirp(&self) -> S {
        match self {
            TemporalMode::GeneralizedGaussian(m) => m.chirp(),
            TemporalMode::ChirpedGaussian(m) => m.chirp(),
            TemporalMode::Sech(m) => m.chirp(),
            TemporalMode::TimeBin(m) => m.chirp(),
        }
    }

    pub fn envelope(&self) -> Envelope<S> {
        let (sd, offset, w2) = match self {
            TemporalMode::GeneralizedGaussian(m) => {
                (m.sigma(), S::zero(), m.spectral_second_moment())
            }
            TemporalMode::ChirpedGaussian(m) => (m.sigma(), S::zero(), m.spectral_second_moment()),
            TemporalMode::Sech(m) => (m.sigma(), S::zero(), m.spectral_second_moment()),
            TemporalMode::TimeBin(m) => (
                m.packet_sd(),
                S::lit(0.5) * m.separation(),
                m.packet().spectral_second_moment(),
            ),
        };
        Envelope {
            sd,
            chirp_c: self.chirp(),
            offset,
            omega_rms: w2.sqrt(),
        }
    }

    /// Gaussian-family modes (plain, chirped, GGD with q = 2 and time-bin
    /// packets) have closed-form tails that the default window already covers.
    pub fn is_gaussian_family(&self) -> bool {
        match self {
            TemporalMode::GeneralizedGaussian(m) => m.shape().to_f64_lossy() == 2.0,
            TemporalMode::ChirpedGaussian(_) | TemporalMode::TimeBin(_) => true,
            TemporalMode::Sech(_) => false,
        }
    }

    /// False when the spectrum decays only algebraically.
    pub fn is_smooth(&self) -> bool {
        match self {
            TemporalMode::GeneralizedGaussian(m) => m.is_smooth(),
            _ => true,
        }
    }

    pub fn tail_mass_outside(&self, h: S) -> S {
        match self {
            TemporalMode::GeneralizedGaussian(m) => m.tail_mass_outside(h),
            TemporalMode::ChirpedGaussian(m) => m.tail_mass_outside(h),
            TemporalMode::Sech(m) => m.tail_mass_outside(h),
            TemporalMode::TimeBin(m) => m.tail_mass_outside(h),
        }
    }

    /// Radius beyond which |ψ| is below `rel` times the peak amplitude.
    pub fn amplitude_radius(&self, rel: S) -> S {
        match self {
            TemporalMode::GeneralizedGaussian(m) => m.amplitude_radius(rel),
            TemporalMode::ChirpedGaussian(m) => m.amplitude_radius(rel),
            TemporalMode::Sech(m) => m.amplitude_radius(rel),
            TemporalMode::TimeBin(m) => m.amplitude_radius(rel),
        }
    }

    /// Points where the integrand of a propagation integral is not smooth or
    /// is concentrated (cusps, packet centres).
    pub fn breakpoints(&self) -> Vec<S> {
        match self {
            TemporalMode::TimeBin(m) => {
                let h = S::lit(0.5) * m.separation();
                vec![-h, S::zero(), h]
            }
            _ => vec![S::zero()],
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            TemporalMode::GeneralizedGaussian(_) => "ggd",
            TemporalMode::ChirpedGaussian(_) => "gaussian",
            TemporalMode::Sech(_) => "sech",
            TemporalMode::TimeBin(_) => "timebin",
        }
    }
}

/// Raw (pre-renormalization) norm of a time-bin qubit.
pub fn exact_overlap_norm<S: Scalar>(qubit: &TimeBinQubitMode<S>) -> S {
    qubit.raw_norm()
}
