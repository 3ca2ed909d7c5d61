//! BB84 key-rate model for Gaussian photons in a dispersive, lossy channel.
//!
//! A photon sent in one slot arrives with density p_L (Gaussian, SD σ_L) and
//! is registered through a Gaussian jitter profile of SD σ_d. Detection
//! windows of width w are centred on each slot; photons from the slots at ±Θ
//! leak into the window and produce errors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dispersion::Medium;
use crate::error::{Error, Result};
use crate::metrics::propagated_sd_gaussian;
use crate::modes::ChirpedGaussianMode;
use crate::scalar::Scalar;
use crate::special::{binary_entropy, erf, normal_interval_mass};

/// How the attenuation coefficient turns into a transmittance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttenuationConvention {
    /// η = 10^(−α̃ L_km / 10), α̃ in dB/km.
    #[default]
    Db,
    /// η = 10^(−α̃ L_km).
    Literal,
}

/// Which events enter the numerator of the bit error rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QberConvention {
    /// Q = ¼·p_error(1 − η p_sig)/p_raw, capped at ½.
    #[default]
    Printed,
    /// Q = ¼·η·p_error(1 − η p_sig)/p_raw: only neighbour photons that
    /// survive the channel count as errors.
    Sifted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QkdLinkParams<S> {
    pub mode: ChirpedGaussianMode<S>,
    pub medium: Medium<S>,
    pub jitter_sigma_d: S,
    pub window_w: S,
    pub separation_theta: S,
    pub length_l: S,
    pub attenuation: AttenuationConvention,
    pub qber: QberConvention,
}

impl<S: Scalar> QkdLinkParams<S> {
    pub fn new(
        mode: ChirpedGaussianMode<S>,
        medium: Medium<S>,
        jitter_sigma_d: S,
        window_w: S,
        separation_theta: S,
        length_l: S,
    ) -> Result<Self> {
        let p = Self {
            mode,
            medium,
            jitter_sigma_d,
            window_w,
            separation_theta,
            length_l,
            attenuation: AttenuationConvention::default(),
            qber: QberConvention::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, what: &str, v: S| {
            if ok && v.is_finite() {
                Ok(())
            } else {
                Err(Error::ParameterDomain(format!(
                    "{what} out of range: {v:e}"
                )))
            }
        };
        check(
            self.jitter_sigma_d >= S::zero(),
            "jitter sigma_d",
            self.jitter_sigma_d,
        )?;
        check(self.window_w > S::zero(), "window w", self.window_w)?;
        check(
            self.separation_theta > S::zero(),
            "separation Theta",
            self.separation_theta,
        )?;
        check(self.length_l >= S::zero(), "length L", self.length_l)
    }

    pub fn with_window(&self, w: S) -> Self {
        Self {
            window_w: w,
            ..self.clone()
        }
    }

    pub fn with_length(&self, l: S) -> Self {
        Self {
            length_l: l,
            ..self.clone()
        }
    }

    /// σ_L of the propagated photon.
    pub fn sigma_l(&self) -> S {
        propagated_sd_gaussian(
            self.mode.sigma(),
            self.mode.chirp(),
            self.medium.beta,
            self.length_l,
        )
    }

    pub fn sigma_eff(&self) -> S {
        effective_detection_sd(self.sigma_l(), self.jitter_sigma_d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QkdRateResult<S> {
    pub sigma_l: S,
    pub sigma_eff: S,
    pub eta: S,
    pub p_sig: S,
    pub p_error: S,
    pub p_raw: S,
    pub qber_q: S,
    /// The printed QBER exceeded ½ and was capped.
    pub qber_capped: bool,
    pub key_rate_k: S,
}

/// SD of the Gaussian p_L convolved with a Gaussian jitter profile.
pub fn effective_detection_sd<S: Scalar>(sigma_l: S, sigma_d: S) -> S {
    sigma_l.hypot(sigma_d)
}

fn window_mass<S: Scalar>(center: S, sd: S, w: S) -> S {
    let h = S::lit(0.5) * w;
    normal_interval_mass(center, sd, -h, h)
}

/// Probability that the slot's own photon lands in its window, erf(w/(2√2 σ_eff)).
pub fn p_signal<S: Scalar>(params: &QkdLinkParams<S>) -> S {
    let sd = params.sigma_eff();
    if sd == S::zero() {
        return S::one();
    }
    erf(params.window_w / (S::lit(2.0) * S::SQRT_2() * sd))
}

/// Window masses e₊, e₋ of the neighbours centred at ∓Θ.
pub fn neighbor_masses<S: Scalar>(params: &QkdLinkParams<S>) -> (S, S) {
    let sd = params.sigma_eff();
    let th = params.separation_theta;
    (
        window_mass(-th, sd, params.window_w),
        window_mass(th, sd, params.window_w),
    )
}

/// e₊ + e₋ − 2e₊e₋.
pub fn p_error_neighbors<S: Scalar>(params: &QkdLinkParams<S>) -> S {
    let (ep, em) = neighbor_masses(params);
    ep + em - S::lit(2.0) * ep * em
}

pub fn transmittance<S: Scalar>(atten_db_per_km: S, l: S, convention: AttenuationConvention) -> S {
    let exponent = atten_db_per_km * l / S::lit(1e3);
    let exponent = match convention {
        AttenuationConvention::Db => exponent / S::lit(10.0),
        AttenuationConvention::Literal => exponent,
    };
    S::lit(10.0).powf(-exponent)
}

pub fn key_rate<S: Scalar>(params: &QkdLinkParams<S>) -> Result<QkdRateResult<S>> {
    params.validate()?;
    let sigma_l = params.sigma_l();
    let sigma_eff = effective_detection_sd(sigma_l, params.jitter_sigma_d);
    let eta = transmittance(
        params.medium.atten_db_per_km,
        params.length_l,
        params.attenuation,
    );
    let p_sig = p_signal(params);
    let p_error = p_error_neighbors(params);
    let half = S::lit(0.5);
    let quarter = S::lit(0.25);
    let miss = S::one() - eta * p_sig;
    let p_raw = half * eta * (p_sig + p_error * miss);

    let (qber_q, qber_capped) = if p_raw > S::zero() {
        let q = match params.qber {
            QberConvention::Printed => quarter * p_error * miss / p_raw,
            QberConvention::Sifted => quarter * eta * p_error * miss / p_raw,
        };
        if q > half {
            (half, true)
        } else {
            (q, false)
        }
    } else {
        (S::zero(), false)
    };
    let key_rate_k = (p_raw * (S::one() - S::lit(2.0) * binary_entropy(qber_q))).max(S::zero());
    Ok(QkdRateResult {
        sigma_l,
        sigma_eff,
        eta,
        p_sig,
        p_error,
        p_raw,
        qber_q,
        qber_capped,
        key_rate_k,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub n_samples: usize,
    pub p_sig_hat: f64,
    pub e_plus_hat: f64,
    pub e_minus_hat: f64,
    /// Both neighbours inside the window.
    pub joint_hat: f64,
    /// Exactly one neighbour inside the window.
    pub p_error_hat: f64,
    pub stderr_sig: f64,
    pub stderr_error: f64,
}

pub const MONTE_CARLO_MIN_SAMPLES: usize = 10_000;

/// Simulates n slots: one signal photon and both neighbours per slot, each
/// with Gaussian arrival spread and detector jitter.
pub fn monte_carlo_oracle<S: Scalar>(
    params: &QkdLinkParams<S>,
    n_samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if n_samples < MONTE_CARLO_MIN_SAMPLES {
        return Err(Error::ParameterDomain(format!(
            "Monte Carlo needs at least {MONTE_CARLO_MIN_SAMPLES} samples, got {n_samples}"
        )));
    }
    params.validate()?;
    let sigma_l = params.sigma_l().to_f64_lossy();
    let sigma_d = params.jitter_sigma_d.to_f64_lossy();
    let theta = params.separation_theta.to_f64_lossy();
    let h = 0.5 * params.window_w.to_f64_lossy();
    let bad = |e: rand_distr::NormalError| Error::ParameterDomain(e.to_string());
    let spread = Normal::new(0.0, sigma_l).map_err(bad)?;
    let jitter = Normal::new(0.0, sigma_d).map_err(bad)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arrival = |center: f64| center + spread.sample(&mut rng) + jitter.sample(&mut rng);

    let (mut sig, mut plus, mut minus, mut joint, mut error) =
        (0usize, 0usize, 0usize, 0usize, 0usize);
    for _ in 0..n_samples {
        let s = arrival(0.0).abs() <= h;
        let p = arrival(-theta).abs() <= h;
        let m = arrival(theta).abs() <= h;
        sig += usize::from(s);
        plus += usize::from(p);
        minus += usize::from(m);
        joint += usize::from(p && m);
        error += usize::from(p != m);
    }
    let n = n_samples as f64;
    let frac = |k: usize| k as f64 / n;
    let stderr = |p: f64| (p * (1.0 - p) / n).sqrt();
    let p_sig_hat = frac(sig);
    let p_error_hat = frac(error);
    Ok(MonteCarloEstimate {
        n_samples,
        p_sig_hat,
        e_plus_hat: frac(plus),
        e_minus_hat: frac(minus),
        joint_hat: frac(joint),
        p_error_hat,
        stderr_sig: stderr(p_sig_hat),
        stderr_error: stderr(p_error_hat),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowOptimum<S> {
    pub w_best: S,
    pub k_best: S,
    /// Every window on the grid gives a zero key rate.
    pub all_zero: bool,
}

/// Grid argmax of 𝒦 over detection windows; ties go to the smaller window.
pub fn optimize_window<S: Scalar>(
    params: &QkdLinkParams<S>,
    w_grid: &[S],
) -> Result<WindowOptimum<S>> {
    if w_grid.is_empty() {
        return Err(Error::ParameterDomain("window grid is empty".into()));
    }
    let mut grid = w_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut best: Option<(S, S)> = None;
    for &w in &grid {
        let k = key_rate(&params.with_window(w))?.key_rate_k;
        if best.is_none_or(|(_, kb)| k > kb) {
            best = Some((w, k));
        }
    }
    let (w_best, k_best) = best.expect("grid is nonempty");
    Ok(WindowOptimum {
        w_best,
        k_best,
        all_zero: k_best == S::zero(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::lookup_medium;

    const PS: f64 = 1e-12;

    fn baseline(w_ps: f64, l_m: f64, chirp: f64) -> QkdLinkParams<f64> {
        QkdLinkParams::new(
            ChirpedGaussianMode::new(4.25 * PS, chirp).unwrap(),
            lookup_medium("smf28e+").unwrap(),
            5.0 * PS,
            w_ps * PS,
            100.0 * PS,
            l_m,
        )
        .unwrap()
    }

    #[test]
    fn effective_sd() {
        assert_eq!(effective_detection_sd(4.25 * PS, 0.0), 4.25 * PS);
        let s = effective_detection_sd(4.25f64, 5.0);
        assert!((s - 6.562).abs() < 1e-3);
    }

    #[test]
    fn signal_probability_at_the_source() {
        let p = p_signal(&baseline(50.0, 0.0, 0.0));
        assert!((p - 0.99986).abs() < 1e-5, "{p}");
        let p = p_signal(&baseline(5.0, 0.0, 0.0));
        assert!((p - 0.296_774_237).abs() < 1e-8, "{p}");
        assert!((p_signal(&baseline(1e6, 0.0, 0.0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn neighbor_errors_are_symmetric_and_tiny_at_the_source() {
        let params = baseline(50.0, 0.0, 0.0);
        let (ep, em) = neighbor_masses(&params);
        assert_eq!(ep, em);
        let sd = params.sigma_eff();
        let direct = 0.5
            * (crate::special::erfc(75.0 * PS / (2f64.sqrt() * sd))
                - crate::special::erfc(125.0 * PS / (2f64.sqrt() * sd)));
        assert!(((ep - direct) / direct).abs() < 1e-12);
        assert!(p_error_neighbors(&params) < 1e-25);
        assert!(p_error_neighbors(&baseline(1e-9, 3e3, 0.0)) < 1e-9);
    }

    #[test]
    fn transmittance_conventions() {
        assert_eq!(transmittance(0.2, 0.0, AttenuationConvention::Db), 1.0);
        assert!((transmittance(0.2f64, 50e3, AttenuationConvention::Db) - 0.1).abs() < 1e-15);
        assert!((transmittance(0.2f64, 100e3, AttenuationConvention::Db) - 0.01).abs() < 1e-16);
        assert!(
            (transmittance(0.2f64, 50e3, AttenuationConvention::Literal) - 1e-10).abs() < 1e-24
        );
    }

    #[test]
    fn lossless_error_free_limit() {
        let r = key_rate(&baseline(50.0, 0.0, 0.0)).unwrap();
        assert!(r.qber_q < 1e-25);
        assert!((r.key_rate_k - r.p_sig / 2.0).abs() < 1e-12);
        assert!(r.key_rate_k <= r.p_raw);
    }

    #[test]
    fn printed_qber_is_capped_when_loss_dominates() {
        let r = key_rate(&baseline(50.0, 50e3, 0.0)).unwrap();
        assert!(r.qber_capped);
        assert_eq!(r.qber_q, 0.5);
        assert_eq!(r.key_rate_k, 0.0);
        let mut p = baseline(50.0, 50e3, 0.0);
        p.qber = QberConvention::Sifted;
        let s = key_rate(&p).unwrap();
        assert!(!s.qber_capped && s.qber_q <= 0.5);
    }

    #[test]
    fn window_ordering_at_short_range() {
        let k = |w| key_rate(&baseline(w, 5e3, 0.0)).unwrap().key_rate_k;
        assert!(k(50.0) > k(5.0) && k(50.0) > k(150.0));
    }

    #[test]
    fn optimizer_picks_fifty_ps_at_short_range() {
        let p = baseline(50.0, 5e3, 0.0);
        let grid = [5.0 * PS, 15.0 * PS, 50.0 * PS, 150.0 * PS];
        let best = optimize_window(&p, &grid).unwrap();
        assert_eq!(best.w_best, 50.0 * PS);
        assert!(!best.all_zero);
    }

    #[test]
    fn optimizer_ties_and_singletons() {
        let p = baseline(50.0, 5e3, 0.0);
        let one = optimize_window(&p, &[15.0 * PS]).unwrap();
        assert_eq!(one.w_best, 15.0 * PS);
        let far = baseline(50.0, 80e3, 0.0);
        let all = optimize_window(&far, &[150.0 * PS, 5.0 * PS, 50.0 * PS]).unwrap();
        assert!(all.all_zero);
        assert_eq!(all.w_best, 5.0 * PS);
        assert!(optimize_window(&p, &[]).is_err());
    }

    #[test]
    fn monte_carlo_is_seeded_and_consistent() {
        let p = baseline(50.0, 20e3, 0.0);
        let a = monte_carlo_oracle(&p, 200_000, 7).unwrap();
        let b = monte_carlo_oracle(&p, 200_000, 7).unwrap();
        assert_eq!(a, b);
        assert!((a.p_sig_hat - p_signal(&p)).abs() < 4.0 * a.stderr_sig);
        assert!((a.p_error_hat - p_error_neighbors(&p)).abs() < 4.0 * a.stderr_error);
        assert!(monte_carlo_oracle(&p, 10, 7).is_err());
    }

    #[test]
    fn narrow_pulse_without_jitter_always_hits() {
        let mut p = baseline(50.0, 0.0, 0.0);
        p.mode = ChirpedGaussianMode::plain(0.01 * PS).unwrap();
        p.jitter_sigma_d = 0.0;
        let est = monte_carlo_oracle(&p, 10_000, 1).unwrap();
        assert_eq!(est.p_sig_hat, 1.0);
    }
}
