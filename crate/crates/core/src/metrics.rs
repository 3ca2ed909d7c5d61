//! Pulse broadening, symbol rate and the chirp optimum.

use serde::Serialize;

use crate::dispersion::{PropagationSpec, SpectralPropagator};
use crate::error::{Error, Result};
use crate::modes::TemporalMode;
use crate::sampling::{
    moments, plan_grid_with, sample, GridConfig, GridSpec, SampledWaveFunction, USABLE_TAIL_MASS,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BroadeningMethod {
    ClosedForm,
    Numeric,
}

impl BroadeningMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            BroadeningMethod::ClosedForm => "closed_form",
            BroadeningMethod::Numeric => "numeric",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BroadeningResult<S> {
    pub sigma0: S,
    pub sigma_l: S,
    pub gamma: S,
    pub method: BroadeningMethod,
}

/// σ_L of a chirped Gaussian: √(L²β² + (σ² − CLβ)²)/σ.
pub fn propagated_sd_gaussian<S: Scalar>(sigma: S, chirp_c: S, beta: S, l: S) -> S {
    let lb = l * beta;
    let s2 = sigma * sigma;
    let d = s2 - chirp_c * lb;
    (lb * lb + d * d).sqrt() / sigma
}

/// Closed-form broadening Γ = √((1 − CLβ/σ²)² + (Lβ/σ²)²) of a chirped Gaussian.
pub fn gamma_gaussian<S: Scalar>(sigma: S, chirp_c: S, beta: S, l: S) -> BroadeningResult<S> {
    let x = l * beta / (sigma * sigma);
    let d = S::one() - chirp_c * x;
    let gamma = (d * d + x * x).sqrt();
    BroadeningResult {
        sigma0: sigma,
        sigma_l: sigma * gamma,
        gamma,
        method: BroadeningMethod::ClosedForm,
    }
}

/// Spectral broadening pipeline for one mode: the mode is sampled once on a
/// grid sized for the longest length and every length costs one inverse FFT.
pub struct NumericBroadening<S: Scalar> {
    propagator: SpectralPropagator<S>,
    beta: S,
    sigma0: S,
    l_max: S,
}

/// Grid widenings tried after a resolution failure.
const WIDEN_RETRIES: usize = 2;

impl<S: Scalar> NumericBroadening<S> {
    pub fn new(mode: &TemporalMode<S>, beta: S, l_max: S) -> Result<Self> {
        Self::with_config(mode, beta, l_max, &GridConfig::default())
    }

    /// Retries with a doubled window while the packet at `l_max` leaves more
    /// than the usable tail mass at the grid edges. The last attempt, or one
    /// whose window can no longer grow, only has to pass the fatal check.
    pub fn with_config(
        mode: &TemporalMode<S>,
        beta: S,
        l_max: S,
        config: &GridConfig,
    ) -> Result<Self> {
        let mut cfg = *config;
        let mut last = None;
        let mut grid = plan_grid_with(mode, beta, l_max, &cfg)?;
        for attempt in 0..=WIDEN_RETRIES {
            cfg.window_sigmas *= 2.0;
            let next = if attempt < WIDEN_RETRIES {
                plan_grid_with(mode, beta, l_max, &cfg)
                    .ok()
                    .filter(|g| *g != grid)
            } else {
                None
            };
            match Self::build(mode, beta, l_max, grid, next.is_some()) {
                Ok(nb) => return Ok(nb),
                Err(Error::Resolution(msg)) => last = Some(Error::Resolution(msg)),
                Err(e) => return Err(e),
            }
            match next {
                Some(g) => grid = g,
                None => break,
            }
        }
        Err(last.expect("at least one attempt"))
    }

    fn build(
        mode: &TemporalMode<S>,
        beta: S,
        l_max: S,
        grid: GridSpec<S>,
        strict: bool,
    ) -> Result<Self> {
        let swf = sample(mode, &grid)?;
        let sigma0 = moments(&swf)?.sd;
        let propagator = SpectralPropagator::new(&swf);
        let nb = Self {
            propagator,
            beta,
            sigma0,
            l_max,
        };
        // the widest packet sits at an end of [0, l_max]
        if l_max > S::zero() {
            let report = moments(&nb.propagated(l_max)?)?;
            let tail = report.edge_tail_mass.to_f64_lossy();
            if strict && tail >= USABLE_TAIL_MASS {
                return Err(Error::Resolution(format!(
                    "edge tail mass {tail:.3e} at the longest length"
                )));
            }
        }
        Ok(nb)
    }

    pub fn grid(&self) -> &GridSpec<S> {
        self.propagator.grid()
    }

    pub fn sigma0(&self) -> S {
        self.sigma0
    }

    pub fn l_max(&self) -> S {
        self.l_max
    }

    /// Sampled ψ_L on the planned grid.
    pub fn propagated(&self, l: S) -> Result<SampledWaveFunction<S>> {
        self.propagator
            .propagate(&PropagationSpec::with_beta(self.beta, l)?)
    }

    fn sigma_at(&self, l: S) -> Result<S> {
        let spec = PropagationSpec::with_beta(self.beta, l)?;
        Ok(moments(&self.propagator.propagate(&spec)?)?.sd)
    }

    pub fn gamma_at(&self, l: S) -> Result<BroadeningResult<S>> {
        if l > self.l_max * S::lit(1.000_001) {
            return Err(Error::ParameterDomain(format!(
                "length {l:e} m exceeds the planned maximum {:e} m",
                self.l_max
            )));
        }
        let sigma_l = if l == S::zero() || self.beta == S::zero() {
            self.sigma0
        } else {
            self.sigma_at(l)?
        };
        Ok(BroadeningResult {
            sigma0: self.sigma0,
            sigma_l,
            gamma: sigma_l / self.sigma0,
            method: BroadeningMethod::Numeric,
        })
    }
}

/// Γ from numeric moments of the spectrally propagated mode, relative to the
/// numeric SD at L = 0.
pub fn gamma_numeric<S: Scalar>(
    mode: &TemporalMode<S>,
    spec: &PropagationSpec<S>,
) -> Result<BroadeningResult<S>> {
    NumericBroadening::new(mode, spec.medium.beta, spec.length)?.gamma_at(spec.length)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChirpOptimum<S> {
    /// Γ dips to 1/√(1 + C²) at `l_min`.
    Interior {
        l_min: S,
        sigma_min: S,
        gamma_min: S,
    },
    /// Cβ ≤ 0: Γ is nondecreasing from L = 0.
    Monotone,
}

impl<S: Scalar> ChirpOptimum<S> {
    pub fn l_min(&self) -> Option<S> {
        match self {
            ChirpOptimum::Interior { l_min, .. } => Some(*l_min),
            ChirpOptimum::Monotone => None,
        }
    }
}

/// Distance of minimal width L_min = Cσ²/((1 + C²)β).
pub fn chirp_optimum<S: Scalar>(sigma: S, chirp_c: S, beta: S) -> ChirpOptimum<S> {
    if !(chirp_c * beta > S::zero()) {
        return ChirpOptimum::Monotone;
    }
    let c2 = S::one() + chirp_c * chirp_c;
    ChirpOptimum::Interior {
        l_min: chirp_c * sigma * sigma / (c2 * beta),
        sigma_min: sigma / c2.sqrt(),
        gamma_min: S::one() / c2.sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolRateResult<S> {
    pub t_symbol: S,
    pub f_symbol: S,
}

/// Three-sigma symbol duration 6σ_L and its reciprocal in baud.
pub fn symbol_rate<S: Scalar>(sigma_l: S) -> Result<SymbolRateResult<S>> {
    if !(sigma_l > S::zero()) {
        return Err(Error::ParameterDomain(format!(
            "symbol rate needs sigma_L > 0, got {sigma_l:e}"
        )));
    }
    let t_symbol = S::lit(6.0) * sigma_l;
    Ok(SymbolRateResult {
        t_symbol,
        f_symbol: t_symbol.recip(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Asymptote {
    LargeC,
    LargeL,
}

/// Three-term expansions of the Gaussian symbol rate for large |C| or large L,
/// evaluated term by term as printed (√(L²β²) kept as |Lβ|).
pub fn symbol_rate_asymptotic<S: Scalar>(
    which: Asymptote,
    sigma: S,
    chirp_c: S,
    beta: S,
    l: S,
) -> S {
    let six = S::lit(6.0);
    let twelve = S::lit(12.0);
    let lb = l * beta;
    let s3 = sigma.powi(3);
    let s5 = sigma.powi(5);
    match which {
        Asymptote::LargeC => {
            let c = chirp_c;
            let root = lb.abs();
            sigma / (six * c * root) + s3 * root / (six * c * c * lb.powi(3))
                - root * (lb * lb * sigma - S::lit(2.0) * s5) / (twelve * c.powi(3) * lb.powi(4))
        }
        Asymptote::LargeL => {
            let c = chirp_c;
            let a = beta * beta * (c * c + S::one());
            sigma / (six * l * a.sqrt())
                + beta * c * s3 / (six * l * l * a.powf(S::lit(1.5)))
                + beta * beta * (S::lit(2.0) * c * c - S::one()) * s5
                    / (twelve * l.powi(3) * a.powf(S::lit(2.5)))
        }
    }
}

/// Exact Gaussian symbol rate 1/(6σ_L) with σ_L from the closed form.
pub fn symbol_rate_gaussian<S: Scalar>(sigma: S, chirp_c: S, beta: S, l: S) -> S {
    (S::lit(6.0) * propagated_sd_gaussian(sigma, chirp_c, beta, l)).recip()
}
