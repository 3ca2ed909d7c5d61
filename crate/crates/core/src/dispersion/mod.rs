//! Chromatic-dispersion propagation of temporal wave functions.
//!
//! Three independent routes evaluate ψ_L(t) = ∫S(t, τ, L) ψ(τ) dτ with the
//! kernel S = exp(i(t − τ)²/(4βL)) / (2√(πiβL)):
//!
//! * [`propagate_gaussian_closed_form`] for chirped Gaussians,
//! * [`propagate_spectral`] for any sampled wave function,
//! * [`propagate_quadrature_oracle`] by direct panel quadrature of the kernel.

mod closed_form;
mod quadrature;
mod spectral;

pub use closed_form::propagate_gaussian_closed_form;
pub use quadrature::{
    propagate_quadrature_oracle, propagate_quadrature_oracle_with, QuadratureConfig,
};
pub use spectral::{propagate_spectral, transfer_function, SpectralPropagator};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A dispersive medium: GVD parameter β in s²/m and attenuation in dB/km.
#[derive(Debug, Clone, PartialEq)]
pub struct Medium<S> {
    pub label: String,
    pub beta: S,
    pub atten_db_per_km: S,
}

impl<S: Scalar> Medium<S> {
    pub fn new(label: impl Into<String>, beta: S, atten_db_per_km: S) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::ParameterDomain(format!(
                "GVD beta = {beta:e} is not finite"
            )));
        }
        if !(atten_db_per_km >= S::zero()) || !atten_db_per_km.is_finite() {
            return Err(Error::ParameterDomain(format!(
                "attenuation must be >= 0 dB/km, got {atten_db_per_km}"
            )));
        }
        Ok(Self {
            label: label.into(),
            beta,
            atten_db_per_km,
        })
    }
}

const CATALOG: [(&str, f64, f64); 5] = [
    ("nitrogen", 18.70e-30, 0.0),
    ("air", 20.05e-30, 0.0),
    ("oxygen", 24.76e-30, 0.0),
    ("carbon dioxide", 30.90e-30, 0.0),
    ("smf28e+", -1.15e-26, 0.2),
];

/// Gases at 800 nm and the SMF-28e+ fibre at 1550 nm.
pub fn media_catalog<S: Scalar>() -> Vec<Medium<S>> {
    CATALOG
        .iter()
        .map(|&(label, beta, atten)| Medium {
            label: label.to_string(),
            beta: S::lit(beta),
            atten_db_per_km: S::lit(atten),
        })
        .collect()
}

fn canonical(name: &str) -> String {
    name.chars()
        .filter(|c| !matches!(c, ' ' | '_' | '-'))
        .flat_map(char::to_lowercase)
        .collect()
}

/// Case-insensitive lookup; also accepts n2, o2, co2, smf and smf-28e+.
pub fn lookup_medium<S: Scalar>(name: &str) -> Result<Medium<S>> {
    let key = canonical(name);
    let label = match key.as_str() {
        "n2" => "nitrogen",
        "o2" => "oxygen",
        "co2" => "carbon dioxide",
        "smf" | "smf28" | "fiber" | "fibre" => "smf28e+",
        _ => "",
    };
    media_catalog::<S>()
        .into_iter()
        .find(|m| canonical(&m.label) == key || m.label == label)
        .ok_or_else(|| Error::UnknownMedium {
            name: name.to_string(),
            valid: CATALOG.iter().map(|m| m.0).collect::<Vec<_>>().join(", "),
        })
}

/// A medium and a propagation distance L in metres.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationSpec<S> {
    pub medium: Medium<S>,
    pub length: S,
}

impl<S: Scalar> PropagationSpec<S> {
    pub fn new(medium: Medium<S>, length: S) -> Result<Self> {
        if !(length >= S::zero()) || !length.is_finite() {
            return Err(Error::ParameterDomain(format!(
                "propagation length must be >= 0, got {length:e}"
            )));
        }
        Ok(Self { medium, length })
    }

    /// Propagation through a bare GVD value.
    pub fn with_beta(beta: S, length: S) -> Result<Self> {
        Self::new(Medium::new("custom", beta, S::zero())?, length)
    }

    /// βL in s².
    pub fn beta_l(&self) -> S {
        self.medium.beta * self.length
    }

    /// Zero length or zero GVD: propagation is the identity.
    pub fn is_identity(&self) -> bool {
        self.beta_l() == S::zero()
    }
}
