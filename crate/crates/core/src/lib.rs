//! Chromatic dispersion of single-photon temporal wave functions.
//!
//! Mode families ([`modes`]) are sampled on uniform grids ([`sampling`]),
//! propagated through dispersive media ([`dispersion`]) and summarised as
//! broadening, symbol rate ([`metrics`]) and BB84 key rate ([`qkd`]).
//! [`runner`] turns parameter grids into CSV tables.
//!
//! Everything is generic over the floating-point type; the aliases below fix
//! it to `f64`.

// `!(x > 0.0)` is how parameter checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dispersion;
pub mod error;
pub mod metrics;
pub mod modes;
pub mod qkd;
pub mod runner;
pub mod sampling;
pub mod scalar;
pub mod special;
pub mod units;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type GeneralizedGaussianMode = modes::GeneralizedGaussianMode<f64>;
pub type ChirpedGaussianMode = modes::ChirpedGaussianMode<f64>;
pub type SechMode = modes::SechMode<f64>;
pub type TimeBinQubitMode = modes::TimeBinQubitMode<f64>;
pub type TemporalMode = modes::TemporalMode<f64>;
pub type GridSpec = sampling::GridSpec<f64>;
pub type SampledWaveFunction = sampling::SampledWaveFunction<f64>;
pub type MomentReport = sampling::MomentReport<f64>;
pub type Medium = dispersion::Medium<f64>;
pub type PropagationSpec = dispersion::PropagationSpec<f64>;
pub type BroadeningResult = metrics::BroadeningResult<f64>;
pub type SymbolRateResult = metrics::SymbolRateResult<f64>;
pub type ChirpOptimum = metrics::ChirpOptimum<f64>;
pub type QkdLinkParams = qkd::QkdLinkParams<f64>;
pub type QkdRateResult = qkd::QkdRateResult<f64>;
