use serde::{Deserialize, Serialize};

use crate::dispersion::{lookup_medium, Medium};
use crate::error::{Error, Result};
use crate::qkd::{AttenuationConvention, QberConvention};
use crate::units::{FS2_PER_M, KM, PS, PS2_PER_KM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// Γ and σ_L against L.
    Broadening,
    /// f_S = 1/(6σ_L) against L.
    SymbolRate,
    /// BB84 key-rate model against L.
    Keyrate,
    /// |ψ_L(t)|² traces at the listed lengths.
    Pdf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    #[default]
    Gaussian,
    Ggd,
    Sech,
    Timebin,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::Ggd => "ggd",
            Family::Sech => "sech",
            Family::Timebin => "timebin",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    /// Closed form for Gaussians, spectral pipeline for everything else.
    #[default]
    Auto,
    ClosedForm,
    Numeric,
}

fn d_sigma() -> Vec<f64> {
    vec![4.25]
}
fn d_zero() -> Vec<f64> {
    vec![0.0]
}
fn d_q() -> Vec<f64> {
    vec![2.0]
}
fn d_sep() -> Vec<f64> {
    vec![5.0]
}
fn d_packet() -> Vec<f64> {
    vec![0.25]
}
fn d_theta() -> Vec<f64> {
    vec![std::f64::consts::FRAC_PI_2]
}
fn d_media() -> Vec<String> {
    vec!["air".into()]
}
fn d_points() -> usize {
    200
}
fn d_jitter() -> f64 {
    5.0
}
fn d_window() -> Vec<f64> {
    vec![50.0]
}
fn d_slot() -> f64 {
    100.0
}
fn d_t_points() -> usize {
    601
}

/// One figure-style parameter sweep. Every dimensioned key carries its unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SweepConfig {
    pub experiment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub metric: Metric,
    #[serde(default)]
    pub mode: Family,
    #[serde(default = "d_sigma")]
    pub sigma_ps: Vec<f64>,
    #[serde(default = "d_zero")]
    pub chirp: Vec<f64>,
    #[serde(default = "d_q")]
    pub shape_q: Vec<f64>,
    #[serde(default = "d_sep")]
    pub separation_ps: Vec<f64>,
    #[serde(default = "d_packet")]
    pub packet_sigma_ps: Vec<f64>,
    #[serde(default = "d_theta")]
    pub theta_rad: Vec<f64>,
    #[serde(default = "d_zero")]
    pub phi_rad: Vec<f64>,

    #[serde(default = "d_media")]
    pub media: Vec<String>,
    /// Explicit GVD values; replace `media` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_fs2_per_m: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_ps2_per_km: Option<Vec<f64>>,
    #[serde(default)]
    pub atten_db_per_km: f64,

    #[serde(default)]
    pub l_min_km: f64,
    #[serde(default)]
    pub l_max_km: f64,
    #[serde(default = "d_points")]
    pub l_points: usize,
    #[serde(default)]
    pub l_axis: Axis,
    /// Explicit lengths; replace the range when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_km: Option<Vec<f64>>,

    #[serde(default)]
    pub method: MethodChoice,

    #[serde(default = "d_jitter")]
    pub jitter_ps: f64,
    #[serde(default = "d_window")]
    pub window_ps: Vec<f64>,
    #[serde(default = "d_slot")]
    pub slot_separation_ps: f64,
    #[serde(default)]
    pub attenuation_convention: AttenuationConvention,
    #[serde(default)]
    pub qber_convention: QberConvention,
    /// Monte Carlo slots per key-rate point; 0 disables the check columns.
    #[serde(default)]
    pub monte_carlo_samples: usize,
    #[serde(default)]
    pub seed: u64,

    #[serde(default)]
    pub t_min_ps: f64,
    #[serde(default)]
    pub t_max_ps: f64,
    #[serde(default = "d_t_points")]
    pub t_points: usize,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let lists: [(&str, &Vec<f64>); 8] = [
            ("sigma-ps", &self.sigma_ps),
            ("chirp", &self.chirp),
            ("shape-q", &self.shape_q),
            ("separation-ps", &self.separation_ps),
            ("packet-sigma-ps", &self.packet_sigma_ps),
            ("theta-rad", &self.theta_rad),
            ("phi-rad", &self.phi_rad),
            ("window-ps", &self.window_ps),
        ];
        for (key, v) in lists {
            if v.is_empty() {
                return bad(format!("{key} must not be empty"));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return bad(format!("{key} has a non-finite entry"));
            }
        }
        self.media()?;
        match &self.l_km {
            Some(v) if v.is_empty() => return bad("l-km must not be empty".into()),
            Some(v) if v.iter().any(|x| !(*x >= 0.0)) => {
                return bad("l-km entries must be >= 0".into())
            }
            Some(_) => {}
            None => {
                if self.l_points < 2 {
                    return bad(format!("l-points must be >= 2, got {}", self.l_points));
                }
                if !(self.l_min_km >= 0.0 && self.l_max_km > self.l_min_km) {
                    return bad(format!(
                        "need 0 <= l-min-km < l-max-km, got [{}, {}]",
                        self.l_min_km, self.l_max_km
                    ));
                }
                if self.l_axis == Axis::Log && self.l_min_km <= 0.0 {
                    return bad("a log length axis needs l-min-km > 0".into());
                }
            }
        }
        if self.metric == Metric::Pdf && (self.t_points < 2 || !(self.t_max_ps > self.t_min_ps)) {
            return bad("pdf traces need t-min-ps < t-max-ps and t-points >= 2".into());
        }
        if self.metric == Metric::Keyrate {
            let gaussian = match self.mode {
                Family::Gaussian => true,
                Family::Ggd => self.shape_q.iter().all(|&q| q == 2.0),
                _ => false,
            };
            if !gaussian {
                return bad("the key-rate model needs Gaussian modes".into());
            }
        }
        Ok(())
    }

    /// Media in sweep order, from labels or explicit GVD values.
    pub fn media(&self) -> Result<Vec<Medium<f64>>> {
        let custom = |betas: &Vec<f64>, scale: f64| {
            betas
                .iter()
                .map(|&b| Medium::new("custom", b * scale, self.atten_db_per_km))
                .collect::<Result<Vec<_>>>()
        };
        let media = match (&self.beta_fs2_per_m, &self.beta_ps2_per_km) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give beta-fs2-per-m or beta-ps2-per-km, not both".into(),
                ))
            }
            (Some(b), None) => custom(b, FS2_PER_M)?,
            (None, Some(b)) => custom(b, PS2_PER_KM)?,
            (None, None) => self
                .media
                .iter()
                .map(|m| lookup_medium(m))
                .collect::<Result<Vec<_>>>()?,
        };
        if media.is_empty() {
            return Err(Error::Config("no medium given".into()));
        }
        Ok(media)
    }

    /// Propagation lengths in metres.
    pub fn lengths_m(&self) -> Vec<f64> {
        if let Some(list) = &self.l_km {
            return list.iter().map(|l| l * KM).collect();
        }
        let n = self.l_points;
        let (a, b) = (self.l_min_km * KM, self.l_max_km * KM);
        (0..n)
            .map(|k| {
                let s = k as f64 / (n - 1) as f64;
                if k == n - 1 {
                    return b;
                }
                match self.l_axis {
                    Axis::Linear => a + (b - a) * s,
                    Axis::Log => (a.ln() + (b.ln() - a.ln()) * s).exp(),
                }
            })
            .collect()
    }

    pub fn times_s(&self) -> Vec<f64> {
        let n = self.t_points;
        (0..n)
            .map(|k| {
                (self.t_min_ps + (self.t_max_ps - self.t_min_ps) * k as f64 / (n - 1) as f64) * PS
            })
            .collect()
    }
}
