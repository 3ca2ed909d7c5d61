use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex;

use super::PropagationSpec;
use crate::error::{Error, Result};
use crate::modes::TemporalMode;
use crate::scalar::Scalar;

// 7-point Gauss / 15-point Kronrod pair; nodes on [0, 1], centre last.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Integration stops where |ψ(τ)| falls below this fraction of its peak.
    pub amplitude_cutoff: f64,
    /// Largest kernel phase advance per initial panel, in radians.
    pub max_phase_per_panel: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            amplitude_cutoff: 1e-14,
            max_phase_per_panel: std::f64::consts::FRAC_PI_4,
            rel_tol: 1e-7,
            max_panels: 500_000,
        }
    }
}

/// Kronrod estimate and |Kronrod − Gauss| on [a, b].
fn gauss_kronrod<S: Scalar, F: Fn(S) -> Complex<S>>(f: &F, a: S, b: S) -> (Complex<S>, f64) {
    let half = S::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let f_center = f(center);
    let mut kronrod = f_center * S::lit(WGK[7]);
    let mut gauss = f_center * S::lit(WG[3]);
    for j in 0..7 {
        let dx = half_len * S::lit(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * S::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + pair * S::lit(WG[j / 2]);
        }
    }
    let k = kronrod * half_len;
    let g = gauss * half_len;
    (k, (k - g).norm().to_f64_lossy())
}

struct Panel<S> {
    a: S,
    b: S,
    value: Complex<S>,
    err: f64,
}

impl<S> PartialEq for Panel<S> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<S> Eq for Panel<S> {}
impl<S> PartialOrd for Panel<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S> Ord for Panel<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Initial panel edges: equal kernel-phase steps on each monotone segment,
/// then split further so no panel is wider than `max_width`.
fn initial_edges<S: Scalar>(
    breaks: &[S],
    t: S,
    four_beta_l_abs: S,
    max_phase: S,
    max_width: S,
) -> Vec<S> {
    let mut edges = vec![breaks[0]];
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        let ua = (a - t) * (a - t);
        let ub = (b - t) * (b - t);
        let phase = (ub - ua).abs() / four_beta_l_abs;
        let m = (phase / max_phase).ceil().max(S::one()).to_f64_lossy() as usize;
        let side = if S::lit(0.5) * (a + b) >= t {
            S::one()
        } else {
            -S::one()
        };
        let mut prev = a;
        for j in 1..=m {
            let x = if j == m {
                b
            } else {
                let u = ua + (ub - ua) * S::from_usize_lossy(j) / S::from_usize_lossy(m);
                t + side * u.sqrt()
            };
            let pieces = ((x - prev) / max_width).ceil().max(S::one()).to_f64_lossy() as usize;
            for p in 1..=pieces {
                edges.push(if p == pieces {
                    x
                } else {
                    prev + (x - prev) * S::from_usize_lossy(p) / S::from_usize_lossy(pieces)
                });
            }
            prev = x;
        }
    }
    edges
}

pub fn propagate_quadrature_oracle<S: Scalar>(
    mode: &TemporalMode<S>,
    spec: &PropagationSpec<S>,
    t: S,
) -> Result<Complex<S>> {
    propagate_quadrature_oracle_with(mode, spec, t, &QuadratureConfig::default())
}

/// ψ_L(t) by direct integration of the dispersion kernel against ψ(τ) with
/// globally adaptive Gauss–Kronrod panels.
pub fn propagate_quadrature_oracle_with<S: Scalar>(
    mode: &TemporalMode<S>,
    spec: &PropagationSpec<S>,
    t: S,
    config: &QuadratureConfig,
) -> Result<Complex<S>> {
    if !(spec.length > S::zero()) || spec.medium.beta == S::zero() {
        return Err(Error::ParameterDomain(
            "quadrature oracle needs L > 0 and a nonzero GVD".into(),
        ));
    }
    let beta_l = spec.beta_l();
    let four_bl = S::lit(4.0) * beta_l;
    let i = Complex::new(S::zero(), S::one());
    let prefactor =
        Complex::new(S::one(), S::zero()) / ((i * (S::PI() * beta_l)).sqrt() * S::lit(2.0));
    let integrand = |tau: S| {
        let d = t - tau;
        Complex::from_polar(S::one(), d * d / four_bl) * mode.evaluate(tau)
    };

    let radius = mode.amplitude_radius(S::lit(config.amplitude_cutoff));
    let mut breaks: Vec<S> = vec![-radius, radius];
    breaks.extend(mode.breakpoints().into_iter().filter(|&x| x.abs() < radius));
    if t.abs() < radius {
        breaks.push(t);
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    breaks.dedup();

    let env = mode.envelope();
    let feature = env.sd / (S::one() + env.chirp_c * env.chirp_c).sqrt() * S::lit(0.5);
    let edges = initial_edges(
        &breaks,
        t,
        four_bl.abs(),
        S::lit(config.max_phase_per_panel),
        feature,
    );
    if edges.len() > config.max_panels {
        return Err(Error::Accuracy {
            achieved: f64::INFINITY,
            target: config.rel_tol,
            panels: edges.len() - 1,
        });
    }

    let mut heap = BinaryHeap::with_capacity(edges.len());
    let mut total = Complex::new(S::zero(), S::zero());
    let mut total_err = 0.0f64;
    for pair in edges.windows(2) {
        let (value, err) = gauss_kronrod(&integrand, pair[0], pair[1]);
        total = total + value;
        total_err += err;
        heap.push(Panel {
            a: pair[0],
            b: pair[1],
            value,
            err,
        });
    }

    while total_err > config.rel_tol * total.norm().to_f64_lossy() {
        if heap.len() >= config.max_panels {
            return Err(Error::Accuracy {
                achieved: total_err / total.norm().to_f64_lossy(),
                target: config.rel_tol,
                panels: heap.len(),
            });
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = S::lit(0.5) * (worst.a + worst.b);
        let (lv, le) = gauss_kronrod(&integrand, worst.a, mid);
        let (rv, re) = gauss_kronrod(&integrand, mid, worst.b);
        total = total - worst.value + lv + rv;
        total_err += le + re - worst.err;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: lv,
            err: le,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: rv,
            err: re,
        });
    }
    // recompute the sum once to shed accumulated update rounding
    let sum = heap
        .iter()
        .fold(Complex::new(S::zero(), S::zero()), |acc, p| acc + p.value);
    Ok(prefactor * sum)
}
