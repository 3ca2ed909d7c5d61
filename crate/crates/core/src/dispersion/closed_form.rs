use num_complex::Complex;

use super::PropagationSpec;
use crate::modes::ChirpedGaussianMode;
use crate::scalar::Scalar;

/// Propagated chirped Gaussian ψ_L(t), evaluated from the closed forms for
/// normal (β > 0) and anomalous (β < 0) dispersion.
///
/// Both branches share the exponent (1 + iC)t² / (4(C − i)Lβ − 4σ²). The
/// anomalous-branch constant (−2π)^{-1/4} is taken as e^{iπ/4}(2π)^{-1/4},
/// the fourth root for which ψ_L → ψ as L → 0.
pub fn propagate_gaussian_closed_form<S: Scalar>(
    mode: &ChirpedGaussianMode<S>,
    spec: &PropagationSpec<S>,
    t: S,
) -> Complex<S> {
    if spec.is_identity() {
        return mode.evaluate(t);
    }
    let sigma = mode.sigma();
    let s2 = sigma * sigma;
    let c = mode.chirp();
    let lb = spec.beta_l();
    let one = Complex::new(S::one(), S::zero());
    let i = Complex::new(S::zero(), S::one());
    let four = S::lit(4.0);

    let exponent = (one + i * c) * (t * t) / ((Complex::new(c, -S::one()) * lb) * four - four * s2);
    let gauss = exponent.exp();

    if spec.medium.beta > S::zero() {
        let denom_arg = ((one + i * c) * lb - i * s2) / sigma;
        let numer = Complex::new(S::one(), -S::one());
        let scale = S::lit(2.0).powf(S::lit(0.75)) * S::PI().powf(S::lit(0.25));
        numer * gauss / (denom_arg.sqrt() * scale)
    } else {
        let denom_arg = i * ((Complex::new(-c, S::one())) * lb + s2) / sigma;
        let root = Complex::from_polar((S::lit(2.0) * S::PI()).powf(S::lit(-0.25)), S::FRAC_PI_4());
        root * gauss / denom_arg.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::lookup_medium;

    const PS: f64 = 1e-12;

    #[test]
    fn zero_length_is_identity() {
        let m = ChirpedGaussianMode::plain(4.25 * PS).unwrap();
        let spec = PropagationSpec::new(lookup_medium("air").unwrap(), 0.0).unwrap();
        for k in -5..=5 {
            let t = k as f64 * PS;
            assert_eq!(propagate_gaussian_closed_form(&m, &spec, t), m.evaluate(t));
        }
    }

    #[test]
    fn continuous_as_length_vanishes_in_both_regimes() {
        let m = ChirpedGaussianMode::new(4.25 * PS, 1.3).unwrap();
        for beta in [20.05e-30, -1.15e-26] {
            let spec = PropagationSpec::with_beta(beta, 1e-9).unwrap();
            for k in -5..=5 {
                let t = k as f64 * PS;
                let a = propagate_gaussian_closed_form(&m, &spec, t);
                let b = m.evaluate(t);
                assert!(
                    (a - b).norm() < 1e-9 * m.peak_amplitude(),
                    "beta {beta}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn propagated_density_integrates_to_one() {
        let m = ChirpedGaussianMode::new(4.25 * PS, -2.0).unwrap();
        let spec = PropagationSpec::new(lookup_medium("smf").unwrap(), 500.0).unwrap();
        let dt = 0.01 * PS;
        let total: f64 = (-20_000..=20_000)
            .map(|k| propagate_gaussian_closed_form(&m, &spec, k as f64 * dt).norm_sqr())
            .sum::<f64>()
            * dt;
        assert!((total - 1.0).abs() < 1e-10, "{total}");
    }
}
