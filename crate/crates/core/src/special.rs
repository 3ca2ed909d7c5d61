//! Special functions used by the mode families and the key-rate model.

use crate::scalar::Scalar;

pub fn gamma<S: Scalar>(x: S) -> S {
    S::lit(libm::tgamma(x.to_f64_lossy()))
}

pub fn erf<S: Scalar>(x: S) -> S {
    S::lit(libm::erf(x.to_f64_lossy()))
}

pub fn erfc<S: Scalar>(x: S) -> S {
    S::lit(libm::erfc(x.to_f64_lossy()))
}

/// Upper regularized incomplete gamma function Q(a, x).
pub fn gamma_upper_regularized<S: Scalar>(a: S, x: S) -> S {
    if x <= S::zero() {
        return S::one();
    }
    S::lit(statrs::function::gamma::gamma_ur(
        a.to_f64_lossy(),
        x.to_f64_lossy(),
    ))
}

/// Binary Shannon entropy in bits, continuously extended with h(0) = h(1) = 0.
pub fn binary_entropy<S: Scalar>(q: S) -> S {
    if q <= S::zero() || q >= S::one() {
        return S::zero();
    }
    let one = S::one();
    -(q * q.log2()) - (one - q) * (one - q).log2()
}

/// Probability mass of N(mean, sd²) inside [lo, hi].
///
/// Uses whichever erfc tail is better conditioned so that windows far out in a
/// tail keep full relative precision.
pub fn normal_interval_mass<S: Scalar>(mean: S, sd: S, lo: S, hi: S) -> S {
    if hi <= lo {
        return S::zero();
    }
    if sd <= S::zero() {
        return if mean >= lo && mean <= hi {
            S::one()
        } else {
            S::zero()
        };
    }
    let scale = S::SQRT_2() * sd;
    let a = (lo - mean) / scale;
    let b = (hi - mean) / scale;
    let half = S::lit(0.5);
    if a >= S::zero() {
        half * (erfc(a) - erfc(b))
    } else if b <= S::zero() {
        half * (erfc(-b) - erfc(-a))
    } else {
        half * (erf(b) - erf(a))
    }
}
