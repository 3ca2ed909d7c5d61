use proptest::prelude::*;

use pdl::dispersion::{lookup_medium, Medium, PropagationSpec, SpectralPropagator};
use pdl::metrics::gamma_gaussian;
use pdl::modes::{
    ChirpedGaussianMode, GeneralizedGaussianMode, SechMode, TemporalMode, TimeBinQubitMode,
};
use pdl::qkd::{key_rate, QkdLinkParams};
use pdl::sampling::{moments, plan_grid, sample, SampledWaveFunction};
use pdl::special::binary_entropy;

const PS: f64 = 1e-12;

fn smooth_mode(kind: u8, sigma_ps: f64, c: f64, q_half: u8) -> TemporalMode<f64> {
    let sigma = sigma_ps * PS;
    match kind % 4 {
        0 => ChirpedGaussianMode::new(sigma, c).unwrap().into(),
        1 => GeneralizedGaussianMode::new(sigma, c, 2.0 * f64::from(q_half))
            .unwrap()
            .into(),
        2 => SechMode::new(sigma, c).unwrap().into(),
        _ => TimeBinQubitMode::new(5.0 * PS, 0.25 * PS, c, 1.1, 0.4)
            .unwrap()
            .into(),
    }
}

fn medium(fibre: bool) -> Medium<f64> {
    lookup_medium(if fibre { "smf28e+" } else { "air" }).unwrap()
}

/// Lengths that stay in the regime the figures cover.
fn length(fibre: bool, frac: f64) -> f64 {
    if fibre {
        frac * 1500.0
    } else {
        frac * 500e3
    }
}

fn max_diff(a: &SampledWaveFunction<f64>, b: &SampledWaveFunction<f64>) -> f64 {
    let top = a.amplitudes().iter().map(|z| z.norm()).fold(0.0, f64::max);
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / top
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sampled_norm_is_one(kind in 0u8..4, sigma in 1.0f64..10.0, c in -3.0f64..3.0, q in 1u8..5) {
        let m = smooth_mode(kind, sigma, c, q);
        let g = plan_grid(&m, 0.0, 0.0).unwrap();
        let swf = sample(&m, &g).unwrap();
        prop_assert!((swf.norm() - 1.0).abs() < 1e-9, "norm {}", swf.norm());
    }

    #[test]
    fn ggd_of_shape_two_is_the_chirped_gaussian(sigma in 0.5f64..20.0, c in -5.0f64..5.0, x in -4.0f64..4.0) {
        let t = x * sigma * PS;
        let a = GeneralizedGaussianMode::new(sigma * PS, c, 2.0).unwrap().evaluate(t);
        let b = ChirpedGaussianMode::new(sigma * PS, c).unwrap().evaluate(t);
        let plain = ChirpedGaussianMode::plain(sigma * PS).unwrap().evaluate(t);
        let unchirped = ChirpedGaussianMode::new(sigma * PS, 0.0).unwrap().evaluate(t);
        prop_assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-3 / (sigma * PS).sqrt()));
        prop_assert!((plain - unchirped).norm() <= 1e-15 * plain.norm());
    }

    #[test]
    fn symmetric_modes_have_zero_mean(kind in 0u8..3, sigma in 1.0f64..10.0, c in -3.0f64..3.0, fibre: bool, frac in 0.0f64..1.0) {
        let m = smooth_mode(kind, sigma, c, 2);
        let med = medium(fibre);
        let l = length(fibre, frac);
        let g = plan_grid(&m, med.beta, l).unwrap();
        let out = SpectralPropagator::new(&sample(&m, &g).unwrap())
            .propagate(&PropagationSpec::new(med, l).unwrap())
            .unwrap();
        let r = moments(&out).unwrap();
        // FFT round-off sets the floor once the packet has propagated
        prop_assert!(r.mean.abs() < 1e-9 * r.sd, "mean {:e} sd {:e}", r.mean, r.sd);
    }

    #[test]
    fn propagation_is_unitary(kind in 0u8..4, sigma in 1.0f64..10.0, c in -3.0f64..3.0, fibre: bool, frac in 0.0f64..1.0) {
        let m = smooth_mode(kind, sigma, c, 3);
        let med = medium(fibre);
        let l = length(fibre, frac);
        let g = plan_grid(&m, med.beta, l).unwrap();
        let swf = sample(&m, &g).unwrap();
        let out = SpectralPropagator::new(&swf)
            .propagate(&PropagationSpec::new(med, l).unwrap())
            .unwrap();
        prop_assert!((out.norm() - swf.norm()).abs() <= 1e-9 * swf.norm());
    }

    #[test]
    fn propagation_composes(kind in 0u8..4, sigma in 1.0f64..10.0, c in -3.0f64..3.0, fibre: bool, split in 0.05f64..0.95) {
        let m = smooth_mode(kind, sigma, c, 1);
        let med = medium(fibre);
        let l = length(fibre, 1.0);
        let g = plan_grid(&m, med.beta, l).unwrap();
        let prop = SpectralPropagator::new(&sample(&m, &g).unwrap());
        let full = prop.propagate(&PropagationSpec::new(med.clone(), l).unwrap()).unwrap();
        let first = prop.propagate(&PropagationSpec::new(med.clone(), split * l).unwrap()).unwrap();
        let both = SpectralPropagator::new(&first)
            .propagate(&PropagationSpec::new(med, (1.0 - split) * l).unwrap())
            .unwrap();
        prop_assert!(max_diff(&full, &both) <= 1e-8);
    }

    #[test]
    fn unchirped_density_ignores_the_sign_of_beta(kind in 0u8..3, sigma in 1.0f64..10.0, frac in 0.05f64..1.0) {
        let m = smooth_mode(kind, sigma, 0.0, 2);
        let beta = medium(true).beta;
        let l = length(true, frac);
        let g = plan_grid(&m, beta, l).unwrap();
        let prop = SpectralPropagator::new(&sample(&m, &g).unwrap());
        let a = prop.propagate(&PropagationSpec::with_beta(beta, l).unwrap()).unwrap().pdf();
        let b = prop.propagate(&PropagationSpec::with_beta(-beta, l).unwrap()).unwrap().pdf();
        let top = a.iter().cloned().fold(0.0, f64::max);
        let d = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(d <= 1e-9 * top);
    }

    #[test]
    fn gamma_never_beats_the_chirp_floor(sigma in 0.5f64..20.0, c in -10.0f64..10.0, beta_exp in -31.0f64..-24.0, neg: bool, l in 0.0f64..1e6) {
        let beta = if neg { -1.0 } else { 1.0 } * 10f64.powf(beta_exp);
        let g = gamma_gaussian(sigma * PS, c, beta, l).gamma;
        prop_assert!(g >= (1.0 + c * c).sqrt().recip() * (1.0 - 1e-12));
    }

    #[test]
    fn key_rate_is_bounded_and_falls_with_loss_and_jitter(
        c in -3.0f64..3.0, w in 5.0f64..150.0, l in 0.0f64..30e3,
        atten in 0.0f64..1.0, d_atten in 0.0f64..0.5,
        jitter in 0.0f64..20.0, d_jitter in 0.0f64..10.0,
    ) {
        let link = |a: f64, j: f64| {
            let med = Medium::new("fibre", medium(true).beta, a).unwrap();
            QkdLinkParams::new(ChirpedGaussianMode::new(4.25 * PS, c).unwrap(), med, j * PS, w * PS, 100.0 * PS, l).unwrap()
        };
        let base = key_rate(&link(atten, jitter)).unwrap();
        for v in [base.eta, base.p_sig, base.p_error, base.p_raw, base.qber_q, base.key_rate_k] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!(base.key_rate_k <= base.p_raw);
        let lossier = key_rate(&link(atten + d_atten, jitter)).unwrap();
        prop_assert!(lossier.key_rate_k <= base.key_rate_k * (1.0 + 1e-12));
        let noisier = key_rate(&link(atten, jitter + d_jitter)).unwrap();
        prop_assert!(noisier.key_rate_k <= base.key_rate_k * (1.0 + 1e-12));
    }

    #[test]
    fn distant_neighbours_leave_only_loss(c in -3.0f64..3.0, w in 5.0f64..150.0, l in 0.0f64..30e3) {
        let p = QkdLinkParams::new(
            ChirpedGaussianMode::new(4.25 * PS, c).unwrap(), medium(true), 5.0 * PS, w * PS, 1e-6, l,
        ).unwrap();
        let r = key_rate(&p).unwrap();
        prop_assert!(r.qber_q < 1e-12);
        prop_assert!((r.key_rate_k - 0.5 * r.eta * r.p_sig).abs() <= 1e-12 * r.key_rate_k);
    }
}

#[test]
fn bb84_threshold_is_eleven_percent() {
    let (mut lo, mut hi) = (0.01f64, 0.4f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 1.0 - 2.0 * binary_entropy(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((lo - 0.1100).abs() < 1e-4, "{lo}");
}

#[test]
fn grid_doubling_leaves_smooth_sd_unchanged() {
    let cases: Vec<(TemporalMode<f64>, Medium<f64>, f64)> = vec![
        (
            ChirpedGaussianMode::new(4.25 * PS, 2.0).unwrap().into(),
            medium(true),
            500.0,
        ),
        (
            GeneralizedGaussianMode::new(4.25 * PS, 1.0, 8.0)
                .unwrap()
                .into(),
            medium(false),
            200e3,
        ),
        (
            SechMode::new(4.25 * PS, -1.0).unwrap().into(),
            medium(true),
            1000.0,
        ),
        (
            TimeBinQubitMode::new(5.0 * PS, 0.25 * PS, 2.0, std::f64::consts::FRAC_PI_2, 0.0)
                .unwrap()
                .into(),
            medium(true),
            500.0,
        ),
    ];
    for (m, med, l) in cases {
        let spec = PropagationSpec::new(med.clone(), l).unwrap();
        let g = plan_grid(&m, med.beta, l).unwrap();
        let sd = |grid| {
            let out = SpectralPropagator::new(&sample(&m, &grid).unwrap())
                .propagate(&spec)
                .unwrap();
            moments(&out).unwrap().sd
        };
        let (coarse, fine) = (sd(g), sd(g.refined().unwrap()));
        assert!(
            (coarse - fine).abs() < 1e-8 * fine,
            "{}: {coarse:e} vs {fine:e}",
            m.family_name()
        );
    }
}

#[test]
fn central_and_raw_moments_agree_for_symmetric_modes() {
    for m in [
        TemporalMode::from(ChirpedGaussianMode::new(4.25 * PS, 1.0).unwrap()),
        SechMode::new(4.25 * PS, 0.5).unwrap().into(),
        TimeBinQubitMode::new(5.0 * PS, 0.25 * PS, 0.0, std::f64::consts::FRAC_PI_2, 0.0)
            .unwrap()
            .into(),
    ] {
        let g = plan_grid(&m, 0.0, 0.0).unwrap();
        let swf = sample(&m, &g).unwrap();
        let r = moments(&swf).unwrap();
        let pdf = swf.pdf();
        let raw: f64 = pdf
            .iter()
            .enumerate()
            .map(|(k, p)| g.time(k).powi(2) * p)
            .sum::<f64>()
            * g.dt()
            / swf.norm();
        assert!(
            (raw.sqrt() - r.sd).abs() < 1e-12 * r.sd,
            "{}",
            m.family_name()
        );
    }
}
