//! Cross-module checks: both problem directions against each other, and
//! randomized properties of the structures the pipeline relies on.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use specrec_core::charfn::{delta_from_w, find_eigenvalues};
use specrec_core::main_eq::{forward_series, MainEqConfig};
use specrec_core::oracle::oracle_spectrum;
use specrec_core::pipeline::reconstruct_kernel;
use specrec_core::recovery::{m_to_n, n_to_m};
use specrec_core::stability::{perturb, random_direction, random_spectrum, smoothness_diagnostic};
use specrec_core::{GridFunction64, SolverConfig64, Spectrum64};

const PI: f64 = std::f64::consts::PI;

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn random_trig(seed: u64, n: usize, target_norm: f64) -> GridFunction64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coef: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
            )
        })
        .collect();
    let raw = GridFunction64::from_fn(n, |x| {
        let mut v = Complex64::new(0.0, 0.0);
        for (m, (a, b, c, d)) in coef.iter().enumerate() {
            let mx = (m + 1) as f64 * x;
            v += Complex64::new(a * mx.cos() + b * mx.sin(), c * mx.cos() + d * mx.sin());
        }
        v
    })
    .unwrap();
    let norm = raw.norm_weighted_l2();
    raw.scale(re(target_norm / norm))
}

#[test]
fn both_root_searches_find_the_same_head() {
    let a = 0.25;
    let m = GridFunction64::from_fn(1025, |x| re(2.0 * a - a * a * x * x / 2.0)).unwrap();
    let direct = oracle_spectrum(&m, 10, &Default::default())
        .unwrap()
        .spectrum()
        .unwrap();

    let aux = m_to_n(&m, 1e-12, 200).unwrap();
    let cfg = MainEqConfig {
        nu_max: 40,
        ..Default::default()
    };
    let w = forward_series(&aux.n_fn, &cfg).unwrap();
    let via_w = find_eigenvalues(|lambda| delta_from_w(&w, lambda), 10, &Default::default())
        .spectrum()
        .unwrap();

    let mut worst = 0.0f64;
    for k in 1..=10 {
        worst = worst.max((direct.eigenvalue(k) - via_w.eigenvalue(k)).norm());
    }
    assert!(worst < 1e-4, "heads disagree by {worst:.3e}");
}

#[test]
fn oracle_then_reconstruction_returns_a_vanishing_endpoint_kernel() {
    // M(0) = 0 keeps the trace tail small, so a short head suffices.
    let m = GridFunction64::from_fn(513, |x| re(0.05 * x.sin())).unwrap();
    let search = oracle_spectrum(&m, 16, &Default::default()).unwrap();
    let s = search.spectrum().unwrap();
    let cfg = SolverConfig64 {
        grid_points: 513,
        ..Default::default()
    };
    let rec = reconstruct_kernel(&s, &cfg).unwrap();
    let rel = m.sub(&rec.m).unwrap().norm_weighted_l2() / m.norm_weighted_l2();
    assert!(rel < 2e-2, "relative round-trip error {rel:.3e}");
}

#[test]
fn reconstruction_stages_are_mutually_consistent() {
    let s = random_spectrum(5, 8, 0.3).unwrap();
    let cfg = SolverConfig64 {
        grid_points: 257,
        ..Default::default()
    };
    let rec = reconstruct_kernel(&s, &cfg).unwrap();

    // The recovered kernel must map back to the auxiliary kernel the solve
    // produced, and that kernel must reproduce the trace it was fit to.
    let aux = m_to_n(&rec.m, 1e-12, 300).unwrap();
    let dn = aux.n_fn.sub(&rec.n_fn).unwrap().norm_weighted_l2();
    assert!(dn < 1e-8, "auxiliary kernels disagree by {dn:.3e}");

    let w_again = forward_series(&rec.n_fn, &cfg.main_eq()).unwrap();
    let dw = w_again.sub(&rec.w).unwrap().norm_l2();
    assert!(dw < 1e-8, "trace reproduction off by {dw:.3e}");
}

#[test]
fn smoothness_residual_separates_smooth_from_jump_kernels() {
    let opts = Default::default();
    let a = 0.25;
    let smooth = GridFunction64::from_fn(1025, |x| re(2.0 * a - a * a * x * x / 2.0)).unwrap();
    let s_smooth = oracle_spectrum(&smooth, 24, &opts)
        .unwrap()
        .spectrum()
        .unwrap();
    let fit_smooth = smoothness_diagnostic(&s_smooth, None).unwrap();

    let jump = GridFunction64::from_fn(1025, |x| re(if x < PI / 2.0 { 0.5 } else { 0.0 })).unwrap();
    let s_jump = oracle_spectrum(&jump, 24, &opts)
        .unwrap()
        .spectrum()
        .unwrap();
    let fit_jump = smoothness_diagnostic(&s_jump, None).unwrap();

    assert!(
        fit_jump.residual_l2 > 4.0 * fit_smooth.residual_l2,
        "jump residual {:.3e} does not stand out from smooth residual {:.3e}",
        fit_jump.residual_l2,
        fit_smooth.residual_l2
    );
    assert!(fit_smooth.residual_l2 < 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 12,
        .. ProptestConfig::default()
    })]

    #[test]
    fn normalized_perturbations_move_the_quadratic_distance_exactly(
        seed in 0u64..1_000,
        delta in 1e-6f64..1e-1,
    ) {
        let s = random_spectrum::<f64>(seed, 10, 0.4).unwrap();
        let d = random_direction(seed ^ 0x9e37_79b9, 10);
        let moved = perturb(&s, &d, delta).unwrap();
        let dist = s.lambda_distance(&moved);
        prop_assert!((dist - delta).abs() <= 1e-12 * (1.0 + delta));
    }

    #[test]
    fn recovery_round_trips_random_kernels(seed in 0u64..1_000) {
        let n_fn = random_trig(seed, 129, 0.6);
        let m = n_to_m(&n_fn).unwrap();
        let aux = m_to_n(&m, 1e-13, 300).unwrap();
        let err = aux.n_fn.sub(&n_fn).unwrap().norm_weighted_l2();
        prop_assert!(err < 1e-8, "round trip off by {err:.3e}");
    }

    #[test]
    fn ball_radius_is_the_distance_to_the_unperturbed_sequence(
        seed in 0u64..10_000,
    ) {
        let s = random_spectrum::<f64>(seed, 12, 1.0).unwrap();
        let tail = Spectrum64::tail_only(12).unwrap();
        prop_assert!((s.ball_radius() - s.lambda_distance(&tail)).abs() < 1e-12);
        prop_assert!(s.ball_radius() <= 1.0 + 1e-12);
    }

    #[test]
    fn square_root_residuals_never_exceed_the_raw_deviations(
        seed in 0u64..10_000,
    ) {
        let s = random_spectrum::<f64>(seed, 10, 2.0).unwrap();
        for (eps, kappa) in s.epsilons().iter().zip(&s.sqrt_residuals()) {
            prop_assert!(kappa.norm() <= eps.norm() + 1e-12);
        }
    }
}
