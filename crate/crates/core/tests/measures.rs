use std::f64::consts::PI;

use proptest::prelude::*;
use stackshift::indexcalc::{sequences, StepBudget};
use stackshift::measures::*;
use statrs::distribution::{ContinuousCDF, Normal};

fn phi(x: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().cdf(x)
}

/// `∫_{-W}^{W} e^{-σ²t²/2} dt`.
fn gauss_window(sigma: f64, w: f64) -> f64 {
    (2.0 * PI).sqrt() / sigma * (2.0 * phi(sigma * w) - 1.0)
}

/// `∫ sinc²(xT) N(0,1)(dx)` via the triangle transform pair.
fn gauss_sinc2(t: f64) -> f64 {
    let a = 2.0 * t;
    let flat = (2.0 * PI).sqrt() * (2.0 * phi(a) - 1.0);
    let tilt = 2.0 * (1.0 - (-a * a / 2.0).exp());
    (flat - tilt / a) / a
}

#[test]
fn gaussian_window_matches_normal_cdf() {
    for sigma in [0.5, 1.0, 2.0] {
        for w in [0.1, 1.0, 3.0, 20.0] {
            let r = fhat_window_integral(&MeasureSpec::Gaussian { sigma }, w).unwrap();
            let want = gauss_window(sigma, w);
            assert!((r.value - want).abs() <= 1e-9 * want, "sigma {sigma} W {w}: {} vs {want}", r.value);
        }
    }
}

#[test]
fn gaussian_window_error_estimate_covers_true_error() {
    // high-precision values of sqrt(2π)/σ · erf(σW/√2)
    let frozen = [
        (0.5, 3.0, 4.343_413_270_664_066),
        (1.0, 1.0, 1.711_248_783_784_297_6),
        (2.0, 0.1, 0.198_674_628_719_093_25),
        (1.0, 20.0, 2.506_628_274_631_000_5),
    ];
    for (sigma, w, want) in frozen {
        let r = fhat_window_integral(&MeasureSpec::Gaussian { sigma }, w).unwrap();
        let err = (r.value - want).abs();
        assert!(err <= r.error() + 4.0 * f64::EPSILON * want, "sigma {sigma} W {w}: err {err:e}");
    }
}

#[test]
fn gaussian_sinc_moment_matches_closed_form() {
    for t in [0.1, 0.5, 1.0, 2.0, 7.0] {
        let r = sinc_moment(&MeasureSpec::Gaussian { sigma: 1.0 }, t, 2).unwrap();
        let want = gauss_sinc2(t);
        assert!((r.value - want).abs() <= 1e-7 * want, "T {t}: {} vs {want}", r.value);
    }
}

#[test]
fn atomic_measures_are_exact() {
    let a = 1.3;
    let nu = MeasureSpec::Atoms { a };
    for (t, n) in [(0.7, 2u64), (2.0, 5), (0.1, 9)] {
        let r = sinc_moment(&nu, t, n).unwrap();
        let want = 2.0 + 2.0 * (a * t).sin().abs().powi(n as i32) / (a * t).powi(n as i32);
        assert!((r.value - want).abs() <= 4.0 * f64::EPSILON * want);
        assert_eq!(r.error(), 0.0);
        assert_eq!(sinc_moment(&MeasureSpec::Dirac, t, n).unwrap().value, 1.0);
    }
    let w = 2.5;
    let r = fhat_window_integral(&nu, w).unwrap();
    assert_eq!(r.value, 4.0 * w + 4.0 * (a * w).sin() / a);
    assert_eq!(r.error(), 0.0);
}

#[test]
fn triangle_window_approaches_full_mass() {
    // ∫_R sinc²(t/2) dt = 2π; the two tails carry about 4/W
    let w = 400.0;
    let r = fhat_window_integral(&MeasureSpec::Triangle, w).unwrap();
    assert!((r.value - (2.0 * PI - 4.0 / w)).abs() < 1e-4, "{}", r.value);
}

#[test]
fn transforms_are_nonnegative() {
    for nu in MeasureSpec::catalog() {
        for i in 0..10_000 {
            let t = -200.0 + 400.0 * f64::from(i) / 9_999.0;
            assert!(nu.fhat(t) >= 0.0, "{nu} at {t}");
        }
    }
}

#[test]
fn p6_setup_first_block() {
    let s = P6Setup::new(1, StepBudget::default()).unwrap();
    assert_eq!((s.m, s.r_k, s.zeta), (2, 2, 3));
    assert_eq!(s.entries, vec![(2, 3), (3, 2)]);
    assert_eq!(s.cardinality(), 81.0);
    let r = p6_rhs(&MeasureSpec::Dirac, &s, 1.0, 0).unwrap();
    assert_eq!(r.value, 10.125);
    assert_eq!(p6_rhs(&MeasureSpec::Dirac, &s, 1.0, -4).unwrap().value, 81.0 / 128.0);
}

#[test]
fn p6_integrand_is_even() {
    for k in 1..=3 {
        let s = P6Setup::new(k, StepBudget::default()).unwrap();
        for i in 1..200 {
            let y = 0.037 * f64::from(i);
            let (a, b) = (s.normalized_integrand(y), s.normalized_integrand(-y));
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "k {k} y {y}");
        }
        assert_eq!(s.normalized_integrand(0.0), 1.0);
    }
}

#[test]
fn parseval_identity_on_catalog() {
    for nu in MeasureSpec::catalog() {
        let r = parseval_check(&nu, 0.3, 0.7, 1.0, 2).unwrap();
        assert!(r.agrees, "{nu}: {:?}", r);
    }
    assert!(parseval_check(&MeasureSpec::Dirac, 0.0, 0.0, 1.0, 5).is_err());
}

#[test]
fn invalid_arguments() {
    assert!(fhat_window_integral(&MeasureSpec::Dirac, 0.0).is_err());
    assert!(sinc_moment(&MeasureSpec::Dirac, -1.0, 2).is_err());
    assert!(sinc_moment(&MeasureSpec::Dirac, 1.0, 0).is_err());
    assert!(fhat_window_integral(&MeasureSpec::Gaussian { sigma: -1.0 }, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sinc_moment_nonincreasing_in_power(idx in 0usize..5, t in 0.05f64..5.0, n in 1u64..12) {
        let nu = MeasureSpec::catalog()[idx];
        let a = sinc_moment(&nu, t, n).unwrap();
        let b = sinc_moment(&nu, t, n + 1).unwrap();
        prop_assert!(b.value <= a.value + a.error() + b.error() + 1e-12, "{} < {}", a.value, b.value);
    }

    #[test]
    fn sine_subadditivity(n in 1u32..=64, x in -50.0f64..50.0) {
        let lhs = (f64::from(n) * x).sin().abs();
        let rhs = f64::from(n) * x.sin().abs();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 4.0 * f64::EPSILON);
    }

    #[test]
    fn dyadic_sinc_domination(k in 1u64..=2, x in -20.0f64..20.0, t in 0.1f64..4.0) {
        let zeta = sequences(k, StepBudget::default()).unwrap().zeta_at(k);
        let base = sinc(x * t).abs();
        for j in 1..=zeta {
            let n = (2.0f64).powi((zeta + 1 - j) as i32);
            prop_assert!(sinc(n * x * t).abs() <= base * (1.0 + 1e-12) + 1e-15);
        }
    }
}
