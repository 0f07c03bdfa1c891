use anharmonic::gauge::*;
use anharmonic::C64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn half() -> GaugeSpec {
    GaugeSpec::new(1.0, 0.5).unwrap()
}

fn third() -> GaugeSpec {
    GaugeSpec::new(1.0, 1.0 / 3.0).unwrap()
}

#[test]
fn zeros_follow_the_power_law() {
    assert_eq!(zero(&half(), 4), 16.0);
    assert!((zero(&GaugeSpec::new(2.0, 0.5).unwrap(), 2) - 1.0).abs() < 1e-15);
    assert!((zero(&third(), 2) - 8.0).abs() < 1e-13);
    let g = GaugeSpec::new(0.7, 0.4).unwrap();
    for k in 1..50 {
        assert!(zero(&g, k + 1) > zero(&g, k));
    }
}

#[test]
fn spec_validation_rejects_bad_parameters() {
    assert!(GaugeSpec::new(0.0, 0.5).is_err());
    assert!(GaugeSpec::new(1.0, 1.0).is_err());
    assert!(GaugeSpec::new(1.0, 0.0).is_err());
    assert!(half().with_tolerance(1.0).is_err());
    assert!(half().with_max_terms(0).is_err());
}

#[test]
fn f_at_origin_and_at_first_zero() {
    for g in [half(), third(), GaugeSpec::new(2.5, 0.8).unwrap()] {
        let f0 = eval_f(&g, c(0.0, 0.0)).unwrap();
        assert!((f0.value() - 1.0).norm() < 1e-15);
        let fz = eval_f(&g, c(-zero(&g, 1), 0.0)).unwrap();
        assert!(fz.is_zero());
        assert_eq!(fz.value(), c(0.0, 0.0));
    }
}

#[test]
fn f_matches_sinh_euler_product() {
    // a_k = k² gives F(w) = sinh(π√w)/(π√w).
    let g = half();
    let f1 = eval_f(&g, c(1.0, 0.0)).unwrap().value();
    assert!((f1.re - PI.sinh() / PI).abs() < 1e-13 * f1.re);
    assert!(f1.im.abs() < 1e-15);
    for w in [c(3.0, 0.0), c(0.5, 2.0), c(-2.0, 0.3), c(40.0, -25.0)] {
        let x = PI * w.sqrt();
        let want = x.sinh() / x;
        let got = eval_f(&g, w).unwrap().value();
        assert!((got - want).norm() <= 1e-12 * want.norm(), "w={w}: {got} vs {want}");
    }
    // ν = 2: F(w) = sinh(2π√w)/(2π√w)
    let g2 = GaugeSpec::new(2.0, 0.5).unwrap();
    let x = 2.0 * PI * 3.0f64.sqrt();
    let got = eval_f(&g2, c(3.0, 0.0)).unwrap().value().re;
    assert!((got / (x.sinh() / x) - 1.0).abs() < 1e-13);
}

#[test]
fn f_log_form_survives_overflow() {
    let g = GaugeSpec::new(1.0, 0.9).unwrap();
    let f = eval_f(&g, c(1e6, 0.0)).unwrap();
    assert!(f.log_abs > 709.0, "log|F| = {}", f.log_abs);
    assert!(f.log_abs.is_finite());
}

#[test]
fn log_asymptote_values() {
    assert!((log_asymptote(&half(), 1.0, 0.0).unwrap() - PI).abs() < 1e-15);
    let r = 1e4;
    let ratio = eval_f(&half(), c(r, 0.0)).unwrap().log_abs / log_asymptote(&half(), r, 0.0).unwrap();
    assert!((0.97..=1.03).contains(&ratio), "{ratio}");
    assert!(log_asymptote(&half(), 1.0, PI).is_err());
    assert!(log_asymptote(&half(), 1.0, -PI).is_err());
    assert!(log_asymptote(&half(), 0.0, 0.0).is_err());
}

#[test]
fn a_product_at_b_two_is_one_half() {
    for n in [1usize, 2, 3, 5, 10, 37, 200] {
        let a = a_product(n, 2.0, 1e-14).unwrap();
        assert!((a - 0.5).abs() < 1e-13, "n={n}: {a}");
    }
}

#[test]
fn a_product_at_b_four_matches_long_product_and_closed_form() {
    // Brute force: 10⁶ factors of (1 − 1/k⁴); the neglected tail is below 1e-18.
    let mut log_p = 0.0f64;
    for k in 2..=1_000_000u64 {
        log_p += (-(k as f64).powi(-4)).ln_1p();
    }
    let brute = log_p.exp();
    let a = a_product(1, 4.0, 1e-14).unwrap();
    assert!((a - brute).abs() < 1e-8);
    // ∏_{k≥2}(1 − k^{-4}) = sinh(π)/(4π)
    assert!((a - PI.sinh() / (4.0 * PI)).abs() < 1e-14);
    // b = 3: ∏_{k≥2}(1 − k^{-3}) = cosh(√3π/2)/(3π)
    let a3 = a_product(1, 3.0, 1e-14).unwrap();
    assert!((a3 - (3.0f64.sqrt() * PI / 2.0).cosh() / (3.0 * PI)).abs() < 1e-13);
}

#[test]
fn paired_and_direct_forms_agree() {
    for &b in &[2.0, 2.5, 3.0, 4.0, 7.0] {
        for n in [1usize, 2, 6, 15, 40] {
            let p = log_a_paired(n, b, 1e-15).unwrap();
            let d = log_a_direct(n, b, 1e-15).unwrap();
            assert!((p - d).abs() < 1e-11 * (1.0 + p.abs()), "b={b} n={n}: {p} vs {d}");
        }
    }
}

#[test]
fn a_product_rejects_bad_input() {
    assert!(a_product(0, 2.0, 1e-10).is_err());
    assert!(a_product(3, 1.0, 1e-10).is_err());
    assert!(a_product(3, 0.5, 1e-10).is_err());
}

#[test]
fn a_product_bounds_on_either_side_of_two() {
    for n in 1..30usize {
        for &b in &[2.2, 3.0, 5.0] {
            let a = a_product(n, b, 1e-14).unwrap();
            assert!(a > (b / 2.0).powi(n as i32) / b, "b={b} n={n}");
        }
        for &b in &[1.2, 1.5, 1.9] {
            let a = a_product(n, b, 1e-14).unwrap();
            assert!(a > 0.0);
            assert!(a < (b / 2.0).powi(n as i32) / b, "b={b} n={n}");
        }
    }
}

#[test]
fn f_prime_values_and_signs() {
    let g = half();
    // F(w) = sin(πu)/(πu) with w = −u²; dF/dw at u = 1 is 1/2, at u = 2 it is −1/8.
    assert!((f_prime_at_zero(&g, 1).unwrap().value() - 0.5).abs() < 1e-14);
    assert!((f_prime_at_zero(&g, 2).unwrap().value() + 0.125).abs() < 1e-14);
    // General n at ρ = 1/2: F′(−n²) = (−1)^{n−1}/(2n²).
    for n in 1..=50usize {
        let fp = f_prime_at_zero(&g, n).unwrap();
        let want = if n % 2 == 1 { 1.0 } else { -1.0 } / (2.0 * (n * n) as f64);
        assert!((fp.value() - want).abs() < 1e-13 * want.abs());
    }
    let g3 = third();
    for n in 1..=50usize {
        let fp = f_prime_at_zero(&g3, n).unwrap();
        assert_eq!(fp.sign, if n % 2 == 1 { 1.0 } else { -1.0 });
    }
}

#[test]
fn f_prime_matches_numerical_derivative() {
    let g = GaugeSpec::new(1.3, 0.37).unwrap();
    for n in [1usize, 2, 3, 5] {
        let a = zero(&g, n);
        let h = 1e-5 * a;
        let fp = (eval_f(&g, c(-a + h, 0.0)).unwrap().value() - eval_f(&g, c(-a - h, 0.0)).unwrap().value()) / (2.0 * h);
        let want = f_prime_at_zero(&g, n).unwrap().value();
        assert!((fp.re - want).abs() < 1e-7 * want.abs(), "n={n}: {} vs {want}", fp.re);
    }
}

#[test]
fn pfd_at_origin_and_off_axis() {
    let g = third();
    let r = pfd_eval(&g, c(0.0, 0.0), Terms::Adaptive).unwrap();
    assert!((r.value_series - 1.0).norm() < 1e-13);
    let r = pfd_eval(&g, c(2.0, 1.0), Terms::Adaptive).unwrap();
    assert!(r.residual <= 1e-8);
    assert!(r.residual <= 1e-13);
    assert!(matches!(pfd_eval(&half(), c(1.0, 0.0), Terms::Adaptive), Err(GaugeError::UnsupportedRegime(_))));
    assert!(matches!(pfd_eval(&g, c(-8.0, 0.0), Terms::Adaptive), Err(GaugeError::PoleProximity { k: 2, .. })));
}

#[test]
fn pfd_residual_decays_geometrically() {
    let g = third();
    let w = c(1.5, -0.5);
    let res: Vec<f64> = (1..=14).map(|t| pfd_eval(&g, w, Terms::Fixed(t)).unwrap().residual).collect();
    let slope_bound = -PI / (PI / 3.0).tan() / 2.0;
    for t in 4..res.len() {
        assert!(res[t] <= res[t - 1], "{res:?}");
    }
    // log residual drops at least at half the coefficient decay rate.
    let fitted = (res[12].ln() - res[4].ln()) / 8.0;
    assert!(fitted <= slope_bound, "slope {fitted}");
}

#[test]
fn half_closed_form() {
    let g = half();
    let r = pfd_half_eval(&g, c(0.0, 0.0), Terms::Adaptive, Summation::Paired).unwrap();
    assert!((r.value_series - 1.0).norm() < 1e-15);
    let r = pfd_half_eval(&g, c(4.0, 0.0), Terms::Adaptive, Summation::Paired).unwrap();
    let want = 2.0 * PI / (2.0 * PI).sinh();
    assert!((r.value_series.re - want).abs() <= 1e-10);
    assert!(pfd_half_eval(&third(), c(1.0, 0.0), Terms::Adaptive, Summation::Paired).is_err());
}

#[test]
fn paired_beats_unpaired_at_equal_term_count() {
    let g = half();
    for t in [10usize, 100, 1000] {
        let p = pfd_half_eval(&g, c(4.0, 0.0), Terms::Fixed(t), Summation::Paired).unwrap();
        let u = pfd_half_eval(&g, c(4.0, 0.0), Terms::Fixed(t), Summation::Unpaired).unwrap();
        assert!(p.residual < u.residual, "t={t}: {} vs {}", p.residual, u.residual);
    }
}

#[test]
fn kernel_identities() {
    assert!(cauchy_kernel_pfd(&third(), c(3.0, 0.0), c(1.0, 1.0)).unwrap() <= 1e-8);
    assert!(cauchy_kernel_pfd(&half(), c(5.0, 0.0), c(2.0, 0.0)).unwrap() <= 1e-8);
    assert!(matches!(cauchy_kernel_pfd(&third(), c(2.0, 0.0), c(2.0, 0.0)), Err(GaugeError::CoincidentPoints)));
    for (z, w) in [(c(3.0, 0.0), c(1.0, 1.0)), (c(0.7, -1.0), c(4.0, 1.0))] {
        assert_eq!(cauchy_kernel_pfd(&third(), z, w).unwrap(), power_pfd(&third(), z, w, 1).unwrap());
    }
    assert!(power_pfd(&third(), c(2.0, 1.0), c(1.0, 0.0), 2).unwrap() <= 1e-8);
    assert!(power_pfd(&half(), c(2.0, 0.0), c(1.0, 0.0), 2).unwrap() <= 1e-7);
    assert!(power_pfd(&half(), c(1.5, 0.5), c(0.5, -1.0), 3).unwrap() <= 1e-7);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, rng_algorithm: proptest::test_runner::RngAlgorithm::ChaCha, rng_seed: proptest::test_runner::RngSeed::Fixed(0x5eed), ..ProptestConfig::default() })]

    #[test]
    fn zeros_of_f_are_roots(k in 1usize..60, nu in 0.3f64..3.0, rho in 0.2f64..0.95) {
        let g = GaugeSpec::new(nu, rho).unwrap();
        let a = zero(&g, k);
        let f = eval_f(&g, c(-a, 0.0)).unwrap();
        prop_assert!(f.is_zero());
        // Just off the zero, |F| is linear in the offset. Compared in logs: for
        // rho near 1 both sides overflow f64 long before k = 60.
        let h = 1e-9 * a;
        let near = eval_f(&g, c(-a + h, 0.0)).unwrap().log_abs;
        let slope = f_prime_at_zero(&g, k).unwrap().log_abs;
        prop_assert!((near - h.ln() - slope).abs() < 1e-4, "{near} vs {}", h.ln() + slope);
    }

    #[test]
    fn sandwich_for_unit_nu(x in 0.01f64..2000.0, rho in 0.15f64..0.95) {
        let g = GaugeSpec::new(1.0, rho).unwrap();
        let lf = eval_f(&g, c(x, 0.0)).unwrap().log_abs;
        let mid = lf - PI * x.powf(rho) / (PI * rho).sin();
        let lower = -1.0 / rho - x.ln_1p();
        let upper = -(1.0 / rho) * x / (1.0 + x);
        prop_assert!(mid >= lower - 1e-10 && mid <= upper + 1e-10, "{lower} <= {mid} <= {upper}");
    }

    #[test]
    fn rescaling_law(nu in 0.2f64..4.0, rho in 0.2f64..0.9, re in -3.0f64..10.0, im in -5.0f64..5.0) {
        let w = c(re, im);
        let g = GaugeSpec::new(nu, rho).unwrap();
        let g1 = GaugeSpec::new(1.0, rho).unwrap();
        let a = eval_f(&g, w);
        let b = eval_f(&g1, w * nu.powf(1.0 / rho));
        if let (Ok(a), Ok(b)) = (a, b) {
            if !a.is_zero() {
                prop_assert!((a.log_abs - b.log_abs).abs() < 1e-11 * (1.0 + a.log_abs.abs()));
            }
        }
    }

    #[test]
    fn f_prime_sign_alternates(n in 1usize..200, rho in 0.2f64..0.95) {
        let g = GaugeSpec::new(1.0, rho).unwrap();
        let fp = f_prime_at_zero(&g, n).unwrap();
        prop_assert_eq!(fp.sign, if n % 2 == 1 { 1.0 } else { -1.0 });
    }
}
