use anharmonic::model::*;
use anharmonic::C64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn poly(a: u32, re: &[f64], im: &[f64]) -> OscillatorSpec {
    OscillatorSpec::PolynomialL { a, re_coeffs: re.to_vec(), im_coeffs: im.to_vec() }
}

fn violations(spec: &OscillatorSpec) -> Vec<Violation> {
    match validate(spec) {
        Err(ModelError::Invalid(v)) => v,
        other => panic!("expected violations, got {other:?}"),
    }
}

#[test]
fn validation_accepts_and_rejects() {
    assert!(validate(&poly(1, &[], &[0.0, 1.0])).is_ok());
    let v = violations(&poly(2, &[], &[0.0, 0.0, 0.0, 0.0, 1.0]));
    assert!(v.iter().any(|v| v.constraint.contains("b < 2a")));
    let v = violations(&poly(2, &[], &[0.0, 1.0, -1.0]));
    assert!(v.iter().any(|v| v.constraint.contains("c_b")));
    // Every violation is reported, not just the first.
    let v = violations(&poly(1, &[0.0, 0.0, 0.0, 1.0], &[0.0, 0.0, 0.0, -2.0]));
    assert!(v.len() >= 3, "{v:?}");
    assert!(validate(&OscillatorSpec::Conjugated { b: 1.0, s: 0.5 }).is_err());
    assert!(validate(&OscillatorSpec::Conjugated { b: 2.0, s: 1.0 }).is_err());
    assert!(validate(&OscillatorSpec::OddImaginary { b: 0 }).is_err());
    assert!(validate(&OscillatorSpec::EvenImaginary { b: f64::NAN }).is_err());
}

#[test]
fn unshifted_real_part_only_warns() {
    let w = validate(&poly(1, &[], &[0.0, 1.0])).unwrap().warnings;
    assert_eq!(w.len(), 1);
    let w = validate(&poly(1, &[2.0], &[0.0, 1.0])).unwrap().warnings;
    assert!(w.is_empty());
}

#[test]
fn closed_form_constants() {
    let k = constants(&poly(1, &[], &[0.0, 1.0])).unwrap();
    assert!((k.kappa - 1.0).abs() < 1e-15);
    assert!((k.d - 2.0).abs() < 1e-13);
    assert!((k.sigma.unwrap() - 0.5).abs() < 1e-15);

    let k = constants(&poly(2, &[], &[0.0, 0.0, 1.0])).unwrap();
    assert!((k.tau.unwrap() - 0.25).abs() < 1e-15);
    assert!((k.sigma.unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert!((k.omega0.unwrap() - 1.0 / 6.0).abs() < 1e-15);

    // l = 2: √π Γ(2)/Γ(3/2) = 2.
    let k = constants(&OscillatorSpec::EvenImaginary { b: 2.0 }).unwrap();
    assert!((k.d - 2.0).abs() < 1e-13 && (k.kappa - 1.0).abs() < 1e-15);
    assert!((k.slope_constant.unwrap() - 0.881_373_587_019_543).abs() < 1e-14);
    assert!((k.ray_angle.unwrap() - PI / 4.0).abs() < 1e-15);

    let k = constants(&OscillatorSpec::OddImaginary { b: 1 }).unwrap();
    assert!((k.kappa - 1.2).abs() < 1e-15);
    assert!((k.slope_constant.unwrap() - 1.813_799_364_234_217_8).abs() < 1e-14);
    // B(1/2, 4/3) = Γ(1/2)Γ(4/3)/Γ(11/6), divided by cos(π/6).
    let beta = PI.sqrt() * 0.892_979_511_569_249_2 / 0.940_655_858_256_771_6;
    assert!((k.d - PI / (beta * (PI / 6.0).cos())).abs() < 1e-12);

    let k = constants(&OscillatorSpec::Conjugated { b: 2.0, s: 0.5 }).unwrap();
    assert!((k.projection_exponent.unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn predicted_eigenvalues() {
    let z = predicted_eigenvalue(&poly(1, &[], &[0.0, 1.0]), 10).unwrap();
    assert!((z - c(20.0, 0.0)).norm() < 1e-12);
    let z = predicted_eigenvalue(&OscillatorSpec::SelfAdjointPower { l: 2.0 }, 5).unwrap();
    assert!((z.re - 10.0).abs() < 1e-12);
    let z = predicted_eigenvalue(&OscillatorSpec::EvenImaginary { b: 2.0 }, 3).unwrap();
    assert!((z.norm() - 6.0).abs() < 1e-12 && (z.arg() - PI / 4.0).abs() < 1e-14);
    assert!(predicted_eigenvalue(&poly(1, &[], &[0.0, 1.0]), 0).is_err());
}

#[test]
fn shifted_ho_eigenvalues() {
    assert_eq!(exact_shifted_ho(c(0.0, 0.0), c(0.0, 0.0), 3), c(5.0, 0.0));
    assert_eq!(exact_shifted_ho(c(0.0, 1.0), c(0.0, 0.0), 1), c(1.25, 0.0));
    assert_eq!(exact_shifted_ho(c(2.0, 0.0), c(1.0, 0.0), 2), c(3.0, 0.0));
}

#[test]
fn projection_models() {
    let p = predicted_projection_norm(&poly(1, &[], &[0.0, 1.0]), 16).unwrap();
    let want = 2f64.powf(-0.75) / PI.sqrt() * (4.0 * 2f64.sqrt()).exp() / 2.0;
    assert!((p.value.unwrap() / want - 1.0).abs() < 1e-14);
    let p = predicted_projection_norm(&OscillatorSpec::EvenImaginary { b: 2.0 }, 5).unwrap();
    assert!(matches!(p.model, ProjectionModel::LinearSlope { slope } if (slope - (1.0 + 2f64.sqrt()).ln()).abs() < 1e-15));
    let p = predicted_projection_norm(&OscillatorSpec::OddImaginary { b: 1 }, 5).unwrap();
    assert!(matches!(p.model, ProjectionModel::LinearSlope { slope } if (slope - PI / 3f64.sqrt()).abs() < 1e-15));
    let p = predicted_projection_norm(&poly(2, &[], &[0.0, 0.0, 1.0]), 5).unwrap();
    assert!(matches!(p.model, ProjectionModel::NoClosedModel { sigma: Some(s) } if (s - 1.0 / 3.0).abs() < 1e-15));
}

#[test]
fn potential_values() {
    let v = potential_eval(&poly(1, &[], &[0.0, 1.0]), c(2.0, 0.0)).unwrap();
    assert_eq!(v, c(4.0, 2.0));
    assert!(matches!(
        potential_eval(&OscillatorSpec::EvenImaginary { b: 0.5 }, c(0.0, 1.0)),
        Err(ModelError::RealOnly(_))
    ));
    // Even-integer powers are polynomials and extend to complex arguments.
    let v = potential_eval(&OscillatorSpec::EvenImaginary { b: 2.0 }, c(0.0, 1.0)).unwrap();
    assert_eq!(v, c(0.0, -1.0));
    let v = potential_eval(&OscillatorSpec::OddImaginary { b: 1 }, c(-2.0, 0.0)).unwrap();
    assert_eq!(v, c(0.0, -8.0));
    let (v, _, _) = conjugation_weight(2.0, 0.5, 4.0);
    assert!((v - 2.0).abs() < 1e-15);
}

#[test]
fn turning_points_and_admissibility() {
    let ho = poly(1, &[], &[0.0, 1.0]);
    let (x, y) = turning_points(&ho, c(100.0, 5.0)).unwrap();
    assert!((x - 10.0).abs() < 1e-13 && (y - 5.0).abs() < 1e-15);
    let quart = poly(2, &[], &[0.0, 0.0, 1.0]);
    let (_, y) = turning_points(&quart, c(16.0, 4.0)).unwrap();
    assert!((y - 2.0).abs() < 1e-15);
    assert!(turning_points(&ho, c(0.0, 1.0)).is_err());

    assert!(admissible_region(&ho, c(100.0, 0.0), 0.5, 0.0).unwrap().admissible);
    assert!(!admissible_region(&quart, c(1e4, 0.0), 0.5, 1.0 / 12.0).unwrap().admissible);
    let r = admissible_region(&quart, c(1e4, 40.0), 0.5, 1.0 / 12.0).unwrap();
    assert!(!r.admissible && r.reason.contains("below"));
    assert!(admissible_region(&quart, c(1e4, 48.0), 0.5, 1.0 / 12.0).unwrap().admissible);
    assert!(admissible_region(&quart, c(1e4, 40.0), 0.5, 0.2).is_err());
    assert!(admissible_region(&ho, c(100.0, 0.0), 1.0, 0.0).is_err());
}

#[test]
fn spec_round_trips_through_serde() {
    let specs = [
        poly(2, &[1.0, 0.5], &[0.0, 0.3, 1.0]),
        OscillatorSpec::EvenImaginary { b: 2.5 },
        OscillatorSpec::OddImaginary { b: 1 },
        OscillatorSpec::Conjugated { b: 2.0, s: 0.5 },
        OscillatorSpec::SelfAdjointPower { l: 3.0 },
    ];
    for s in specs {
        let json = serde_json::to_string(&s).unwrap();
        let back: OscillatorSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }
}

#[test]
fn conjugation_weight_is_c2_odd_and_increasing() {
    for &(b, s) in &[(2.0, 0.5), (2.0, 0.2), (3.0, 0.9), (4.0, 0.99), (6.0, 0.8), (2.0, 0.05)] {
        let p = (2.0 + b) * s / 2.0;
        let (v, v1, v2) = conjugation_weight(b, s, 1.0 - 1e-12);
        let (w, w1, w2) = conjugation_weight(b, s, 1.0 + 1e-12);
        assert!((v - w).abs() < 1e-10 && (v1 - w1).abs() < 1e-10 && (v2 - w2).abs() < 1e-9, "b={b} s={s}");
        assert!((w1 - p / 2.0).abs() < 1e-10);
        let mut prev = f64::NEG_INFINITY;
        for i in -400..=400 {
            let x = i as f64 / 100.0;
            let (v, d1, _) = conjugation_weight(b, s, x);
            let (vm, _, _) = conjugation_weight(b, s, -x);
            assert!((v + vm).abs() < 1e-14);
            assert!(d1 >= 0.0 && v >= prev);
            if x > 0.0 {
                assert!(v > 0.0);
            }
            prev = v;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, rng_algorithm: proptest::test_runner::RngAlgorithm::ChaCha, rng_seed: proptest::test_runner::RngSeed::Fixed(0x5eed), ..ProptestConfig::default() })]

    #[test]
    fn valid_polynomial_families_have_consistent_constants(a in 1u32..8, db in 0u32..8, cb in 0.1f64..4.0) {
        let b = a + db % a;
        let mut im = vec![0.0; b as usize + 1];
        im[b as usize] = cb;
        let k = constants(&poly(a, &[], &im)).unwrap();
        let (tau, sigma, w0) = (k.tau.unwrap(), k.sigma.unwrap(), k.omega0.unwrap());
        // τ reaches 1/2 exactly on the edge b = 2a - 1 (a = b = 1 gives σ = 1/2).
        prop_assert!(tau > 0.0 && tau <= 0.5);
        prop_assert_eq!(tau == 0.5, b + 1 == 2 * a);
        prop_assert!(sigma > 0.0 && sigma < 1.0);
        prop_assert!((sigma - k.kappa * tau).abs() < 1e-15);
        prop_assert!((w0 - tau * b as f64 / (b as f64 + 1.0)).abs() < 1e-15 && w0 > 0.0);
        prop_assert!(k.kappa >= 1.0 && k.kappa < 2.0);
        let next = constants(&poly(a + 1, &[], &{ let mut v = vec![0.0; a as usize + 2]; v[a as usize + 1] = 1.0; v })).unwrap();
        prop_assert!(next.kappa > k.kappa);
    }

    #[test]
    fn predicted_eigenvalue_is_asymptotic_to_ho(n in 1usize..100_000) {
        let z = predicted_eigenvalue(&poly(1, &[], &[0.0, 1.0]), n).unwrap();
        let exact = exact_shifted_ho(c(0.0, 0.0), c(0.0, 0.0), n);
        prop_assert!(((z - exact).norm() / exact.norm() - 1.0 / (2.0 * n as f64 - 1.0)).abs() < 1e-12);
    }
}
