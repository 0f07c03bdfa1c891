use anharmonic::discretize::*;
use anharmonic::linalg::{eigenvalues, DenseMatrix};
use anharmonic::model::{exact_shifted_ho, OscillatorSpec};
use anharmonic::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn poly(a: u32, re: &[f64], im: &[f64]) -> OscillatorSpec {
    OscillatorSpec::PolynomialL { a, re_coeffs: re.to_vec(), im_coeffs: im.to_vec() }
}

fn sorted_eigs(a: &DenseMatrix) -> Vec<C64> {
    let mut v = eigenvalues(a).unwrap();
    sort_by_modulus(&mut v);
    v
}

fn max_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.sub(b).max_abs()
}

#[test]
fn harmonic_oscillator_is_diagonal() {
    let ho = OscillatorSpec::SelfAdjointPower { l: 2.0 };
    let h = assemble(&ho, &BasisSpec::new(40).with_scaling(1.0).with_assembly(Assembly::Ladder)).unwrap();
    let want = DenseMatrix::from_fn(40, 40, |i, j| if i == j { c((2 * i + 1) as f64, 0.0) } else { c(0.0, 0.0) });
    assert!(max_diff(&h, &want) < 1e-12);
}

#[test]
fn ladder_entries() {
    let x = position_matrix(6, 0.5);
    for k in 0..5 {
        let want = 0.5 * ((k + 1) as f64 / 2.0).sqrt();
        assert_eq!(x[(k, k + 1)], c(want, 0.0));
        assert_eq!(x[(k + 1, k)], c(want, 0.0));
    }
    assert_eq!(x[(0, 2)], c(0.0, 0.0));
    // D² = −kinetic away from the truncation corner.
    let d = derivative_matrix(12, 0.7);
    let k = kinetic_matrix(12, 0.7);
    let d2 = d.matmul(&d);
    for i in 0..11 {
        for j in 0..11 {
            assert!((d2[(i, j)] + k[(i, j)]).norm() < 1e-13);
        }
    }
}

#[test]
fn shifted_ho_spectrum_is_exact() {
    let h = assemble(&poly(1, &[], &[0.0, 1.0]), &BasisSpec::new(128)).unwrap();
    let ev = sorted_eigs(&h);
    for n in 1..=15 {
        let want = exact_shifted_ho(c(0.0, 1.0), c(0.0, 0.0), n);
        assert!((ev[n - 1] - want).norm() < 1e-8, "n={n}: {} vs {want}", ev[n - 1]);
    }
}

#[test]
fn choose_scaling_closed_form() {
    assert_eq!(choose_scaling(&poly(1, &[], &[0.0, 1.0]), 300), 1.0);
    let l = choose_scaling(&poly(2, &[], &[0.0, 0.0, 1.0]), 256);
    assert!((l - 256f64.powf(-1.0 / 6.0)).abs() < 1e-15);
    assert!((l - 0.3969).abs() < 1e-4);
    let b = BasisSpec::new(256).with_scaling(0.123);
    assert_eq!(b.resolved_scaling(&poly(2, &[], &[0.0, 0.0, 1.0])), 0.123);
}

#[test]
fn gauss_hermite_rule() {
    let (t, w) = gauss_hermite(2);
    assert!((t[0] + 0.5f64.sqrt()).abs() < 1e-15 && (t[1] - 0.5f64.sqrt()).abs() < 1e-15);
    // w̃ = w e^{t²}; for order 2, w = √π/2.
    assert!((w[0] - std::f64::consts::PI.sqrt() / 2.0 * 0.5f64.exp()).abs() < 1e-14);
    // Orthonormality of ψ_0..ψ_{n−1} under the rule of order n.
    let n = 60;
    let (t, w) = gauss_hermite(n);
    let psi: Vec<Vec<f64>> = t.iter().map(|&x| hermite_functions(x, n)).collect();
    for j in 0..n {
        for k in 0..n {
            let s: f64 = (0..n).map(|i| w[i] * psi[i][j] * psi[i][k]).sum();
            assert!((s - if j == k { 1.0 } else { 0.0 }).abs() < 1e-12, "({j},{k}) {s}");
        }
    }
}

#[test]
fn hermite_functions_far_out_do_not_overflow() {
    let v = hermite_functions(40.0, 800);
    assert!(v.iter().all(|x| x.is_finite()));
    assert_eq!(v[0], 0.0);
    assert!(v[799].abs() > 0.0);
}

#[test]
fn quadrature_matches_ladder_for_polynomials() {
    for spec in [poly(2, &[0.5, -1.0, 0.3], &[0.0, 0.7, 1.0]), OscillatorSpec::OddImaginary { b: 1 }] {
        let basis = BasisSpec::new(30).with_scaling(0.8);
        let a = assemble(&spec, &basis.clone().with_assembly(Assembly::Ladder)).unwrap();
        let b = assemble(&spec, &basis.with_assembly(Assembly::Quadrature)).unwrap();
        assert!(max_diff(&a, &b) < 1e-10 * a.max_abs(), "{}", max_diff(&a, &b));
    }
}

#[test]
fn assembly_errors() {
    let frac = OscillatorSpec::EvenImaginary { b: 1.5 };
    assert!(matches!(
        assemble(&frac, &BasisSpec::new(20).with_assembly(Assembly::Ladder)),
        Err(DiscretizeError::LadderNeedsPolynomial(_))
    ));
    let mut basis = BasisSpec::new(20);
    basis.quadrature_order = Some(30);
    assert!(matches!(assemble(&frac, &basis), Err(DiscretizeError::QuadratureOrder { .. })));
    assert!(assemble(&frac, &BasisSpec::new(3)).is_err());
    assert!(matches!(
        assemble(&poly(2, &[], &[0.0, 0.0, -1.0]), &BasisSpec::new(20)),
        Err(DiscretizeError::Model(_))
    ));
}

#[test]
fn shift_moves_the_spectrum() {
    let spec = poly(1, &[], &[0.0, 1.0]);
    let a = assemble(&spec, &BasisSpec::new(40)).unwrap();
    let b = assemble(&spec, &BasisSpec::new(40).with_shift(2.5)).unwrap();
    assert!(max_diff(&b, &a.shift(c(2.5, 0.0))) < 1e-14);
}

#[test]
fn convergence_check_reports() {
    let ho = OscillatorSpec::SelfAdjointPower { l: 2.0 };
    let r = convergence_check(&ho, &BasisSpec::new(64), 16).unwrap();
    assert_eq!(r.trusted_count(), 16);
    assert!(convergence_check(&ho, &BasisSpec::new(64), 17).is_err());

    let quartic = poly(2, &[], &[0.0, 0.0, 1.0]);
    let r = convergence_check(&quartic, &BasisSpec::new(200), 40).unwrap();
    assert!(r.trusted_count() >= 30, "trusted {}", r.trusted_count());
}

#[test]
fn real_even_potentials_give_hermitian_matrices() {
    for (spec, asm) in [
        (OscillatorSpec::SelfAdjointPower { l: 4.0 }, Assembly::Ladder),
        (OscillatorSpec::SelfAdjointPower { l: 3.0 }, Assembly::Quadrature),
        (OscillatorSpec::SelfAdjointPower { l: 1.5 }, Assembly::Quadrature),
    ] {
        let h = assemble(&spec, &BasisSpec::new(48).with_assembly(asm)).unwrap();
        assert!(max_diff(&h, &h.adjoint()) <= 1e-13 * h.max_abs());
        for z in eigenvalues(&h).unwrap() {
            assert!(z.im.abs() <= 1e-10 * (1.0 + z.norm()));
        }
    }
}

#[test]
fn pt_symmetric_trusted_eigenvalues_are_real() {
    // x⁴ + i x³: even real part, odd imaginary part.
    let spec = poly(2, &[], &[0.0, 0.0, 0.0, 1.0]);
    let r = convergence_check(&spec, &BasisSpec::new(160), 40).unwrap();
    assert!(r.trusted_count() >= 20);
    for e in r.entries.iter().filter(|e| e.trusted) {
        assert!(e.lambda.im.abs() <= 1e-6 * (1.0 + e.lambda.norm()), "{}", e.lambda);
    }
    let cubic = OscillatorSpec::OddImaginary { b: 1 };
    let r = convergence_check(&cubic, &BasisSpec::new(160), 40).unwrap();
    // The strict doubling test stops near n = 10: beyond it the gap is set by
    // eigenvalue conditioning (‖P_n‖ ~ e^{1.8n}), not by the basis.
    assert!(r.trusted_count() >= 8);
    for e in r.entries.iter().filter(|e| e.trusted) {
        assert!(e.lambda.im.abs() <= 1e-6 * (1.0 + e.lambda.norm()), "{}", e.lambda);
    }
}

#[test]
fn accretive_families_have_right_half_plane_numerical_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for spec in [
        poly(1, &[], &[0.0, 1.0]),
        poly(2, &[1.0], &[0.0, 0.0, 1.0]),
        OscillatorSpec::EvenImaginary { b: 2.0 },
        OscillatorSpec::EvenImaginary { b: 1.5 },
        OscillatorSpec::OddImaginary { b: 1 },
    ] {
        let a = assemble(&spec, &BasisSpec::new(64)).unwrap();
        let scale = a.norm_fro();
        for _ in 0..50 {
            let v: Vec<C64> = (0..64).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let av = a.matvec(&v);
            let num: C64 = v.iter().zip(&av).map(|(x, y)| x.conj() * y).sum();
            let den: f64 = v.iter().map(|x| x.norm_sqr()).sum();
            assert!(num.re / den >= -1e-8 * scale);
        }
    }
}

#[test]
fn spectra_do_not_depend_on_the_dilation() {
    let spec = poly(2, &[0.0, 1.0], &[0.0, 0.0, 1.0]);
    let a = sorted_eigs(&assemble(&spec, &BasisSpec::new(160)).unwrap());
    let b = sorted_eigs(&assemble(&spec, &BasisSpec::new(160).with_scaling(0.55)).unwrap());
    for n in 0..20 {
        assert!((a[n] - b[n]).norm() <= 1e-8 * (1.0 + a[n].norm()), "{n}: {} vs {}", a[n], b[n]);
    }
}

#[test]
fn conjugated_family_is_similar_to_its_self_adjoint_part() {
    // v = x/2 for b = 2, s = 1/2, so the operator is e^v (−d² + x²) e^{−v}.
    let spec = OscillatorSpec::Conjugated { b: 2.0, s: 0.5 };
    let ev = sorted_eigs(&assemble(&spec, &BasisSpec::new(120)).unwrap());
    for n in 1..=10 {
        assert!((ev[n - 1] - c((2 * n - 1) as f64, 0.0)).norm() < 1e-8, "{}", ev[n - 1]);
    }
    // A non-trivial weight keeps the self-adjoint |x|^b spectrum.
    let spec = OscillatorSpec::Conjugated { b: 4.0, s: 0.3 };
    let got = sorted_eigs(&assemble(&spec, &BasisSpec::new(160)).unwrap());
    let sa = sorted_eigs(&assemble(&OscillatorSpec::SelfAdjointPower { l: 4.0 }, &BasisSpec::new(160)).unwrap());
    for n in 0..8 {
        assert!((got[n] - sa[n]).norm() < 1e-6 * sa[n].norm(), "{} vs {}", got[n], sa[n]);
    }
}
