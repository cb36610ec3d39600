use adrkit::operators::{
    certify, certify_cocoercive, certify_conically_averaged, pair_margins, sample_pairs, Flavor,
    FnMap, OperatorSpec, Property, SamplingConfig,
};
use adrkit::resolvents::{expected_constant, ResolventHandle};
use adrkit::vecspace::{Euclidean, Vector};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_matrix(rng: &mut StdRng, n: usize, spread: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.gen_range(-spread..spread))
}

/// `M = S + K` with `S` symmetric having smallest eigenvalue `alpha` and `K`
/// skew; the monotone modulus of `x ↦ Mx` is exactly `alpha`.
fn affine_with_modulus(rng: &mut StdRng, n: usize, alpha: f64) -> OperatorSpec {
    let q = random_matrix(rng, n, 1.0).qr().q();
    let mut eig: Vec<f64> = (0..n).map(|_| alpha + rng.gen_range(0.0..3.0)).collect();
    eig[0] = alpha;
    let s = &q * DMatrix::from_diagonal(&Vector::from_vec(eig)) * q.transpose();
    let k = random_matrix(rng, n, 1.0);
    let m = s + (&k - k.transpose()) * 0.5;
    let shift = Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    OperatorSpec::affine(m, shift).unwrap()
}

#[test]
fn resolvents_realize_their_constants() {
    let mut rng = StdRng::seed_from_u64(7);
    let cfg = SamplingConfig::new(1000, 11);
    for trial in 0..40 {
        let n = rng.gen_range(1..=6);
        let alpha = rng.gen_range(-0.8..2.0);
        let op = affine_with_modulus(&mut rng, n, alpha);
        let gamma = rng.gen_range(0.1..1.0);
        let h = ResolventHandle::new(op.clone(), gamma).unwrap();
        let a = op.modulus(Flavor::Monotone).unwrap();
        assert!((a - alpha).abs() < 1e-10, "trial {trial}: {a} vs {alpha}");
        let tau = expected_constant(Flavor::Monotone, gamma, a).unwrap();
        assert_eq!(h.cocoercivity(), Some(tau));
        let c = certify_cocoercive(&h, tau, &cfg).unwrap();
        assert!(c.verdict.passed(), "trial {trial}: {c:?}");
        if let Some(theta) = h.averagedness() {
            let c = certify_conically_averaged(&h, theta, &cfg).unwrap();
            assert!(c.verdict.passed(), "trial {trial}: {c:?}");
        }
    }
}

#[test]
fn scaled_identity_constants_are_tight() {
    let cfg = SamplingConfig::new(1000, 3);
    let op = OperatorSpec::scaled_identity(4.0, Vector::from_element(3, 0.5)).unwrap();
    let h = ResolventHandle::new(op, 1.0).unwrap();
    let tau = h.cocoercivity().unwrap();
    let theta = h.averagedness().unwrap();
    assert_eq!((tau, theta), (5.0, 0.4));
    assert!(certify_cocoercive(&h, tau, &cfg).unwrap().verdict.passed());
    assert!(!certify_cocoercive(&h, tau * 1.05, &cfg)
        .unwrap()
        .verdict
        .passed());
    assert!(certify_conically_averaged(&h, theta, &cfg)
        .unwrap()
        .verdict
        .passed());
    assert!(!certify_conically_averaged(&h, theta * 0.95, &cfg)
        .unwrap()
        .verdict
        .passed());
}

#[test]
fn conical_verdicts_survive_relaxation() {
    let mut rng = StdRng::seed_from_u64(99);
    let cfg = SamplingConfig::new(300, 5);
    let (mut passes, mut fails) = (0, 0);
    for _ in 0..50 {
        let n = rng.gen_range(1..=5);
        let m = random_matrix(&mut rng, n, 1.0);
        let theta = rng.gen_range(0.2..1.5);
        for sigma in [0.5, 2.0] {
            let t = FnMap::new(n, |x: &Vector| &m * x);
            let s = FnMap::new(n, |x: &Vector| x * (1.0 - sigma) + &m * x * sigma);
            let pairs = sample_pairs(n, &cfg).unwrap();
            let mt =
                pair_margins(&t, Property::ConicallyAveraged(theta), &pairs, &Euclidean).unwrap();
            let ms = pair_margins(
                &s,
                Property::ConicallyAveraged(sigma * theta),
                &pairs,
                &Euclidean,
            )
            .unwrap();
            for (a, b) in mt.iter().zip(&ms) {
                assert!((b - sigma * a).abs() <= 1e-9 * (1.0 + a.abs()), "{a} {b}");
            }
            let vt = certify(&t, Property::ConicallyAveraged(theta), &cfg, &Euclidean).unwrap();
            let vs = certify(
                &s,
                Property::ConicallyAveraged(sigma * theta),
                &cfg,
                &Euclidean,
            )
            .unwrap();
            assert_eq!(vt.verdict, vs.verdict);
            if vt.verdict.passed() {
                passes += 1
            } else {
                fails += 1
            }
        }
    }
    assert!(passes > 0 && fails > 0, "{passes} passes, {fails} fails");
}

proptest! {
    #[test]
    fn resolvent_identity(seed in any::<u64>(), gamma in 0.05f64..3.0) {
        let mut rng = StdRng::seed_from_u64(seed);
        let n = rng.gen_range(1..=6);
        let alpha = rng.gen_range(0.0..2.0);
        let op = affine_with_modulus(&mut rng, n, alpha);
        let h = ResolventHandle::new(op.clone(), gamma).unwrap();
        let x = Vector::from_fn(n, |_, _| rng.gen_range(-10.0..10.0));
        let u = h.resolve(&x).unwrap();
        let back = &u + op.eval(&u).unwrap() * gamma;
        prop_assert!((back - &x).norm() <= 1e-10 * (1.0 + x.norm()));
    }

    #[test]
    fn reflection_is_twice_resolvent_minus_identity(
        c in -0.5f64..5.0,
        xs in prop::collection::vec(-10.0f64..10.0, 1..6),
    ) {
        let x = Vector::from_vec(xs);
        let op = OperatorSpec::scaled_identity(c, Vector::from_element(x.len(), 0.3)).unwrap();
        let h = ResolventHandle::new(op, 1.0).unwrap();
        let r = h.reflect(&x).unwrap();
        let expected = h.resolve(&x).unwrap() * 2.0 - &x;
        prop_assert!((r - expected).norm() <= 1e-14 * (1.0 + x.norm()));
        prop_assert_eq!(h.relaxed_resolve(1.0, &x).unwrap(), h.resolve(&x).unwrap());
    }

    #[test]
    fn box_resolvent_is_projection(
        xs in prop::collection::vec(-5.0f64..5.0, 1..6),
        gamma in 0.1f64..10.0,
    ) {
        let n = xs.len();
        let x = Vector::from_vec(xs);
        let op = OperatorSpec::normal_cone_box(Vector::from_element(n, -1.0), Vector::from_element(n, 2.0))
            .unwrap();
        let h = ResolventHandle::new(op, gamma).unwrap();
        let p = h.resolve(&x).unwrap();
        prop_assert_eq!(p, x.map(|v| v.clamp(-1.0, 2.0)));
    }
}

#[test]
fn both_constants_on_dual_claims() {
    // c·Id with c > 0 is c-monotone and (1/c)-comonotone.
    for c in [0.5, 1.0, 4.0] {
        let op = OperatorSpec::scaled_identity(c, Vector::zeros(2)).unwrap();
        let h = ResolventHandle::new(op, 0.7).unwrap();
        assert_eq!(h.constants().len(), 2);
        let cfg = SamplingConfig::default();
        assert!(certify_cocoercive(&h, h.cocoercivity().unwrap(), &cfg)
            .unwrap()
            .verdict
            .passed());
        assert!(
            certify_conically_averaged(&h, h.averagedness().unwrap(), &cfg)
                .unwrap()
                .verdict
                .passed()
        );
    }
    assert_eq!(
        OperatorSpec::scaled_identity(2.0, Vector::zeros(1))
            .unwrap()
            .modulus(Flavor::Comonotone),
        Some(0.5)
    );
}
