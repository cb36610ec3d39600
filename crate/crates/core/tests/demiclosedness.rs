use adrkit::adr::{AdrOperator, AdrParams, ProblemParams, StopRule};
use adrkit::demiclosedness::{
    averaged_to_fne, check_averaged_premises, check_cocoercive_premises, check_product_premises,
    fne_to_averaged, lift_balanced, AveragedVariant, CocoerciveMode, SequenceWindow,
    TrendTolerance,
};
use adrkit::operators::{certify, Flavor, FnMap, OperatorSpec, PointMap, Property, SamplingConfig};
use adrkit::resolvents::ResolventHandle;
use adrkit::vecspace::Vector;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn v(s: &[f64]) -> Vector {
    Vector::from_row_slice(s)
}

fn random_vector(rng: &mut StdRng, n: usize, scale: f64) -> Vector {
    Vector::from_fn(n, |_, _| rng.gen_range(-scale..scale))
}

#[test]
fn lifted_resolvents_are_firmly_nonexpansive() {
    let mut rng = StdRng::seed_from_u64(8);
    let cfg = SamplingConfig::new(1000, 21);
    for trial in 0..20 {
        let n = rng.gen_range(1..=4);
        let d = rng.gen_range(1..=4);
        let handles: Vec<ResolventHandle> = (0..n)
            .map(|_| {
                let c = rng.gen_range(-0.5..3.0);
                let gamma = rng.gen_range(0.1..1.5);
                let op = OperatorSpec::scaled_identity(c, random_vector(&mut rng, d, 1.0)).unwrap();
                ResolventHandle::new(op, gamma).unwrap()
            })
            .collect();
        let tau: Vec<f64> = handles.iter().map(|h| h.cocoercivity().unwrap()).collect();
        let rho: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..3.0)).collect();
        let maps: Vec<&dyn PointMap> = handles.iter().map(|h| h as &dyn PointMap).collect();
        let lifted = lift_balanced(maps, &rho, tau).unwrap();
        let c = certify(&lifted, Property::Cocoercive(1.0), &cfg, lifted.space()).unwrap();
        assert!(c.verdict.passed(), "trial {trial}: {c:?}");
    }
}

#[test]
fn lifted_affine_resolvent_is_firmly_nonexpansive() {
    let mut rng = StdRng::seed_from_u64(13);
    let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -2.0, 1.5]);
    let a = OperatorSpec::affine(m, v(&[0.1, 0.2])).unwrap();
    let b = OperatorSpec::scaled_identity_plus_rotation(0.5, 30.0, v(&[0.0, 1.0])).unwrap();
    let ha = ResolventHandle::new(a, 0.8).unwrap();
    let hb = ResolventHandle::new(b, 1.3).unwrap();
    let tau = vec![ha.cocoercivity().unwrap(), hb.cocoercivity().unwrap()];
    let rho = [rng.gen_range(0.5..2.0), 1.0];
    let lifted = lift_balanced(vec![&ha, &hb], &rho, tau).unwrap();
    let c = certify(
        &lifted,
        Property::Cocoercive(1.0),
        &SamplingConfig::new(1000, 1),
        lifted.space(),
    )
    .unwrap();
    assert!(c.verdict.passed(), "{c:?}");
}

proptest! {
    #[test]
    fn averaged_transform_round_trips(
        theta in 0.05f64..3.0,
        entries in prop::collection::vec(-2.0f64..2.0, 9),
        xs in prop::collection::vec(-10.0f64..10.0, 3),
    ) {
        let m = DMatrix::from_row_slice(3, 3, &entries);
        let t = FnMap::new(3, |x: &Vector| &m * x);
        let f = averaged_to_fne(&t, theta).unwrap();
        let back = fne_to_averaged(&f, theta).unwrap();
        let x = Vector::from_vec(xs);
        let want = t.apply(&x).unwrap();
        let got = back.apply(&x).unwrap();
        prop_assert!((got - &want).norm() <= 1e-14 * (1.0 + x.norm() + want.norm()) / theta.min(1.0));
    }

    #[test]
    fn balanced_unit_constants_match_raw(seed in any::<u64>(), n in 1usize..4, len in 1usize..30) {
        let mut rng = StdRng::seed_from_u64(seed);
        let d = 3;
        let mats: Vec<DMatrix<f64>> =
            (0..n).map(|_| DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0))).collect();
        let maps: Vec<FnMap<_>> = mats
            .iter()
            .map(|m| FnMap::new(d, move |x: &Vector| m * x))
            .collect();
        let refs: Vec<&dyn PointMap> = maps.iter().map(|m| m as &dyn PointMap).collect();
        let slots: Vec<Vec<Vector>> =
            (0..n).map(|_| (0..len).map(|_| random_vector(&mut rng, d, 5.0)).collect()).collect();
        let limits: Vec<Vector> = (0..n).map(|_| random_vector(&mut rng, d, 1.0)).collect();
        let w = SequenceWindow::new(slots)
            .unwrap()
            .with_limits(limits, random_vector(&mut rng, d, 1.0))
            .unwrap();
        let ones = vec![1.0; n];
        let tol = TrendTolerance::default();
        let raw = check_cocoercive_premises(&w, &refs, &ones, &ones, CocoerciveMode::Raw, tol).unwrap();
        let bal = check_cocoercive_premises(&w, &refs, &ones, &ones, CocoerciveMode::Balanced, tol).unwrap();
        prop_assert_eq!(&raw.series, &bal.series);

        let half = vec![0.5; n];
        let avg = check_averaged_premises(&w, &refs, &half, AveragedVariant::General, tol).unwrap();
        prop_assert_eq!(raw.series.len(), avg.series.len());
        for (a, b) in raw.series.iter().zip(&avg.series) {
            prop_assert_eq!(&a.name, &b.name);
            for (x, y) in a.residuals.iter().zip(&b.residuals) {
                prop_assert!((x - y).abs() <= 1e-14 * (1.0 + x.abs()), "{}: {} vs {}", a.name, x, y);
            }
        }
    }
}

#[test]
fn product_premises_along_a_trajectory() {
    let a = OperatorSpec::scaled_identity_plus_rotation(-0.25, 90.0, Vector::zeros(2)).unwrap();
    let b = OperatorSpec::scaled_identity(0.25, v(&[1.0, -2.0])).unwrap();
    let problem = ProblemParams::new(1.0, 2.0, -0.25, 0.25, Flavor::Monotone);
    let op = AdrOperator::new(AdrParams::new(problem, Some(0.5)).unwrap(), a, b).unwrap();
    let trace = op
        .run(&v(&[3.0, -4.0]), StopRule::new(100_000, 1e-10))
        .unwrap();
    let x_star = op
        .run(&trace.final_x, StopRule::new(100_000, 1e-15))
        .unwrap()
        .final_x;
    let window = op
        .shadow_window(&trace.iterates().unwrap(), &x_star)
        .unwrap();
    let maps: [&dyn PointMap; 2] = [op.j1(), op.j2()];
    let d = check_product_premises(
        &window,
        &maps,
        &problem.shadow_rho().unwrap(),
        &problem.cocoercive_taus(),
        TrendTolerance::default(),
    )
    .unwrap();
    assert!(d.passed(), "{:?}", d.failures());
}

#[test]
fn residual_counts_match_window_length() {
    let id = FnMap::new(1, |x: &Vector| x.clone());
    let slot: Vec<Vector> = (0..7).map(|k| v(&[1.0 / (k + 1) as f64])).collect();
    let w = SequenceWindow::new(vec![slot.clone(), slot])
        .unwrap()
        .with_limits(vec![v(&[0.0]), v(&[0.0])], v(&[0.0]))
        .unwrap();
    let d = check_cocoercive_premises(
        &w,
        &[&id, &id],
        &[1.0, 1.0],
        &[1.0, 1.0],
        CocoerciveMode::Raw,
        TrendTolerance::default(),
    )
    .unwrap();
    assert_eq!(d.series.len(), 6);
    assert!(d.series.iter().all(|s| s.residuals.len() == 7));
    // 1/(k+1) does not reach 1e-6 of its start within seven steps.
    assert!(!d.passed());
}
