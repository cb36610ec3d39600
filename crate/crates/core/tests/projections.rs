use adrkit::vecspace::{
    project_affine_complement, project_scaled_diagonal, ProductVector, ScaledDiagonal, Vector,
    WeightedSpace,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Minimizes `Σ ωᵢ‖xᵢ − τᵢu‖²` over `u` by a dense SVD solve of the stacked
/// system `√ωᵢ τᵢ u = √ωᵢ xᵢ`.
fn least_squares_projection(x: &ProductVector, omega: &[f64], tau: &[f64]) -> Vector {
    let (n, d) = (x.n_blocks(), x.block_dim());
    let mut m = DMatrix::zeros(n * d, d);
    let mut rhs = Vector::zeros(n * d);
    for i in 0..n {
        let s = omega[i].sqrt();
        for r in 0..d {
            m[(i * d + r, r)] = s * tau[i];
            rhs[i * d + r] = s * x.block(i)[r];
        }
    }
    let u = m.svd(true, true).solve(&rhs, 1e-14).unwrap();
    let blocks: Vec<Vector> = tau.iter().map(|t| &u * *t).collect();
    ProductVector::from_blocks(&blocks).unwrap().into_flat()
}

#[derive(Debug, Clone)]
struct Instance {
    omega: Vec<f64>,
    tau: Vec<f64>,
    x: Vec<f64>,
    z: Vec<f64>,
    anchor: Vec<f64>,
    d: usize,
}

fn instance() -> impl Strategy<Value = Instance> {
    (1usize..=8, 1usize..=8).prop_flat_map(|(n, d)| {
        (
            prop::collection::vec(0.1f64..10.0, n),
            prop::collection::vec(prop_oneof![4 => -5.0f64..5.0, 1 => Just(0.0)], n),
            0usize..n,
            prop::collection::vec(-10.0f64..10.0, n * d),
            prop::collection::vec(-10.0f64..10.0, n * d),
            prop::collection::vec(-10.0f64..10.0, n * d),
        )
            .prop_map(move |(omega, mut tau, pin, x, z, anchor)| {
                if tau.iter().all(|t| t.abs() < 1e-3) {
                    tau[pin] = 1.0;
                }
                Instance {
                    omega,
                    tau,
                    x,
                    z,
                    anchor,
                    d,
                }
            })
    })
}

struct Built {
    space: WeightedSpace,
    diag: ScaledDiagonal,
    x: ProductVector,
    z: ProductVector,
    anchor: ProductVector,
}

fn build(i: &Instance) -> Built {
    let n = i.omega.len();
    let pv = |v: &[f64]| ProductVector::from_flat(Vector::from_row_slice(v), n).unwrap();
    Built {
        space: WeightedSpace::new(i.omega.clone(), i.d).unwrap(),
        diag: ScaledDiagonal::new(i.tau.clone()).unwrap(),
        x: pv(&i.x),
        z: pv(&i.z),
        anchor: pv(&i.anchor),
    }
}

fn diff(a: &ProductVector, b: &ProductVector) -> ProductVector {
    ProductVector::from_flat(a.as_flat() - b.as_flat(), a.n_blocks()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn matches_least_squares(i in instance()) {
        let b = build(&i);
        let p = project_scaled_diagonal(&b.x, &b.diag, &b.space).unwrap();
        let oracle = least_squares_projection(&b.x, &i.omega, &i.tau);
        let err = (p.as_flat() - &oracle).norm();
        prop_assert!(err <= 1e-10 * (1.0 + oracle.norm()), "err {err}");
    }

    #[test]
    fn idempotent_orthogonal_pythagorean(i in instance()) {
        let b = build(&i);
        let p = project_scaled_diagonal(&b.x, &b.diag, &b.space).unwrap();
        let pp = project_scaled_diagonal(&p, &b.diag, &b.space).unwrap();
        let scale = 1.0 + b.space.norm_w(&b.x).unwrap();
        prop_assert!(b.space.norm_w(&diff(&pp, &p)).unwrap() <= 1e-10 * scale);

        // x − Px is ω-orthogonal to every element of C.
        let r = diff(&b.x, &p);
        let c = ProductVector::diagonal(&b.z.block(0).into_owned(), &i.tau).unwrap();
        let ip = b.space.inner_w(&r, &c).unwrap();
        let cn = b.space.norm_w(&c).unwrap();
        prop_assert!(ip.abs() <= 1e-10 * scale * (1.0 + cn));

        let lhs = b.space.norm_w(&b.x).unwrap().powi(2);
        let rhs = b.space.norm_w(&p).unwrap().powi(2) + b.space.norm_w(&r).unwrap().powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs));
    }

    #[test]
    fn affine_complement_lands_in_translate(i in instance()) {
        let b = build(&i);
        let q = project_affine_complement(&b.z, &b.anchor, &b.diag, &b.space).unwrap();
        // q − anchor ∈ C⊥, so its projection onto C vanishes.
        let off = diff(&q, &b.anchor);
        let on_c = project_scaled_diagonal(&off, &b.diag, &b.space).unwrap();
        let scale = 1.0 + b.space.norm_w(&b.z).unwrap() + b.space.norm_w(&b.anchor).unwrap();
        prop_assert!(b.space.norm_w(&on_c).unwrap() <= 1e-10 * scale);
        // z − q ∈ C.
        let step = diff(&b.z, &q);
        let back = project_scaled_diagonal(&step, &b.diag, &b.space).unwrap();
        prop_assert!(b.space.norm_w(&diff(&back, &step)).unwrap() <= 1e-10 * scale);
        let again = project_affine_complement(&q, &b.anchor, &b.diag, &b.space).unwrap();
        prop_assert!(b.space.norm_w(&diff(&again, &q)).unwrap() <= 1e-10 * scale);
    }
}
