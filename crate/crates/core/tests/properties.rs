//! Property tests over random expressions, fields and points.

mod common;

use bihamiltonian::calc3::{directional_derivative, ScalarHandle, VectorHandle};
use bihamiltonian::expr::{parse_scalar, parse_vector, BinOp, Expr, Func, Var, VectorFieldSpec};
use bihamiltonian::frenet::{
    frame_at, helicities_at, helicities_at_fd, local_geometry, FrenetThresholds,
};
use bihamiltonian::poisson::{
    frame_poisson_vector, invariance_ratio, jacobi_residual_with, JacobiMode, PoissonMatrix,
};
use bihamiltonian::systems::get_system;
use nalgebra::Vector3;
use proptest::prelude::*;
use rand::SeedableRng;

fn expr_tree() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0.0..10.0f64).prop_map(Expr::constant),
        Just(Expr::var(Var::X)),
        Just(Expr::var(Var::Y)),
        Just(Expr::var(Var::Z)),
    ];
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (
                prop_oneof![
                    Just(BinOp::Add),
                    Just(BinOp::Sub),
                    Just(BinOp::Mul),
                    Just(BinOp::Div)
                ],
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, a, b)| Expr::binary(op, a, b)),
            (inner.clone(), 0u8..4)
                .prop_map(|(b, k)| Expr::pow(b, Expr::constant(k as f64)).unwrap()),
            (0..Func::ALL.len(), inner).prop_map(|(i, a)| Expr::call(Func::ALL[i], a)),
        ]
    })
}

fn point(half: f64) -> impl Strategy<Value = Vector3<f64>> {
    prop::array::uniform3(-half..half).prop_map(Vector3::from)
}

/// Random degree-2 polynomial field, reproducible from the seed.
fn poly_field(seed: u64) -> VectorFieldSpec {
    parse_vector(&common::polynomial_vector(&mut common::rng(seed))).unwrap()
}

fn helical() -> VectorFieldSpec {
    get_system("helical").unwrap().field
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn printed_expressions_reparse_to_the_same_tree(e in expr_tree()) {
        let printed = e.to_string();
        let back = parse_scalar(&printed).unwrap();
        prop_assert_eq!(back, e, "{}", printed);
    }

    #[test]
    fn poisson_matrix_acts_as_cross_product(j in point(5.0), dh in point(5.0)) {
        let m = PoissonMatrix::from_vector(&j);
        prop_assert!((m.apply(&dh) - j.cross(&dh)).norm() <= 1e-12 * (1.0 + j.norm() * dh.norm()));
        prop_assert!(m.antisymmetry_defect() == 0.0);
        prop_assert!((m.to_vector() - j).norm() == 0.0);
    }

    #[test]
    fn frame_is_invariant_under_positive_rescaling(seed in 0u64..1000, p in point(2.0)) {
        let v = poly_field(seed);
        let g = parse_scalar(&common::polynomial(&mut common::rng(seed + 7))).unwrap();
        let scaled = v.scaled_by(&Expr::call(Func::Exp, g));
        if let (Ok(a), Ok(b)) = (frame_at(&v, &p), frame_at(&scaled, &p)) {
            prop_assume!(a.normal_magnitude > 1e-4);
            let scale = 1.0 / a.normal_magnitude;
            prop_assert!((a.t - b.t).norm() < 1e-9);
            prop_assert!((a.n - b.n).norm() < 1e-9 * scale);
            prop_assert!((a.b - b.b).norm() < 1e-9 * scale);
        }
    }

    #[test]
    fn tangent_turns_away_from_the_normal(seed in 0u64..1000, p in point(2.0)) {
        // t x curl t = -(t . grad) t for a unit field
        let v = poly_field(seed);
        let Ok(f) = frame_at(&v, &p) else { return Ok(()) };
        prop_assume!(f.normal_magnitude > 1e-3);
        let h = 1e-5;
        let tangent = |q: Vector3<f64>| frame_at(&v, &q).map(|g| g.t);
        let (Ok(ahead), Ok(behind)) = (tangent(p + f.t * h), tangent(p - f.t * h)) else { return Ok(()) };
        let ds_t = (ahead - behind) / (2.0 * h);
        prop_assert!(ds_t.dot(&f.n) < 0.0);
        prop_assert!((ds_t + f.n * f.normal_magnitude).norm() < 1e-5 * (1.0 + f.normal_magnitude));
    }

    #[test]
    fn omega_nb_is_the_sum_of_its_parts(seed in 0u64..1000, p in point(2.0)) {
        let v = poly_field(seed);
        if let Ok(h) = helicities_at(&v, &p) {
            prop_assert!((h.omega_nb - (h.n_curl_b + h.b_curl_n)).abs() <= 1e-12 * (1.0 + h.omega_nb.abs()));
        }
    }

    #[test]
    fn exact_and_difference_helicities_agree(seed in 0u64..1000, p in point(2.0)) {
        let v = poly_field(seed);
        let th = FrenetThresholds::default();
        let Ok(g) = local_geometry(&v, &p, &th) else { return Ok(()) };
        prop_assume!(g.frame.normal_magnitude > 1e-2);
        let Ok(fd) = helicities_at_fd(&v, &p, &th, None) else { return Ok(()) };
        let h = g.helicities;
        let scale = 1.0 + h.omega_t.abs() + h.omega_nb.abs() + h.n_curl_b.abs();
        let tol = 1e-4 * scale / g.frame.normal_magnitude.powi(2);
        for (a, b) in [
            (h.omega_t, fd.omega_t),
            (h.omega_n, fd.omega_n),
            (h.omega_b, fd.omega_b),
            (h.n_curl_b, fd.n_curl_b),
            (h.b_curl_n, fd.b_curl_n),
        ] {
            prop_assert!((a - b).abs() < tol, "{} vs {}", a, b);
        }
    }

    #[test]
    fn gradient_decomposes_along_the_frame(seed in 0u64..1000, p in point(2.0)) {
        let v = helical();
        prop_assume!(p[0].hypot(p[1]) > 0.1);
        let f = frame_at(&v, &p).unwrap();
        let g: ScalarHandle = parse_scalar(&common::smooth_scalar(&mut common::rng(seed))).unwrap().into();
        let grad = bihamiltonian::calc3::gradient(&g, &p).unwrap();
        let rebuilt: Vector3<f64> = [f.t, f.n, f.b]
            .iter()
            .map(|e| e * directional_derivative(&g, &p, e).unwrap())
            .sum();
        prop_assert!((grad - rebuilt).norm() <= 1e-10 * (1.0 + grad.norm()));
    }

    #[test]
    fn jacobi_defect_is_conformally_covariant(seed in 0u64..1000, p in point(2.0)) {
        let mut rng = common::rng(seed);
        let j: VectorHandle = parse_vector(&common::polynomial_vector(&mut rng)).unwrap().into();
        let f = parse_scalar(&common::smooth_scalar(&mut rng)).unwrap();
        prop_assume!(f.eval_f64(&p).map(|x| x.abs() > 1e-6).unwrap_or(false));
        let (lhs, rhs) = invariance_ratio(&j, &f, &p).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-8 * rhs.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn frame_structures_are_orthogonal_to_the_flow(seed in 0u64..1000, p in point(2.0)) {
        let v = helical();
        prop_assume!(p[0].hypot(p[1]) > 0.3);
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let alpha = parse_scalar(&common::polynomial(&mut rng)).unwrap();
        let beta = parse_scalar(&common::polynomial(&mut rng)).unwrap();
        let j = frame_poisson_vector(&v, &alpha, &beta, None).unwrap();
        let t = frame_at(&v, &p).unwrap().t;
        prop_assert!(j.eval(&p).unwrap().dot(&t).abs() < 1e-12);
    }

    #[test]
    fn jacobi_modes_agree_on_a_generic_field(seed in 0u64..1000, p in point(1.5)) {
        let v = get_system("euler-top").unwrap().field;
        let Ok(frame) = frame_at(&v, &p) else { return Ok(()) };
        prop_assume!(frame.normal_magnitude > 0.05);
        let mut rng = common::rng(seed);
        let alpha = parse_scalar(&common::polynomial(&mut rng)).unwrap();
        let beta = parse_scalar(&common::polynomial(&mut rng)).unwrap();
        let j = frame_poisson_vector(&v, &alpha, &beta, None).unwrap();
        let Ok(direct) = jacobi_residual_with(&j, &p, &JacobiMode::Direct) else { return Ok(()) };
        let mode = JacobiMode::FrameExpansion { field: v.clone(), alpha, beta };
        let expanded = jacobi_residual_with(&j, &p, &mode).unwrap();
        let scale = 1.0 / frame.normal_magnitude.powi(2);
        prop_assert!((direct - expanded).abs() < 1e-4 * scale * (1.0 + direct.abs()), "{} vs {}", direct, expanded);
    }
}
