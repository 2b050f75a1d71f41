use pedi_core::jordan::{BlockConeVector, SpinElement};
use proptest::prelude::*;

fn element_m(m: usize) -> impl Strategy<Value = SpinElement> {
    (-3.0..3.0f64, prop::collection::vec(-3.0..3.0f64, m))
        .prop_map(|(h, t)| SpinElement::new(h, t).unwrap())
}

fn interior_m(m: usize) -> impl Strategy<Value = SpinElement> {
    (0.05..3.0f64, prop::collection::vec(-3.0..3.0f64, m)).prop_map(|(gap, t)| {
        let n = t.iter().map(|v| v * v).sum::<f64>().sqrt();
        SpinElement::new(n + gap, t).unwrap()
    })
}

fn element(max_m: usize) -> impl Strategy<Value = SpinElement> {
    (1..=max_m).prop_flat_map(element_m)
}

fn interior(max_m: usize) -> impl Strategy<Value = SpinElement> {
    (1..=max_m).prop_flat_map(interior_m)
}

fn pair(max_m: usize) -> impl Strategy<Value = (SpinElement, SpinElement)> {
    (1..=max_m).prop_flat_map(|m| (element_m(m), element_m(m)))
}

fn triple(max_m: usize) -> impl Strategy<Value = (SpinElement, SpinElement, SpinElement)> {
    (1..=max_m).prop_flat_map(|m| (element_m(m), element_m(m), element_m(m)))
}

fn close(a: &SpinElement, b: &SpinElement, rtol: f64) -> bool {
    (a - b).norm() <= rtol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #[test]
    fn spectral_reconstruction(x in element(8)) {
        let s = x.spectral();
        let back = &s.c_plus.scale(s.lambda_plus) + &s.c_minus.scale(s.lambda_minus);
        prop_assert!(close(&back, &x, 1e-12));
        prop_assert!((x.trace() - (s.lambda_plus + s.lambda_minus)).abs() < 1e-12 * (1.0 + x.norm()));
        prop_assert!((x.det() - s.lambda_plus * s.lambda_minus).abs() < 1e-12 * (1.0 + x.norm()).powi(2));
        prop_assert!(close(&s.c_plus.square(), &s.c_plus, 1e-14));
        prop_assert!(s.c_plus.product(&s.c_minus).unwrap().norm() < 1e-14);
    }

    #[test]
    fn product_commutes_and_is_power_associative((x, y) in pair(8)) {
        prop_assert_eq!(x.product(&y).unwrap(), y.product(&x).unwrap());
        let x2 = x.square();
        let lhs = x.product(&x2.product(&y).unwrap()).unwrap();
        let rhs = x2.product(&x.product(&y).unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn trace_form_is_associative((x, y, z) in triple(8)) {
        let lhs = x.product(&y).unwrap().inner(&z).unwrap();
        let rhs = y.inner(&x.product(&z).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + x.norm() * y.norm() * z.norm()));
        prop_assert!((x.inner(&y).unwrap() - x.product(&y).unwrap().trace()).abs() < 1e-12 * (1.0 + x.norm() * y.norm()));
    }

    #[test]
    fn quadratic_representation_identities((x, y) in pair(8)) {
        let qxy = x.quad_rep(&y).unwrap();
        let scale = (1.0 + x.norm()).powi(4) * (1.0 + y.norm()).powi(2);
        prop_assert!((qxy.det() - x.det().powi(2) * y.det()).abs() <= 1e-11 * scale);
        prop_assert!(close(&x.quad_rep(&SpinElement::identity(x.dim())).unwrap(), &x.square(), 1e-14));
        let n = x.dim();
        let probe = SpinElement::new(0.3, vec![0.7; n]).unwrap();
        let lhs = qxy.quad_rep(&probe).unwrap();
        let rhs = x.quad_rep(&y.quad_rep(&x.quad_rep(&probe).unwrap()).unwrap()).unwrap();
        prop_assert!((&lhs - &rhs).norm() <= 1e-10 * (1.0 + rhs.norm()) * (1.0 + x.norm()).powi(2));
    }

    #[test]
    fn eigenvalue_bound_of_quad_rep((x, y) in (1..=8usize).prop_flat_map(|m| (interior_m(m), element_m(m)))) {
        let q = x.quad_rep(&y).unwrap().inner(&y).unwrap();
        let yy = y.inner(&y).unwrap();
        let slack = 1e-12 * (1.0 + x.norm()).powi(2) * yy;
        prop_assert!(x.lambda_min().powi(2) * yy <= q + slack);
        prop_assert!(q <= x.lambda_max().powi(2) * yy + slack);
    }

    #[test]
    fn powers_invert(x in interior(8)) {
        for alpha in [2.0, 0.5, -1.0] {
            let back = x.power(alpha).unwrap().power(1.0 / alpha).unwrap();
            prop_assert!(close(&back, &x, 1e-10));
        }
        let inv = x.inverse().unwrap();
        prop_assert!(close(&x.product(&inv).unwrap(), &SpinElement::identity(x.dim()), 1e-10));
        prop_assert!(close(&x.quad_rep(&inv).unwrap(), &x, 1e-10));
        let r = x.power(0.5).unwrap();
        prop_assert!(close(&r.square(), &x, 1e-12));
    }

    #[test]
    fn block_vector_aggregates(blocks in prop::collection::vec(interior(4), 1..5)) {
        let v = BlockConeVector::new(blocks.clone()).unwrap();
        let det: f64 = blocks.iter().map(|b| b.det()).product();
        let trace: f64 = blocks.iter().map(|b| b.trace()).sum();
        let inner: f64 = blocks.iter().map(|b| b.inner(b).unwrap()).sum();
        prop_assert!((v.det() - det).abs() <= 1e-12 * det.abs().max(1.0));
        prop_assert!((v.trace() - trace).abs() <= 1e-12 * (1.0 + trace.abs()));
        prop_assert!((v.inner(&v).unwrap() - inner).abs() <= 1e-12 * (1.0 + inner));
        prop_assert!(v.is_interior(0.0));
    }
}
