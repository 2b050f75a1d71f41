mod common;

use pedi_core::barrier::*;
use pedi_core::{RankOneConstraint, SpinElement};
use rand::Rng;

const DIMS: [usize; 4] = [1, 2, 5, 50];

/// Floor of `‖y∘d − μe‖` in double precision: the coordinates of `y` and `d`
/// are each rounded after scaling by `a^{±1/2}`, so the product is only known
/// to about `eps·κ(a)·‖y‖‖d‖`.
fn rounding_floor(p: &CentralPathPoint, k: &RankOneConstraint) -> f64 {
    let kappa = k.a().lambda_max() / k.a().lambda_min();
    64.0 * f64::EPSILON * kappa * p.y().norm() * p.d().norm()
}

#[test]
fn central_path_equations_hold() {
    let mut rng = common::rng(11);
    for mu in [1.0, 1e-3, 1e-6, 1e-8] {
        for _ in 0..200 {
            let m = DIMS[rng.random_range(0..4)];
            let k = common::constraint(&mut rng, m);
            let c = common::admissible(&mut rng, &k);
            let p = central_path_solve(&k, &c, mu).unwrap();
            assert!(p.y().is_interior(0.0) && p.d().is_interior(0.0));
            assert!((k.apply(p.y()).unwrap() - k.b0()).abs() <= 1e-9 * k.b0());
            let dual = p.d().axpy(-p.z(), k.a()).unwrap().axpy(-1.0, &c).unwrap();
            assert!(dual.norm() <= 1e-12 * (1.0 + c.norm() + p.d().norm()));
            let r = p.complementarity_residual();
            assert!(
                r <= 1e-10 * mu + rounding_floor(&p, &k),
                "mu={mu:e} r={r:e}"
            );
        }
    }
}

#[test]
fn det_sandwich_holds() {
    let mut rng = common::rng(12);
    for mu in [1.0, 1e-2, 1e-4, 1e-6, 1e-8] {
        for _ in 0..200 {
            let m = DIMS[rng.random_range(0..4)];
            let k = common::constraint(&mut rng, m);
            let c = common::admissible(&mut rng, &k);
            let p = central_path_solve(&k, &c, mu).unwrap();
            let (lo, det, hi) = det_sandwich(&p, &k).unwrap();
            assert!(
                lo <= det * (1.0 + 1e-10) && det <= hi * (1.0 + 1e-10),
                "{lo} {det} {hi}"
            );
            let direct = p.d().det();
            assert!(
                (direct - det).abs() <= 1e-8 * p.d().norm().powi(2),
                "{direct} vs {det}"
            );
        }
    }
}

#[test]
fn sclp_is_the_small_mu_limit() {
    let mut rng = common::rng(13);
    for _ in 0..100 {
        let m = DIMS[rng.random_range(0..3)];
        let k = common::constraint(&mut rng, m);
        let c = common::admissible(&mut rng, &k);
        let opt = sclp_solve(&k, &c).unwrap();
        let p = central_path_solve(&k, &c, 1e-9).unwrap();
        assert!(common::rel_err(p.y(), &opt.y) < 1e-6);
        assert!(common::rel_err(p.d(), &opt.d) < 1e-6);
    }
}

#[test]
fn barrier_gradient_matches_finite_differences() {
    let mut rng = common::rng(14);
    let h = 1e-6;
    for _ in 0..100 {
        let m = DIMS[rng.random_range(0..4)];
        let x = common::interior(&mut rng, m);
        let g = barrier_gradient(&x).unwrap().coords();
        let base = x.coords();
        for (i, gi) in g.iter().enumerate() {
            let shifted = |s: f64| {
                let mut v = base.clone();
                v[i] += s;
                barrier_value(&SpinElement::from_coords(&v).unwrap()).unwrap()
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            let scale = g.iter().map(|v| v.abs()).fold(1.0, f64::max);
            assert!(
                (fd - 2.0 * gi).abs() <= 1e-5 * scale,
                "{fd} vs {}",
                2.0 * gi
            );
        }
    }
}

#[test]
fn hessian_is_derivative_of_gradient() {
    let mut rng = common::rng(15);
    let x = common::interior(&mut rng, 3);
    let v = common::element(&mut rng, 3);
    let h = 1e-6;
    let gp = barrier_gradient(&x.axpy(h, &v).unwrap()).unwrap();
    let gm = barrier_gradient(&x.axpy(-h, &v).unwrap()).unwrap();
    let fd = (&gp - &gm).scale(0.5 / h);
    let hv = barrier_hessian_apply(&x, &v).unwrap();
    assert!(common::rel_err(&fd, &hv) < 1e-6);
}

#[test]
fn nt_scaling_defining_property() {
    let mut rng = common::rng(16);
    for _ in 0..500 {
        let m = DIMS[rng.random_range(0..4)];
        let y = common::interior(&mut rng, m);
        let yp = common::interior(&mut rng, m);
        let dp = yp.inverse().unwrap();
        let w = nt_scaling_point(&y, &dp).unwrap();
        assert!(w.is_interior(0.0));
        let wi = w.inverse().unwrap();
        assert!(common::rel_err(&wi.quad_rep(&y).unwrap(), &dp) < 1e-9);
        let d = y.inverse().unwrap();
        assert!(common::rel_err(&wi.quad_rep(&yp).unwrap(), &d) < 1e-9);
    }
}

#[test]
fn df_distance_vanishes_on_scaled_direction() {
    let mut rng = common::rng(17);
    for _ in 0..100 {
        let k = common::constraint(&mut rng, 4);
        let z = rng.random_range(0.1..5.0);
        let v = df_distance(k.a_inv(), &k.a().scale(z)).unwrap();
        assert!(v < 1e-10 * (1.0 + z * k.a().norm() * k.a_inv().norm()));
    }
}

#[test]
fn interior_monotonicity_random() {
    let mut rng = common::rng(21);
    for _ in 0..1000 {
        let m = DIMS[rng.random_range(0..4)];
        let y = common::interior(&mut rng, m);
        let yp = common::interior(&mut rng, m);
        let r = check_interior_monotonicity(&y, &yp).unwrap();
        assert!(r.passes(1e-12), "{r:?}");
    }
}

#[test]
fn soc_pair_monotonicity_random() {
    let mut rng = common::rng(22);
    for _ in 0..1000 {
        let m = DIMS[rng.random_range(0..4)];
        let k = common::constraint(&mut rng, m);
        let mu = 10f64.powf(rng.random_range(-6.0..0.0));
        let p = central_path_solve(&k, &common::admissible(&mut rng, &k), mu).unwrap();
        let q = central_path_solve(&k, &common::admissible(&mut rng, &k), mu).unwrap();
        let r = check_soc_pair_monotonicity(&p, &q).unwrap();
        assert!(r.passes(1e-10), "{r:?}");
    }
}

#[test]
fn soc_extension_bound_random() {
    let mut rng = common::rng(23);
    for i in 0..1000 {
        let m = DIMS[rng.random_range(0..4)];
        let k = common::constraint(&mut rng, m);
        let mu = 10f64.powf(rng.random_range(-6.0..0.0));
        let c = common::admissible(&mut rng, &k);
        let opt_c = if i % 5 == 0 {
            SpinElement::zero(k.dim())
        } else {
            common::admissible(&mut rng, &k)
        };
        let opt = sclp_solve(&k, &opt_c).unwrap();
        let p = central_path_solve(&k, &c, mu).unwrap();
        let r = check_soc_extension_bound(&p, &opt, &k, &c, &opt_c).unwrap();
        assert!(r.passes(1e-10), "{r:?}");
    }
}

#[test]
fn general_cone_bound_random() {
    let mut rng = common::rng(24);
    let mut rejected = 0;
    for _ in 0..300 {
        let m = DIMS[rng.random_range(0..3)];
        let k = common::constraint(&mut rng, m);
        let mu = 10f64.powf(rng.random_range(-6.0..0.0));
        let c = common::admissible(&mut rng, &k);
        let opt_c = common::admissible(&mut rng, &k);
        let opt = sclp_solve(&k, &opt_c).unwrap();
        let p = central_path_solve(&k, &c, mu).unwrap();
        let r = match check_general_cone_bound(&p, &opt, &k, &c, &opt_c, 0.5, None) {
            Ok(r) => r,
            Err(BarrierError::Degenerate(_)) => {
                rejected += 1;
                continue;
            }
            Err(e) => panic!("{e}"),
        };
        assert!(r.passes(1e-10), "{r:?}");
        let same = central_path_solve(&k, &opt_c, mu).unwrap();
        let lhs = -(same.d() - &opt.d).inner(&(same.y() - &opt.y)).unwrap();
        assert!(lhs >= -1e-10 * r.scale);
    }
    assert!(rejected < 200, "{rejected} degenerate draws");
}

#[test]
fn general_cone_bound_unit_direction() {
    let mut rng = common::rng(25);
    let mut accepted = 0;
    for _ in 0..300 {
        let m = DIMS[rng.random_range(0..3)];
        let k = RankOneConstraint::unit(m, rng.random_range(0.2..4.0)).unwrap();
        let mu = 10f64.powf(rng.random_range(-6.0..0.0));
        let c = common::admissible(&mut rng, &k);
        let opt_c = common::admissible(&mut rng, &k);
        let opt = sclp_solve(&k, &opt_c).unwrap();
        let p = central_path_solve(&k, &c, mu).unwrap();
        match check_general_cone_bound(&p, &opt, &k, &c, &opt_c, 0.5, None) {
            Ok(r) => {
                accepted += 1;
                assert!(r.passes(1e-10), "{r:?}");
            }
            Err(BarrierError::Degenerate(_)) => {}
            Err(e) => panic!("{e}"),
        }
    }
    assert!(accepted >= 50, "only {accepted} non-degenerate draws");
}

#[test]
fn general_cone_penalty_is_linear_in_mu() {
    let p = |mu: f64| general_cone_penalty(mu, 0.0, 0.0, 2.0, 1.0, 1.0, 0.5);
    // with zero data the constants scale with μ too; use non-zero norms
    let q = |mu: f64| general_cone_penalty(mu, 1.0, 1.5, 2.0, 1.0, 0.7, 0.5);
    assert!((p(1e-6) / p(5e-7) - 8.0).abs() < 1e-9);
    let ratio = q(1e-8) / q(5e-9);
    assert!((ratio - 2.0).abs() < 1e-6, "{ratio}");
}

#[test]
fn central_path_rate_on_boundary_instance() {
    let k = RankOneConstraint::unit(1, 2.0).unwrap();
    let c = SpinElement::new(0.0, vec![1.0]).unwrap();
    let opt = sclp_solve(&k, &c).unwrap();
    let lam = min_eig_m(&opt.y, &opt.d, &k).unwrap();
    assert!((lam - 1.0).abs() < 1e-12);
    for e in 1..=6 {
        let mu = 10f64.powi(-e);
        let p = central_path_solve(&k, &c, mu).unwrap();
        let dist = (p.y() - &opt.y).norm();
        assert!(
            dist <= central_path_rate_bound(mu, lam),
            "mu={mu:e} dist={dist:e}"
        );
    }
}
