use dmap::autodiff::jacobian_fd;
use dmap::integrators::{hamiltonian_step, symplectic_defect, defect_newton, DEFECT_FD_STEP};
use dmap::linalg::{concat, dot, max_abs_diff, norm, Mat};
use dmap::manifolds::so3::{body_momentum, cay, cay_inv, hat, rigid_body_step, RigidBody, RigidBodyState};
use dmap::manifolds::sphere::{
    sphere_hamiltonian_step, sphere_projection_map, spherical_embed, spherical_to_ambient, tangent_basis,
    FreeParticle, SphereCotangent, SphereExpMap, SphericalChartMap, SphericalFreeParticle,
};
use dmap::manifolds::CayleyChartMap;
use dmap::map::{invert, invert_with, jacobian, random_points, DiscretizationMap, TangentPoint};
use dmap::newton::NewtonConfig;

fn cfg() -> NewtonConfig {
    NewtonConfig::with_tol(1e-14)
}

fn unit(x: &[f64]) -> Vec<f64> {
    let n = norm(x);
    x.iter().map(|a| a / n).collect()
}

fn det3(m: &Mat<f64>) -> f64 {
    m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)]) - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
}

#[test]
fn sphere_projection_formula_and_jacobian() {
    let map = sphere_projection_map();
    for (i, x) in random_points(3, 20, 1.0, 1).iter().enumerate() {
        let x = unit(x);
        let t = tangent_basis(&x);
        let xi: Vec<f64> = (0..3).map(|k| 0.3 * t[0][k] - 0.2 * t[1][k]).collect();
        let (a, b) = map.eval(&x, &xi);
        let m: Vec<f64> = (0..3).map(|k| x[k] - 0.5 * xi[k]).collect();
        let p: Vec<f64> = (0..3).map(|k| x[k] + 0.5 * xi[k]).collect();
        assert!(max_abs_diff(&a, &unit(&m)) < 1e-15 && max_abs_diff(&b, &unit(&p)) < 1e-15, "{i}");
        let ad = jacobian(&map, &TangentPoint::new(x.clone(), xi.clone()).unwrap()).unwrap();
        let fd = jacobian_fd(
            |y| {
                let (a, b) = map.eval(&y[..3], &y[3..]);
                Ok(concat(&a, &b))
            },
            &concat(&x, &xi),
            1e-6,
        )
        .unwrap();
        assert!(ad.max_abs_diff(&fd) < 1e-6);
    }
}

#[test]
fn sphere_inverses_roundtrip() {
    for x in random_points(3, 20, 1.0, 2) {
        let x = unit(&x);
        let t = tangent_basis(&x);
        let xi: Vec<f64> = (0..3).map(|k| 0.4 * t[0][k] + 0.7 * t[1][k]).collect();
        let map = sphere_projection_map();
        let (a, b) = map.eval(&x, &xi);
        let z = invert(&map, &a, &b).unwrap();
        assert!(max_abs_diff(&z.q, &x) < 1e-14 && max_abs_diff(&z.v, &xi) < 1e-14);
        let (a, b) = SphereExpMap.eval(&x, &xi);
        assert!((norm(&a) - 1.0).abs() < 1e-15 && (norm(&b) - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
        assert_eq!(SphereExpMap.eval(&x, &neg), (b.clone(), a.clone()));
        let z = invert(&SphereExpMap, &a, &b).unwrap();
        assert!(max_abs_diff(&z.q, &x) < 1e-14 && max_abs_diff(&z.v, &xi) < 1e-14);
    }
}

#[test]
fn sphere_step_rejects_bad_states() {
    assert!(SphereCotangent::new(vec![1.0, 0.0, 0.0], vec![0.1, 1.0, 0.0]).is_err());
    assert!(SphereCotangent::new(vec![1.1, 0.0, 0.0], vec![0.0, 1.0, 0.0]).is_err());
    assert!(SphereCotangent::new(vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]).is_ok());
}

#[test]
fn sphere_step_stays_in_the_open_hemisphere_for_large_steps() {
    // x₁ ∝ x₀ + u with u ⊥ x₀, so x₀·x₁ > 0 whatever h is.
    let s = SphereCotangent::new(vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]).unwrap();
    let out = sphere_hamiltonian_step(&FreeParticle, &s, 50.0, true, &cfg()).unwrap();
    assert!(dot(&s.x, &out.state.x) > 0.0);
}

/// Largest per-step growth of `|x·p|` over unit time with re-projection switched off.
fn raw_drift(h: f64) -> f64 {
    let mut s = SphereCotangent::project(&[0.2, 0.3, 0.9], &[0.5, -0.4, 0.3]);
    let mut worst = 0.0f64;
    struct Pot;
    impl dmap::systems::Hamiltonian for Pot {
        fn dim(&self) -> usize {
            3
        }
        fn h<T: dmap::autodiff::Real>(&self, x: &[T], p: &[T]) -> T {
            dot(p, p) * 0.5 + x[2]
        }
    }
    for _ in 0..(1.0 / h).round() as usize {
        let r = sphere_hamiltonian_step(&Pot, &s, h, false, &cfg()).unwrap();
        worst = worst.max((r.raw_orthogonality_defect - s.orthogonality_defect()).abs());
        assert!(r.state.norm_defect() < 1e-14);
        s = r.state;
    }
    worst
}

#[test]
fn sphere_drift_without_reprojection_is_measured() {
    let hs = [0.1, 0.05, 0.025];
    let d: Vec<f64> = hs.iter().map(|&h| raw_drift(h)).collect();
    let rates: Vec<f64> = d.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    println!("per-step orthogonality drift {d:?}, observed exponents {rates:?}");
    // The ambient pair only constrains p₁ against x₀, so x₁·p₁ = O(h) per step.
    assert!(d.iter().zip(&hs).all(|(&x, &h)| x > 0.1 * h && x < h));
    assert!(rates.iter().all(|&r| (r - 1.0).abs() < 0.1));
}

#[test]
fn free_particle_free_of_drift_with_reprojection() {
    let mut s = SphereCotangent::project(&[0.0, 0.6, 0.8], &[1.0, 0.0, 0.0]);
    for _ in 0..200 {
        s = sphere_hamiltonian_step(&FreeParticle, &s, 0.1, true, &cfg()).unwrap().state;
        assert!(s.norm_defect() < 1e-9 && s.orthogonality_defect() < 1e-9);
    }
    assert!((norm(&s.p) - 1.0).abs() < 1e-9);
}

/// Exact geodesic of the free particle, evaluated at time `t`.
fn geodesic(x0: &[f64], p0: &[f64], t: f64) -> Vec<f64> {
    let w = norm(p0);
    (0..3).map(|i| (w * t).cos() * x0[i] + (w * t).sin() * p0[i] / w).collect()
}

/// Max position error against the exact geodesic over unit time, chart route and ambient route.
fn chart_and_ambient_errors(h: f64) -> (f64, f64) {
    let (mut c, mut pc) = (vec![1.1, 0.3], vec![0.4, -0.2]);
    let start = spherical_to_ambient(&c, &pc);
    let mut amb = start.clone();
    let (mut ec, mut ea) = (0.0f64, 0.0f64);
    let steps = (1.0 / h).round() as usize;
    for k in 1..=steps {
        let st = hamiltonian_step(&SphericalChartMap, &SphericalFreeParticle, &c, &pc, h, &cfg()).unwrap().state;
        (c, pc) = (st[..2].to_vec(), st[2..].to_vec());
        amb = sphere_hamiltonian_step(&FreeParticle, &amb, h, true, &cfg()).unwrap().state;
        let exact = geodesic(&start.x, &start.p, k as f64 * h);
        ec = ec.max(max_abs_diff(&spherical_embed(&c), &exact));
        ea = ea.max(max_abs_diff(&amb.x, &exact));
    }
    (ec, ea)
}

#[test]
fn spherical_chart_and_ambient_routes_both_converge_to_the_geodesic() {
    let (c1, a1) = chart_and_ambient_errors(0.05);
    let (c2, a2) = chart_and_ambient_errors(0.025);
    println!("chart {c1:e} -> {c2:e}, ambient {a1:e} -> {a2:e}");
    // both routes are second order in position for the free particle
    assert!((c1 / c2).log2() > 1.8, "chart order {}", (c1 / c2).log2());
    assert!((a1 / a2).log2() > 1.8, "ambient order {}", (a1 / a2).log2());
    assert!(c1 < 1e-2 && a1 < 1e-1);
}

#[test]
fn cayley_is_a_rotation() {
    for a in random_points(3, 50, 0.577, 3) {
        let r = cay(&a).unwrap();
        assert!(r.matmul(&r.transpose()).max_abs_diff(&Mat::identity(3)) < 1e-12);
        assert!((det3(&r) - 1.0).abs() < 1e-12);
        assert!(max_abs_diff(&cay_inv(&r).unwrap(), &a) < 1e-13);
    }
    assert_eq!(cay(&[0.0; 3]).unwrap(), Mat::identity(3));
    let (r1, r2) = CayleyChartMap.eval(&[0.1, 0.2, 0.3], &[0.0; 3]);
    assert!(max_abs_diff(&r1, &[0.1, 0.2, 0.3]) < 1e-15 && max_abs_diff(&r2, &[0.1, 0.2, 0.3]) < 1e-15);
    assert_eq!(hat(&[1.0, 2.0, 3.0]).transpose(), hat(&[-1.0, -2.0, -3.0]));
}

#[test]
fn cayley_inverse_closed_form_matches_newton() {
    let newton = NewtonConfig::with_tol(1e-14);
    for (i, a) in random_points(3, 30, 0.5, 4).iter().enumerate() {
        let v = random_points(3, 1, 0.5, 100 + i as u64).remove(0);
        let (a0, a1) = CayleyChartMap.eval(a, &v);
        let closed = invert(&CayleyChartMap, &a0, &a1).unwrap();
        let iter = invert_with(&CayleyChartMap, &a0, &a1, &newton).unwrap();
        assert!(max_abs_diff(&closed.q, &iter.q) < 1e-12 && max_abs_diff(&closed.v, &iter.v) < 1e-12);
        assert!(max_abs_diff(&closed.q, a) < 1e-13 && max_abs_diff(&closed.v, &v) < 1e-13);
    }
}

#[test]
fn rigid_body_conserves_spatial_momentum_across_reanchoring() {
    let body = RigidBody::new([1.0, 2.0, 3.0]).unwrap();
    let mut st = RigidBodyState::at_identity([0.3, 0.9, -0.4]);
    let spatial = |s: &RigidBodyState| {
        let pi = body_momentum(&s.chart.a, &s.p).unwrap();
        s.chart.rotation().unwrap().mul_vec(&pi)
    };
    let m0 = spatial(&st);
    let mut anchors = 0;
    for _ in 0..500 {
        let before = st.chart.anchor.clone();
        st = rigid_body_step(&body, &st, 0.02, &cfg()).unwrap().0;
        if st.chart.anchor != before {
            anchors += 1;
        }
        assert!(max_abs_diff(&spatial(&st), &m0) < 1e-10);
    }
    assert!(anchors > 0, "trajectory never re-anchored");
    assert!(RigidBody::new([1.0, 0.0, 2.0]).is_err());
}

#[test]
fn rigid_body_step_is_symplectic_away_from_identity() {
    let body = RigidBody::new([1.0, 2.0, 3.0]).unwrap();
    let x = [0.2, -0.1, 0.3, 0.5, 0.4, -0.6];
    let d = symplectic_defect(
        |y| Ok(hamiltonian_step(&CayleyChartMap, &body, &y[..3], &y[3..], 0.05, &defect_newton())?.state),
        &x,
        DEFECT_FD_STEP,
    )
    .unwrap();
    assert!(d < 1e-7, "{d}");
}
