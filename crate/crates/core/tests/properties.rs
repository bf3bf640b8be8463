use dmap::autodiff::{gradient, jacobian_fd, jacobian_fwd, second_derivative, Real, ScalarFn, VectorFn};
use dmap::composition::{pointwise_symmetry_condition, stormer_verlet, stormer_verlet_equations, triple_jump, Stepper};
use dmap::integrators::{defect_newton, hamiltonian_step, symplectic_defect, DEFECT_FD_STEP};
use dmap::lifts::{cotangent_lift, cotangent_lift_symplectic_defect, tangent_lift, PhaseTangent};
use dmap::linalg::max_abs_diff;
use dmap::manifolds::CayleyChartMap;
use dmap::map::{
    adjoint, analytic_jacobian_error, eval_pair, from_retraction, invert, validate, DiscretizationMap,
    EuclideanRetraction, QuadraticMap, TangentPoint, ThetaMap,
};
use dmap::newton::NewtonConfig;
use dmap::systems::pendulum;
use proptest::prelude::*;

fn vec_in(n: usize, r: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-r..r, n)
}

fn small_v(n: usize) -> impl Strategy<Value = Vec<f64>> {
    vec_in(n, 1.0).prop_map(|v| {
        let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if s > 0.5 {
            v.iter().map(|x| x * 0.5 / s).collect()
        } else {
            v
        }
    })
}

/// `f_i(x) = sin(a_i·x) + b_i (x_i)² + exp(c_i x_{i+1}) / (1 + x_i²)`
#[derive(Debug)]
struct Smooth {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl VectorFn for Smooth {
    fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let lin = self.a[i].iter().zip(x).fold(T::zero(), |s, (&a, &xi)| s + xi * a);
                let nxt = x[(i + 1) % n];
                lin.sin() + x[i] * x[i] * self.b[i] + (nxt * self.c[i]).exp() / (x[i] * x[i] + 1.0)
            })
            .collect()
    }
}

struct SmoothScalar(Smooth);

impl ScalarFn for SmoothScalar {
    fn eval<T: Real>(&self, x: &[T]) -> T {
        self.0.eval(x).into_iter().fold(T::zero(), |s, v| s + v * v)
    }
}

fn smooth_fn() -> impl Strategy<Value = Smooth> {
    (vec_in(9, 1.0), vec_in(3, 1.0), vec_in(3, 1.0)).prop_map(|(a, b, c)| Smooth {
        a: a.chunks(3).map(|r| r.to_vec()).collect(),
        b,
        c,
    })
}

type PairFn = Box<dyn Fn(&[f64], &[f64]) -> (Vec<f64>, Vec<f64>)>;

fn flat_maps(n: usize, theta: f64, c: f64) -> Vec<PairFn> {
    let t = ThetaMap::new(n, theta).unwrap();
    let q = QuadraticMap { n, c };
    let r = from_retraction(EuclideanRetraction { n }, theta).unwrap();
    vec![
        Box::new(move |a, b| t.eval(a, b)),
        Box::new(move |a, b| q.eval(a, b)),
        Box::new(move |a, b| r.eval(a, b)),
        Box::new(move |a, b| adjoint(q).eval(a, b)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobian_matches_central_differences(f in smooth_fn(), x in vec_in(3, 1.0)) {
        let ad = jacobian_fwd(&f, &x).unwrap();
        let fd = jacobian_fd(|y| Ok(f.eval(y)), &x, 1e-6).unwrap();
        prop_assert!(ad.max_abs_diff(&fd) < 1e-6);
    }

    #[test]
    fn second_derivative_matches_gradient_differences(f in smooth_fn(), x in vec_in(3, 1.0), d in vec_in(3, 1.0)) {
        let g = SmoothScalar(f);
        let hd = second_derivative(&g, &x, &d).unwrap();
        let eps = 1e-5;
        let xp: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + eps * b).collect();
        let xm: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a - eps * b).collect();
        let (gp, gm) = (gradient(&g, &xp).unwrap(), gradient(&g, &xm).unwrap());
        let fd: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
        let scale = 1.0 + fd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(max_abs_diff(&hd, &fd) < 1e-5 * scale);
    }

    #[test]
    fn theta_maps_and_their_lifts_are_valid(theta in 0.0..=1.0f64, pts in prop::collection::vec(vec_in(2, 1.0), 10)) {
        let m = ThetaMap::new(2, theta).unwrap();
        prop_assert!(validate(&m, &pts).passed);
        prop_assert!(validate(&adjoint(m), &pts).passed);
        let lifted: Vec<Vec<f64>> = pts.iter().map(|p| [p.as_slice(), p.as_slice()].concat()).collect();
        prop_assert!(validate(&tangent_lift(m), &lifted).passed);
        prop_assert!(validate(&cotangent_lift(m), &lifted).passed);
    }

    #[test]
    fn inverse_roundtrip(theta in 0.0..=1.0f64, c in -0.3..0.3f64, q in vec_in(2, 1.0), v in small_v(2)) {
        let m = ThetaMap::new(2, theta).unwrap();
        let z = TangentPoint::new(q.clone(), v.clone()).unwrap();
        let (a, b) = eval_pair(&m, &z).unwrap();
        let back = invert(&m, &a, &b).unwrap();
        prop_assert!(max_abs_diff(&back.q, &q) < 1e-10 && max_abs_diff(&back.v, &v) < 1e-10);
        let quad = QuadraticMap { n: 2, c };
        let z = TangentPoint::new(q.clone(), v.clone()).unwrap();
        let (a, b) = eval_pair(&quad, &z).unwrap();
        let back = invert(&quad, &a, &b).unwrap();
        prop_assert!(max_abs_diff(&back.q, &q) < 1e-10 && max_abs_diff(&back.v, &v) < 1e-10);
        let (a, b) = eval_pair(&CayleyChartMap, &TangentPoint::new(vec![q[0], q[1], 0.2], vec![v[0], v[1], -0.1]).unwrap()).unwrap();
        let back = invert(&CayleyChartMap, &a, &b).unwrap();
        prop_assert!(max_abs_diff(&back.q, &[q[0], q[1], 0.2]) < 1e-10);
        prop_assert!(max_abs_diff(&back.v, &[v[0], v[1], -0.1]) < 1e-10);
    }

    #[test]
    fn adjoint_is_an_involution(theta in 0.0..=1.0f64, c in -0.3..0.3f64, q in vec_in(2, 1.0), v in small_v(2)) {
        let fs = flat_maps(2, theta, c);
        let t = ThetaMap::new(2, theta).unwrap();
        let qm = QuadraticMap { n: 2, c };
        let (a, b) = adjoint(adjoint(t)).eval(&q, &v);
        let (x, y) = fs[0](&q, &v);
        prop_assert!(max_abs_diff(&a, &x) < 1e-12 && max_abs_diff(&b, &y) < 1e-12);
        let (a, b) = adjoint(adjoint(qm)).eval(&q, &v);
        let (x, y) = fs[1](&q, &v);
        prop_assert!(max_abs_diff(&a, &x) < 1e-12 && max_abs_diff(&b, &y) < 1e-12);
        // the adjoint swaps the components and flips v
        let (a, b) = fs[3](&q, &v);
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let (x, y) = fs[1](&q, &neg);
        prop_assert!(max_abs_diff(&a, &y) < 1e-15 && max_abs_diff(&b, &x) < 1e-15);
        let ((a, b), (x, y)) = (fs[2](&q, &v), fs[0](&q, &v));
        prop_assert!(max_abs_diff(&a, &x) < 1e-15 && max_abs_diff(&b, &y) < 1e-15);
    }

    #[test]
    fn analytic_jacobians_match_ad(theta in 0.0..=1.0f64, q in vec_in(2, 1.0), v in small_v(2)) {
        let z = [TangentPoint::new(q, v).unwrap()];
        let m = ThetaMap::new(2, theta).unwrap();
        prop_assert!(analytic_jacobian_error(&m, &z).unwrap() < 1e-8);
        prop_assert!(analytic_jacobian_error(&adjoint(m), &z).unwrap() < 1e-8);
    }

    #[test]
    fn lift_adjoint_commutation(c in -0.3..0.3f64, q in vec_in(2, 1.0), v in small_v(2)) {
        let m = QuadraticMap { n: 1, c };
        let (a1, a2) = tangent_lift(adjoint(m)).eval(&q, &v);
        let (b1, b2) = adjoint(tangent_lift(m)).eval(&q, &v);
        prop_assert!(max_abs_diff(&a1, &b1) < 1e-12 && max_abs_diff(&a2, &b2) < 1e-12);
        let (a1, a2) = cotangent_lift(adjoint(m)).eval(&q, &v);
        let (b1, b2) = adjoint(cotangent_lift(m)).eval(&q, &v);
        prop_assert!(max_abs_diff(&a1, &b1) < 1e-12 && max_abs_diff(&a2, &b2) < 1e-12);
    }

    #[test]
    fn cotangent_lift_pulls_back_the_symplectic_form(
        c in -0.3..0.3f64, z in vec_in(4, 1.0), d1 in vec_in(8, 1.0), d2 in vec_in(8, 1.0)
    ) {
        let lift = cotangent_lift(QuadraticMap { n: 2, c });
        let qd: Vec<f64> = z[..2].iter().map(|x| 0.4 * x).collect();
        let pt = PhaseTangent::new(z[..2].to_vec(), z[2..].to_vec(), qd, vec![0.3, -0.2]).unwrap();
        prop_assert!(cotangent_lift_symplectic_defect(&lift, &pt, &d1, &d2).unwrap() < 1e-8);
    }

    #[test]
    fn hamiltonian_step_is_symplectic(theta in 0.0..=1.0f64, q in -1.0..1.0f64, p in -1.0..1.0f64) {
        let m = ThetaMap::new(1, theta).unwrap();
        let ham = pendulum();
        let cfg = defect_newton();
        let d = symplectic_defect(|y| Ok(hamiltonian_step(&m, &ham, &y[..1], &y[1..], 0.1, &cfg)?.state), &[q, p], DEFECT_FD_STEP).unwrap();
        prop_assert!(d < 1e-7, "defect {d}");
        let quad = QuadraticMap { n: 1, c: 0.2 };
        let d = symplectic_defect(|y| Ok(hamiltonian_step(&quad, &ham, &y[..1], &y[1..], 0.1, &cfg)?.state), &[q, p], DEFECT_FD_STEP).unwrap();
        prop_assert!(d < 1e-7, "quadratic defect {d}");
    }

    #[test]
    fn composed_methods_are_symplectic(q in -1.0..1.0f64, p in -1.0..1.0f64) {
        let sv = stormer_verlet(pendulum(), defect_newton());
        let tj = triple_jump(&sv).unwrap();
        for s in [&sv, &tj] {
            let d = symplectic_defect(|y| Ok(s.step(y, 0.1)?.state), &[q, p], DEFECT_FD_STEP).unwrap();
            prop_assert!(d < 1e-7, "{}: {d}", s.label);
        }
    }

    #[test]
    fn stormer_verlet_two_routes_agree(q in -1.5..1.5f64, p in -1.0..1.0f64, h in 0.01..0.2f64) {
        let cfg = NewtonConfig::with_tol(1e-14);
        let a = stormer_verlet(pendulum(), cfg).step(&[q, p], h).unwrap().state;
        let b = stormer_verlet_equations(pendulum(), cfg).step(&[q, p], h).unwrap().state;
        prop_assert!(max_abs_diff(&a, &b) < 1e-12);
    }
}

fn observed_order(s: &Stepper) -> f64 {
    let err = |h: f64| {
        let steps = (1.0 / h).round() as usize;
        let mut x = vec![1.0, 0.5];
        for _ in 0..steps {
            x = s.step(&x, h).unwrap().state;
        }
        let (c, sn) = (1f64.cos(), 1f64.sin());
        max_abs_diff(&x, &[c + 0.5 * sn, -sn + 0.5 * c])
    };
    (err(0.05) / err(0.025)).log2()
}

#[test]
fn symmetric_maps_give_even_order() {
    let cfg = NewtonConfig::with_tol(1e-14);
    let samples = dmap::map::random_tangent_points(1, 20, 0.5, 3);
    for theta in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let m = ThetaMap::new(1, theta).unwrap();
        let symmetric = pointwise_symmetry_condition(&m, &samples) < 1e-10;
        let k = observed_order(&Stepper::hamiltonian(m, dmap::systems::harmonic(), cfg));
        let nearest_even = (k / 2.0).round() * 2.0;
        assert_eq!(symmetric, (k - nearest_even).abs() < 0.15 && nearest_even >= 2.0, "theta {theta}: order {k}");
    }
}
