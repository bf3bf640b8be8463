//! Schemes checked against hand-derived formulas and textbook recursions.

use dmap::autodiff::Real;
use dmap::composition::{adjoint_method, check_order_conditions, compose, triple_jump, triple_jump_coefficients, Stepper};
use dmap::error::Error;
use dmap::integrators::{
    discrete_lagrangian, hamiltonian_step, hamiltonian_step_endpoint_nonsymplectic, lagrangian_step, momentum_match,
    ode_step, sode_step_endpoint, sode_step_midbase, variational_step, NewmarkMap,
};
use dmap::lifts::tangent_lift;
use dmap::linalg::max_abs_diff;
use dmap::map::{random_tangent_points, ThetaMap};
use dmap::newton::NewtonConfig;
use dmap::systems::{harmonic, pendulum, Hamiltonian, Mechanical, Spring, VectorField, ZeroPotential};

fn cfg() -> NewtonConfig {
    NewtonConfig::with_tol(1e-14)
}

struct Square;

impl VectorField for Square {
    fn dim(&self) -> usize {
        1
    }
    fn field<T: Real>(&self, x: &[T]) -> Vec<T> {
        vec![x[0] * x[0] + T::one()]
    }
}

struct Still;

impl VectorField for Still {
    fn dim(&self) -> usize {
        2
    }
    fn field<T: Real>(&self, _x: &[T]) -> Vec<T> {
        vec![T::zero(); 2]
    }
}

#[test]
fn ode_step_midpoint_is_implicit_midpoint() {
    let (x0, h) = (0.3, 0.1);
    let x1 = ode_step(&ThetaMap::midpoint(1), &Square, &[x0], h, &cfg()).unwrap().state[0];
    let mid = 0.5 * (x0 + x1);
    assert!(((x1 - x0) / h - (mid * mid + 1.0)).abs() < 1e-12);
    let y = ode_step(&ThetaMap::midpoint(2), &Still, &[0.4, -1.0], h, &cfg()).unwrap().state;
    assert_eq!(y, vec![0.4, -1.0]);
}

#[test]
fn sode_endpoint_with_lifted_midpoint_is_trapezoidal() {
    let pend = pendulum();
    let (q0, v0, h) = (0.7, -0.2, 0.1);
    let s = sode_step_endpoint(&tangent_lift(ThetaMap::midpoint(1)), &pend, &[q0], &[v0], h, &cfg()).unwrap();
    let (q1, v1) = (s.state[0], s.state[1]);
    assert!(((q1 - q0) / h - 0.5 * (v0 + v1)).abs() < 1e-12);
    assert!(((v1 - v0) / h - 0.5 * (-q0.sin() - q1.sin())).abs() < 1e-12);

    let free = Mechanical::unit(ZeroPotential { n: 1 });
    let s = sode_step_endpoint(&tangent_lift(ThetaMap::midpoint(1)), &free, &[q0], &[v0], h, &cfg()).unwrap();
    assert!(max_abs_diff(&s.state, &[q0 + h * v0, v0]) < 1e-15);
}

#[test]
fn sode_midbase_oscillator_matches_linear_solve() {
    let (q0, v0, h) = (1.0, 0.0, 0.1);
    let s = sode_step_midbase(&tangent_lift(ThetaMap::midpoint(1)), &harmonic(), &[q0], &[v0], h, &cfg()).unwrap();
    // q1 - (h/2)v1 = q0 + (h/2)v0 ; (h/2)q1 + v1 = v0 - (h/2)q0
    let (a, b, c, d) = (1.0, -h / 2.0, h / 2.0, 1.0);
    let (r1, r2) = (q0 + h / 2.0 * v0, v0 - h / 2.0 * q0);
    let det = a * d - b * c;
    let expect = [(r1 * d - b * r2) / det, (a * r2 - c * r1) / det];
    assert!(max_abs_diff(&s.state, &expect) < 1e-14);

    let free = Mechanical::unit(ZeroPotential { n: 1 });
    let lift = tangent_lift(ThetaMap::midpoint(1));
    let a = sode_step_midbase(&lift, &free, &[q0], &[0.3], h, &cfg()).unwrap();
    let b = sode_step_endpoint(&lift, &free, &[q0], &[0.3], h, &cfg()).unwrap();
    assert!(max_abs_diff(&a.state, &b.state) < 1e-15);
}

#[test]
fn hamiltonian_step_examples() {
    let pend = pendulum();
    let (q0, p0, h) = (0.8, 0.4, 0.1);
    // midpoint → implicit midpoint rule
    let s = hamiltonian_step(&ThetaMap::midpoint(1), &pend, &[q0], &[p0], h, &cfg()).unwrap().state;
    let (qm, pm) = (0.5 * (q0 + s[0]), 0.5 * (p0 + s[1]));
    assert!(((s[0] - q0) / h - pm).abs() < 1e-12);
    assert!(((s[1] - p0) / h + qm.sin()).abs() < 1e-12);
    // (q - v, q) → symplectic Euler, explicit for separable H
    let s = hamiltonian_step(&ThetaMap::symplectic_euler(1), &pend, &[q0], &[p0], h, &cfg()).unwrap().state;
    assert!((s[0] - (q0 + h * p0)).abs() < 1e-14);
    assert!((s[1] - (p0 - h * s[0].sin())).abs() < 1e-14);
    // (q, q + v) → the other symplectic Euler
    let s = hamiltonian_step(&ThetaMap::explicit_euler(1), &pend, &[q0], &[p0], h, &cfg()).unwrap().state;
    let p1 = p0 - h * q0.sin();
    assert!(max_abs_diff(&s, &[q0 + h * p1, p1]) < 1e-14);
}

#[test]
fn harmonic_midpoint_matches_cayley_transform() {
    let h: f64 = 0.1;
    let s = hamiltonian_step(&ThetaMap::midpoint(1), &harmonic(), &[1.0], &[0.0], h, &cfg()).unwrap().state;
    // (I - hA/2)⁻¹(I + hA/2) with A = [[0, 1], [-1, 0]]
    let a = h / 2.0;
    let det = 1.0 + a * a;
    let expect = [(1.0 - a * a) / det, -2.0 * a / det];
    assert!(max_abs_diff(&s, &expect) < 1e-15);
    assert!((s[0] - 0.995012).abs() < 1e-6 && (s[1] + 0.099751).abs() < 1e-6);
}

#[test]
fn endpoint_control_is_trapezoidal() {
    let pend = pendulum();
    let (q0, p0, h) = (0.8, 0.4, 0.1);
    let s = hamiltonian_step_endpoint_nonsymplectic(&ThetaMap::midpoint(1), &pend, &[q0], &[p0], h, &cfg())
        .unwrap()
        .state;
    assert!(((s[0] - q0) / h - 0.5 * (p0 + s[1])).abs() < 1e-12);
    assert!(((s[1] - p0) / h + 0.5 * (q0.sin() + s[0].sin())).abs() < 1e-12);

    struct Flat;
    impl Hamiltonian for Flat {
        fn dim(&self) -> usize {
            1
        }
        fn h<T: Real>(&self, _q: &[T], _p: &[T]) -> T {
            T::cst(3.0)
        }
    }
    let s = hamiltonian_step_endpoint_nonsymplectic(&ThetaMap::midpoint(1), &Flat, &[q0], &[p0], h, &cfg()).unwrap();
    assert_eq!(s.state, vec![q0, p0]);
}

#[test]
fn lagrangian_step_midpoint_display() {
    let pend = pendulum();
    let (q0, v0, h) = (0.5, 0.9, 0.1);
    let s = lagrangian_step(&ThetaMap::midpoint(1), &pend, &[q0], &[v0], h, &cfg()).unwrap().state;
    let (q1, v1) = (s[0], s[1]);
    assert!((0.5 * (v0 + v1) - (q1 - q0) / h).abs() < 1e-12);
    assert!(((v1 - v0) / h + (0.5 * (q0 + q1)).sin()).abs() < 1e-12);

    let free = Mechanical::unit(ZeroPotential { n: 2 });
    let s = lagrangian_step(&ThetaMap::midpoint(2), &free, &[0.1, 0.2], &[1.0, -1.0], h, &cfg()).unwrap();
    assert!(max_abs_diff(&s.state, &[0.2, 0.1, 1.0, -1.0]) < 1e-15);
}

#[test]
fn discrete_lagrangian_formulas() {
    let h = 0.1;
    let free = Mechanical::unit(ZeroPotential { n: 1 });
    let v = discrete_lagrangian(&ThetaMap::midpoint(1), &free, h, &[0.2], &[0.5]).unwrap();
    assert!((v - h * ((0.5 - 0.2) / h).powi(2) / 2.0).abs() < 1e-14);
    assert_eq!(discrete_lagrangian(&ThetaMap::midpoint(1), &free, h, &[0.4], &[0.4]).unwrap(), 0.0);
    let pend = pendulum();
    for z in random_tangent_points(1, 20, 0.5, 7) {
        let (q0, q1) = (z.q[0], z.q[0] + z.v[0]);
        let ld = discrete_lagrangian(&ThetaMap::midpoint(1), &pend, h, &[q0], &[q1]).unwrap();
        let hand = h * (0.5 * ((q1 - q0) / h).powi(2) + (0.5 * (q0 + q1)).cos());
        assert!((ld - hand).abs() < 1e-14 * (1.0 + hand.abs()));
    }
}

#[test]
fn variational_free_particle_is_linear() {
    let free = Mechanical::unit(ZeroPotential { n: 2 });
    let s = variational_step(&ThetaMap::midpoint(2), &free, &[0.0, 1.0], &[0.3, 0.8], 0.1, &cfg()).unwrap();
    assert!(max_abs_diff(&s.state, &[0.6, 0.6]) < 1e-14);
}

#[test]
fn momentum_match_midpoint_display() {
    let pend = pendulum();
    let (q0, p0, h) = (0.6, -0.3, 0.1);
    let s = momentum_match(&ThetaMap::midpoint(1), &pend, &[q0], &[p0], h, &cfg()).unwrap().state;
    let (q1, p1) = (s[0], s[1]);
    let qm = 0.5 * (q0 + q1);
    assert!(((p1 - p0) / h + qm.sin()).abs() < 1e-12);
    assert!((0.5 * (p0 + p1) - (q1 - q0) / h).abs() < 1e-12);
}

#[test]
fn momentum_match_tracks_hamiltonian_step() {
    fn track<S: Hamiltonian + dmap::systems::Lagrangian>(sys: &S) {
        let mid = ThetaMap::midpoint(1);
        let mut x = vec![1.0, 0.2];
        for _ in 0..100 {
            let a = hamiltonian_step(&mid, sys, &x[..1], &x[1..], 0.1, &cfg()).unwrap().state;
            let b = momentum_match(&mid, sys, &x[..1], &x[1..], 0.1, &cfg()).unwrap().state;
            assert!(max_abs_diff(&a, &b) < 1e-9);
            x = a;
        }
    }
    track(&harmonic());
    track(&pendulum());
}

/// Textbook Newmark on `q̈ = -k q`, solved exactly as a linear equation in `q_{k+1}`.
fn newmark_linear(k: f64, q: f64, v: f64, h: f64, g: f64, b: f64) -> (f64, f64) {
    let a0 = -k * q;
    let q1 = (q + h * v + 0.5 * h * h * (1.0 - 2.0 * b) * a0) / (1.0 + h * h * b * k);
    let v1 = v + h * ((1.0 - g) * a0 - g * k * q1);
    (q1, v1)
}

#[test]
fn newmark_spring_matches_textbook() {
    let spring = Mechanical::unit(Spring { n: 1, k: 2.0 });
    let h = 0.1;
    for (g, b) in [(0.6, 0.3), (0.5, 0.25), (0.5, 0.0)] {
        let map = NewmarkMap::new(1, g, b, h);
        let (mut q, mut v) = (1.0, 0.3);
        for _ in 0..100 {
            let s = sode_step_endpoint(&map, &spring, &[q], &[v], h, &cfg()).unwrap().state;
            let (q1, v1) = newmark_linear(2.0, q, v, h, g, b);
            assert!((s[0] - q1).abs() < 1e-10 && (s[1] - v1).abs() < 1e-10, "({g}, {b})");
            (q, v) = (q1, v1);
        }
    }
}

#[test]
fn newmark_zero_fiber_is_diagonal() {
    let m = NewmarkMap::new(2, 0.6, 0.3, 0.1);
    let x = [0.1, 0.2, -0.3, 0.4];
    assert_eq!(dmap::map::DiscretizationMap::eval(&m, &x, &[0.0; 4]), (x.to_vec(), x.to_vec()));
}

#[test]
fn adjoint_of_symplectic_euler_is_the_other_one() {
    let pend = pendulum();
    let q_first = Stepper::hamiltonian(ThetaMap::symplectic_euler(1), pend.clone(), cfg());
    let p_first = Stepper::hamiltonian(ThetaMap::explicit_euler(1), pend.clone(), cfg());
    let adj = adjoint_method(&q_first, cfg());
    let twice = adjoint_method(&adj, cfg());
    let mid = Stepper::hamiltonian(ThetaMap::midpoint(1), pend, cfg());
    let mid_adj = adjoint_method(&mid, cfg());
    for z in random_tangent_points(1, 10, 1.0, 5) {
        let x = [z.q[0], z.v[0]];
        let a = adj.step(&x, 0.1).unwrap().state;
        assert!(max_abs_diff(&a, &p_first.step(&x, 0.1).unwrap().state) < 1e-10);
        assert!(max_abs_diff(&twice.step(&x, 0.1).unwrap().state, &q_first.step(&x, 0.1).unwrap().state) < 1e-10);
        assert!(max_abs_diff(&mid_adj.step(&x, 0.1).unwrap().state, &mid.step(&x, 0.1).unwrap().state) < 1e-10);
    }
}

#[test]
fn two_half_midpoint_steps() {
    let pend = pendulum();
    let mid = Stepper::hamiltonian(ThetaMap::midpoint(1), pend, cfg());
    let c = compose(&[mid.clone(), mid.clone()], &[0.5, 0.5]).unwrap();
    assert!(c.symmetric && c.declared_order == 2);
    let x = [0.9, 0.1];
    let half = mid.step(&mid.step(&x, 0.05).unwrap().state, 0.05).unwrap().state;
    assert_eq!(c.step(&x, 0.1).unwrap().state, half);
}

/// Symplectic DIRK with `a_ij = b_j (j < i)`, `a_ii = b_i/2` on `ẏ = A y`, `A = [[0, 1], [-1, 0]]`.
fn dirk_linear(b: &[f64], y: [f64; 2], h: f64) -> [f64; 2] {
    let apply = |v: [f64; 2]| [v[1], -v[0]];
    let mut ks: Vec<[f64; 2]> = Vec::new();
    for &bi in b {
        let mut base = y;
        for (j, k) in ks.iter().enumerate() {
            base[0] += h * b[j] * k[0];
            base[1] += h * b[j] * k[1];
        }
        // k = A(base + c k), c = h b_i / 2  ⇒  (I - cA)k = A base
        let c = h * bi / 2.0;
        let rhs = apply(base);
        let det = 1.0 + c * c;
        let k = [(rhs[0] + c * rhs[1]) / det, (rhs[1] - c * rhs[0]) / det];
        ks.push(k);
    }
    let mut out = y;
    for (j, k) in ks.iter().enumerate() {
        out[0] += h * b[j] * k[0];
        out[1] += h * b[j] * k[1];
    }
    out
}

#[test]
fn dirk_is_a_midpoint_composition() {
    let mid = Stepper::hamiltonian(ThetaMap::midpoint(1), harmonic(), cfg());
    for b in [vec![0.2, 0.5, 0.3], triple_jump_coefficients(2).to_vec()] {
        let c = compose(&vec![mid.clone(); b.len()], &b).unwrap();
        let mut y = [1.0, 0.25];
        for _ in 0..50 {
            let ours = c.step(&y, 0.1).unwrap().state;
            let oracle = dirk_linear(&b, y, 0.1);
            assert!(max_abs_diff(&ours, &oracle) < 1e-10);
            y = oracle;
        }
    }
}

#[test]
fn triple_jump_coefficients_match_closed_form() {
    let cbrt2 = 2f64.powf(1.0 / 3.0);
    let g = triple_jump_coefficients(2);
    assert!((g[0] - 1.0 / (2.0 - cbrt2)).abs() < 1e-15);
    assert!((g[1] + cbrt2 / (2.0 - cbrt2)).abs() < 1e-15);
    let c = check_order_conditions(&g);
    assert!((c.sum - 1.0).abs() < 1e-15 && c.cube_sum.abs() < 1e-15 && c.satisfied);
    let g6 = triple_jump_coefficients(4);
    assert!((g6.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    assert!(g6.iter().map(|x| x.powi(5)).sum::<f64>().abs() < 1e-14);
}

#[test]
fn precondition_errors() {
    let se = Stepper::hamiltonian(ThetaMap::symplectic_euler(1), harmonic(), cfg());
    assert!(matches!(triple_jump(&se), Err(Error::RejectedInput(_))));
    assert!(matches!(compose(std::slice::from_ref(&se), &[0.5, 0.5]), Err(Error::DimensionMismatch { .. })));
    assert!(ThetaMap::new(1, 1.5).is_err());
    let short = hamiltonian_step(&ThetaMap::midpoint(2), &harmonic(), &[1.0], &[0.0], 0.1, &cfg());
    assert!(matches!(short, Err(Error::DimensionMismatch { .. })));
}
