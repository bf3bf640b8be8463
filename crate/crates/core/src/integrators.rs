//! One-step methods generated by discretization maps.
//!
//! Every scheme is written as a residual in the unknown next state and solved
//! by damped Newton with AD Jacobians. States are stacked: `(q, p)` for
//! Hamiltonian schemes, `(q, v)` for SODE and Lagrangian schemes.

use crate::autodiff::{gradient_generic, jacobian_fd, jvp_generic, lift, Dual, Real, VectorFn};
use crate::error::{check_len, Error, Result};
use crate::linalg::{canonical_j, concat, Mat};
use crate::lifts::{cotangent_inverse, CotangentLift};
use crate::map::{DiscretizationMap, TangentPoint};
use crate::newton::{newton_solve, NewtonConfig};
use crate::systems::{hamiltonian_field, hamiltonian_gradient, Hamiltonian, Lagrangian, LegendreHamiltonian, Sode, VectorField};

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub state: Vec<f64>,
    pub newton_iters: usize,
}

fn nan_vec<T: Real>(n: usize) -> Vec<T> {
    vec![T::cst(f64::NAN); n]
}

fn scaled<T: Real>(x: &[T], h: f64) -> Vec<T> {
    x.iter().map(|&a| a * h).collect()
}

struct OdeResidual<'a, M, X> {
    map: &'a M,
    field: &'a X,
    xk: &'a [f64],
    h: f64,
}

impl<M: DiscretizationMap, X: VectorField> VectorFn for OdeResidual<'_, M, X> {
    fn eval<T: Real>(&self, z: &[T]) -> Vec<T> {
        let v = scaled(&self.field.field(z), self.h);
        let (r1, _) = self.map.eval(z, &v);
        r1.iter().zip(self.xk).map(|(&a, &b)| a - b).collect()
    }
}

/// `x_{k+1}` with `R_d⁻¹(x_k, x_{k+1}) = (z, hX(z))`.
///
/// Solved in the base point `z` via `R¹(z, hX(z)) = x_k`, then `x_{k+1} = R²(z, hX(z))`.
pub fn ode_step<M: DiscretizationMap, X: VectorField>(
    map: &M,
    field: &X,
    xk: &[f64],
    h: f64,
    cfg: &NewtonConfig,
) -> Result<StepResult> {
    check_len(map.dim(), field.dim())?;
    check_len(map.dim(), xk.len())?;
    let out = newton_solve(&OdeResidual { map, field, xk, h }, xk, cfg)?;
    let v = scaled(&field.field(&out.x), h);
    let (_, x1) = map.eval(&out.x, &v);
    Ok(StepResult { state: x1, newton_iters: out.iterations })
}

fn sode_fiber<T: Real, S: Sode>(sode: &S, q: &[T], v: &[T], h: f64) -> Vec<T> {
    concat(&scaled(v, h), &scaled(&sode.gamma(q, v), h))
}

struct EndpointResidual<'a, M, S> {
    map: &'a M,
    sode: &'a S,
    target: Vec<f64>,
    h: f64,
}

impl<M: DiscretizationMap, S: Sode> VectorFn for EndpointResidual<'_, M, S> {
    fn eval<T: Real>(&self, z: &[T]) -> Vec<T> {
        let n = self.sode.dim();
        let (r1, _) = self.map.eval(z, &sode_fiber(self.sode, &z[..n], &z[n..], self.h));
        r1.iter().zip(&self.target).map(|(&a, &b)| a - b).collect()
    }
}

fn check_tq<M: DiscretizationMap, S: Sode>(map: &M, sode: &S, q: &[f64], v: &[f64]) -> Result<()> {
    check_len(2 * sode.dim(), map.dim())?;
    check_len(sode.dim(), q.len())?;
    check_len(sode.dim(), v.len())
}

fn euler_guess<S: Sode>(sode: &S, q: &[f64], v: &[f64], h: f64) -> Vec<f64> {
    let g = sode.gamma(q, v);
    let q1: Vec<f64> = q.iter().zip(v).map(|(a, b)| a + h * b).collect();
    let v1: Vec<f64> = v.iter().zip(&g).map(|(a, b)| a + h * b).collect();
    concat(&q1, &v1)
}

/// `R²(z_k, h Γ̂(z_k)) = R¹(z_{k+1}, h Γ̂(z_{k+1}))` with `Γ̂(q, v) = (v, Γ(q, v))`.
pub fn sode_step_endpoint<M: DiscretizationMap, S: Sode>(
    map_tq: &M,
    sode: &S,
    q: &[f64],
    v: &[f64],
    h: f64,
    cfg: &NewtonConfig,
) -> Result<StepResult> {
    check_tq(map_tq, sode, q, v)?;
    let z0 = concat(q, v);
    let (_, target) = map_tq.eval(&z0, &sode_fiber(sode, q, v, h));
    let res = EndpointResidual { map: map_tq, sode, target, h };
    let out = newton_solve(&res, &euler_guess(sode, q, v, h), cfg)?;
    Ok(StepResult { state: out.x, newton_iters: out.iterations })
}

struct MidbaseResidual<'a, M, S> {
    map: &'a M,
    sode: &'a S,
    z0: Vec<f64>,
    h: f64,
}

impl<M: DiscretizationMap, S: Sode> VectorFn for MidbaseResidual<'_, M, S> {
    fn eval<T: Real>(&self, z1: &[T]) -> Vec<T> {
        let n = self.sode.dim();
        match self.map.inverse(&lift::<T>(&self.z0), z1) {
            Ok((base, fib)) => {
                let target = sode_fiber(self.sode, &base[..n], &base[n..], self.h);
                fib.iter().zip(&target).map(|(&a, &b)| a - b).collect()
            }
            Err(_) => nan_vec(2 * n),
        }
    }
}

/// `R⁻¹(z_k, z_{k+1}) = h Γ̂(τ(R⁻¹(z_k, z_{k+1})))`.
pub fn sode_step_midbase<M: DiscretizationMap, S: Sode>(
    map_tq: &M,
    sode: &S,
    q: &[f64],
    v: &[f64],
    h: f64,
    cfg: &NewtonConfig,
) -> Result<StepResult> {
    check_tq(map_tq, sode, q, v)?;
    let res = MidbaseResidual { map: map_tq, sode, z0: concat(q, v), h };
    let out = newton_solve(&res, &euler_guess(sode, q, v, h), cfg)?;
    Ok(StepResult { state: out.x, newton_iters: out.iterations })
}

struct HamiltonianResidual<'a, M, H> {
    map: &'a M,
    ham: &'a H,
    q0: &'a [f64],
    p0: &'a [f64],
    h: f64,
}

impl<M: DiscretizationMap, H: Hamiltonian> VectorFn for HamiltonianResidual<'_, M, H> {
    fn eval<T: Real>(&self, z: &[T]) -> Vec<T> {
        let n = self.ham.dim();
        let (q0, p0) = (lift::<T>(self.q0), lift::<T>(self.p0));
        match cotangent_inverse(self.map, &q0, &p0, &z[..n], &z[n..]) {
            Ok([zq, zp, dq, dp]) => {
                let (hq, hp) = hamiltonian_gradient(self.ham, &zq, &zp);
                let r1 = dq.iter().zip(&hp).map(|(&a, &b)| a - b * self.h);
                let r2 = dp.iter().zip(&hq).map(|(&a, &b)| a + b * self.h);
                r1.chain(r2).collect()
            }
            Err(_) => nan_vec(2 * n),
        }
    }
}

fn explicit_euler_guess<H: Hamiltonian>(ham: &H, q: &[f64], p: &[f64], h: f64) -> Vec<f64> {
    let (dq, dp) = hamiltonian_field(ham, q, p);
    let q1: Vec<f64> = q.iter().zip(&dq).map(|(a, b)| a + h * b).collect();
    let p1: Vec<f64> = p.iter().zip(&dp).map(|(a, b)| a + h * b).collect();
    concat(&q1, &p1)
}

fn check_qp<M: DiscretizationMap, H: Hamiltonian>(map: &M, ham: &H, q: &[f64], p: &[f64]) -> Result<()> {
    check_len(ham.dim(), map.dim())?;
    check_len(ham.dim(), q.len())?;
    check_len(ham.dim(), p.len())
}

/// Symplectic step: `(R^{T*})⁻¹(q_k, p_k; q_{k+1}, p_{k+1}) = h X_H` at its base point.
pub fn hamiltonian_step<M: DiscretizationMap, H: Hamiltonian>(
    map: &M,
    ham: &H,
    q: &[f64],
    p: &[f64],
    h: f64,
    cfg: &NewtonConfig,
) -> Result<StepResult> {
    check_qp(map, ham, q, p)?;
    let res = HamiltonianResidual { map, ham, q0: q, p0: p, h };
    let out = newton_solve(&res, &explicit_euler_guess(ham, q, p, h), cfg)?;
    Ok(StepResult { state: out.x, newton_iters: out.iterations })
}

struct NonSymplecticResidual<'a, M, H> {
    lift: CotangentLift<&'a M>,
    ham: &'a H,
    target: Vec<f64>,
    h: f64,
}

fn scaled_field<T: Real, H: Hamiltonian>(ham: &H, q: &[T], p: &[T], h: f64) -> Vec<T> {
    let (a, b) = hamiltonian_field(ham, q, p);
    concat(&scaled(&a, h), &scaled(&b, h))
}

impl<M: DiscretizationMap, H: Hamiltonian> VectorFn for NonSymplecticResidual<'_, M, H> {
    fn eval<T: Real>(&self, z: &[T]) -> Vec<T> {
        let n = self.ham.dim();
        let (r1, _) = self.lift.eval(z, &scaled_field(self.ham, &z[..n], &z[n..], self.h));
        r1.iter().zip(&self.target).map(|(&a, &b)| a - b).collect()
    }
}

/// `(R^{T*})²(z_k, hX_H(z_k)) = (R^{T*})¹(z_{k+1}, hX_H(z_{k+1}))`. Not symplectic.
pub fn hamiltonian_step_endpoint_nonsymplectic<M: DiscretizationMap, H: Hamiltonian>(
    map: &M,
    ham: &H,
    q: &[f64],
    p: &[f64],
    h: f64,
    cfg: &NewtonConfig,
) -> Result<StepResult> {
    check_qp(map, ham, q, p)?;
    let lift = CotangentLift { base: map };
    let (_, target) = lift.eval(&concat(q, p), &scaled_field(ham, q, p, h));
    let res = NonSymplecticResidual { lift, ham, target, h };
    let out = newton_solve(&res, &explicit_euler_guess(ham, q, p, h), cfg)?;
    Ok(StepResult { state: out.x, newton_iters: out.iterations })
}

/// Hamiltonian step on `H = E_L` conjugated by the Legendre transform.
pub fn lagrangian_step<M: DiscretizationMap, L: Lagrangian>(
    map: &M,
    lag: &L,
    q: &[f64],
    v: &[f64],
    h: f64,
    cfg: &NewtonConfig,
) -> Result<StepResult> {
    check_len(lag.dim(), q.len())?;
    check_len(lag.dim(), v.len())?;
    let p = lag.legendre(q, v);
    let ham = LegendreHamiltonian { lag };
    let step = hamiltonian_step(map, &ham, q, &p, h, cfg)?;
    let n = lag.dim();
    let v1 = lag.legendre_inv(&step.state[..n], &step.state[n..])?;
    Ok(StepResult { state: concat(&step.state[..n], &v1), newton_iters: step.newton_iters })
}

/// `R^L = (FL⁻¹, FL⁻¹) ∘ R^{T*} ∘ TFL`, a map on `TQ` with base `(q, v)` and fiber `(δq, δv)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianLift<M, L> {
    pub map: M,
    pub lag: L,
}

impl<M: DiscretizationMap, L: Lagrangian> DiscretizationMap for LagrangianLift<M, L> {
    fn dim(&self) -> usize {
        2 * self.lag.dim()
    }

    fn name(&self) -> String {
        format!("lagrangian-lift({})", self.map.name())
    }

    fn eval<T: Real>(&self, x: &[T], w: &[T]) -> (Vec<T>, Vec<T>) {
        let n = self.lag.dim();
        let (q, v) = (&x[..n], &x[n..]);
        let p = self.lag.legendre(q, v);
        let (_, pdot) = jvp_generic(|z: &[Dual<T>]| self.lag.legendre(&z[..n], &z[n..]), x, w);
        let cot = CotangentLift { base: &self.map };
        let (a, b) = cot.eval(&concat(q, &p), &concat(&w[..n], &pdot));
        let back = |z: &[T]| match self.lag.legendre_inv(&z[..n], &z[n..]) {
            Ok(v) => concat(&z[..n], &v),
            Err(_) => nan_vec(2 * n),
        };
        (back(&a), back(&b))
    }

    fn in_domain(&self, x: &[f64], w: &[f64]) -> bool {
        let n = self.lag.dim();
        self.map.in_domain(&x[..n], &w[..n])
    }
}

/// `L_d(q0, q1) = h L(q, v/h)` with `(q, v) = R_d⁻¹(q0, q1)`.
pub fn discrete_lagrangian_generic<T: Real, M: DiscretizationMap, L: Lagrangian>(
    map: &M,
    lag: &L,
    h: f64,
    q0: &[T],
    q1: &[T],
) -> Result<T> {
    let (q, v) = map.inverse(q0, q1)?;
    Ok(lag.l(&q, &scaled(&v, 1.0 / h)) * h)
}

pub fn discrete_lagrangian<M: DiscretizationMap, L: Lagrangian>(
    map: &M,
    lag: &L,
    h: f64,
    q0: &[f64],
    q1: &[f64],
) -> Result<f64> {
    check_len(map.dim(), lag.dim())?;
    check_len(map.dim(), q0.len())?;
    check_len(map.dim(), q1.len())?;
    discrete_lagrangian_generic(map, lag, h, q0, q1)
}

/// `(D₁L_d, D₂L_d)` at `(q0, q1)`.
pub fn discrete_lagrangian_slots<T: Real, M: DiscretizationMap, L: Lagrangian>(
    map: &M,
    lag: &L,
    h: f64,
    q0: &[T],
    q1: &[T],
) -> (Vec<T>, Vec<T>) {
    let n = lag.dim();
    let g = gradient_generic(
        |z: &[Dual<T>]| {
            discrete_lagrangian_generic(map, lag, h, &z[..n], &z[n..]).unwrap_or(Dual::cst(f64::NAN))
        },
        &concat(q0, q1),
    );
    (g[..n].to_vec(), g[n..].to_vec())
}

struct DelResidual<'a, M, L> {
    map: &'a M,
    lag: &'a L,
    qk: &'a [f64],
    offset: Vec<f64>,
    h: f64,
}

impl<M: DiscretizationMap, L: Lagrangian> VectorFn for DelResidual<'_, M, L> {
    fn eval<T: Real>(&self, q1: &[T]) -> Vec<T> {
        let (d1, _) = discrete_lagrangian_slots(self.map, self.lag, self.h, &lift::<T>(self.qk), q1);
        d1.iter().zip(&self.offset).map(|(&a, &b)| a + b).collect()
    }
}

/// Discrete Euler–Lagrange: `D₁L_d(q_k, q_{k+1}) + D₂L_d(q_{k-1}, q_k) = 0`.
pub fn variational_step<M: DiscretizationMap, L: Lagrangian>(
    map: &M,
    lag: &L,
    q_prev: &[f64],
    qk: &[f64],
    h: f64,
    cfg: &NewtonConfig,
) -> Result<StepResult> {
    check_len(map.dim(), lag.dim())?;
    check_len(lag.dim(), q_prev.len())?;
    check_len(lag.dim(), qk.len())?;
    let (_, d2) = discrete_lagrangian_slots(map, lag, h, q_prev, qk);
    let guess: Vec<f64> = qk.iter().zip(q_prev).map(|(a, b)| 2.0 * a - b).collect();
    let out = newton_solve(&DelResidual { map, lag, qk, offset: d2, h }, &guess, cfg)?;
    Ok(StepResult { state: out.x, newton_iters: out.iterations })
}

/// `p_k = -D₁L_d(q_k, q_{k+1})` solved for `q_{k+1}`, then `p_{k+1} = D₂L_d(q_k, q_{k+1})`.
pub fn momentum_match<M: DiscretizationMap, L: Lagrangian>(
    map: &M,
    lag: &L,
    q: &[f64],
    p: &[f64],
    h: f64,
    cfg: &NewtonConfig,
) -> Result<StepResult> {
    check_len(map.dim(), lag.dim())?;
    check_len(lag.dim(), q.len())?;
    check_len(lag.dim(), p.len())?;
    let v = lag.legendre_inv(q, p)?;
    let guess: Vec<f64> = q.iter().zip(&v).map(|(a, b)| a + h * b).collect();
    let out = newton_solve(&DelResidual { map, lag, qk: q, offset: p.to_vec(), h }, &guess, cfg)?;
    let (_, p1) = discrete_lagrangian_slots(map, lag, h, q, &out.x);
    if p1.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(StepResult { state: concat(&out.x, &p1), newton_iters: out.iterations })
}

/// Map on `TQ` with base `(q, v)` and fiber `(q̇, v̇)`:
/// `R¹ = (q - q̇/2 + c v̇, v - γ v̇)`, `R² = (q + q̇/2 + c v̇, v + (1-γ) v̇)`, `c = h(γ - 2β)/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewmarkMap {
    pub n: usize,
    pub gamma: f64,
    pub beta: f64,
    pub h: f64,
}

impl NewmarkMap {
    pub fn new(n: usize, gamma: f64, beta: f64, h: f64) -> Self {
        NewmarkMap { n, gamma, beta, h }
    }

    fn c(&self) -> f64 {
        0.5 * self.h * (self.gamma - 2.0 * self.beta)
    }
}

impl DiscretizationMap for NewmarkMap {
    fn dim(&self) -> usize {
        2 * self.n
    }

    fn name(&self) -> String {
        format!("newmark({},{})", self.gamma, self.beta)
    }

    fn eval<T: Real>(&self, x: &[T], w: &[T]) -> (Vec<T>, Vec<T>) {
        let n = self.n;
        let (c, g) = (self.c(), self.gamma);
        let (q, v, qd, vd) = (&x[..n], &x[n..], &w[..n], &w[n..]);
        let mut r1 = Vec::with_capacity(2 * n);
        let mut r2 = Vec::with_capacity(2 * n);
        for i in 0..n {
            r1.push(q[i] - qd[i] * 0.5 + vd[i] * c);
            r2.push(q[i] + qd[i] * 0.5 + vd[i] * c);
        }
        for i in 0..n {
            r1.push(v[i] - vd[i] * g);
            r2.push(v[i] + vd[i] * (1.0 - g));
        }
        (r1, r2)
    }

    fn inverse<T: Real>(&self, z0: &[T], z1: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        let n = self.n;
        check_len(2 * n, z0.len())?;
        check_len(2 * n, z1.len())?;
        let vd: Vec<T> = (0..n).map(|i| z1[n + i] - z0[n + i]).collect();
        let qd: Vec<T> = (0..n).map(|i| z1[i] - z0[i]).collect();
        let q: Vec<T> = (0..n).map(|i| (z0[i] + z1[i]) * 0.5 - vd[i] * self.c()).collect();
        let v: Vec<T> = (0..n).map(|i| z0[n + i] + vd[i] * self.gamma).collect();
        Ok((concat(&q, &v), concat(&qd, &vd)))
    }

    fn has_closed_form_inverse(&self) -> bool {
        true
    }

    fn in_domain(&self, _x: &[f64], _w: &[f64]) -> bool {
        true
    }
}

/// `max ‖R²(R¹, DR¹·Γ̂) - R¹(R², DR²·Γ̂)‖∞` over samples, `Γ̂(q, v) = (v, Γ(q, v))`.
pub fn sode_commutativity_residual<M: DiscretizationMap, S: Sode>(map: &M, sode: &S, samples: &[TangentPoint]) -> f64 {
    let n = map.dim();
    let mut worst = 0.0f64;
    for z in samples {
        let x = concat(&z.q, &z.v);
        let dir = concat(&z.v, &sode.gamma(&z.q, &z.v));
        let (val, der) = jvp_generic(
            |y: &[Dual<f64>]| {
                let (a, b) = map.eval(&y[..n], &y[n..]);
                concat(&a, &b)
            },
            &x,
            &dir,
        );
        let (_, left) = map.eval(&val[..n], &der[..n]);
        let (right, _) = map.eval(&val[n..], &der[n..]);
        for (a, b) in left.iter().zip(&right) {
            let d = (a - b).abs();
            worst = if d.is_nan() { f64::INFINITY } else { worst.max(d) };
        }
    }
    worst
}

/// Central-difference Jacobian of a one-step map.
pub fn step_jacobian_fd<F: Fn(&[f64]) -> Result<Vec<f64>>>(step: F, x: &[f64], fd_step: f64) -> Result<Mat<f64>> {
    jacobian_fd(step, x, fd_step)
}

/// `‖MᵀJM - J‖∞` (largest entry) for the step Jacobian `M` at `x = (q, p)`.
pub fn symplectic_defect<F: Fn(&[f64]) -> Result<Vec<f64>>>(step: F, x: &[f64], fd_step: f64) -> Result<f64> {
    if !x.len().is_multiple_of(2) {
        return Err(Error::RejectedInput("phase-space state must have even length".into()));
    }
    let m = step_jacobian_fd(step, x, fd_step)?;
    let j = canonical_j(x.len() / 2);
    Ok(m.transpose().matmul(&j).matmul(&m).max_abs_diff(&j))
}

pub const DEFECT_FD_STEP: f64 = 1e-6;

/// Newton settings used when differencing step maps.
pub fn defect_newton() -> NewtonConfig {
    NewtonConfig::with_tol(1e-13)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub h: f64,
    pub states: Vec<Vec<f64>>,
    pub newton_iters: Vec<usize>,
    pub energies: Vec<f64>,
}

impl Trajectory {
    /// Runs `steps` steps of `step` from `x0`, recording `energy` at each state.
    pub fn integrate<S, E>(x0: &[f64], h: f64, steps: usize, step: S, energy: E) -> Result<Self>
    where
        S: Fn(&[f64], f64) -> Result<StepResult>,
        E: Fn(&[f64]) -> f64,
    {
        let mut states = Vec::with_capacity(steps + 1);
        let mut energies = Vec::with_capacity(steps + 1);
        let mut iters = Vec::with_capacity(steps);
        states.push(x0.to_vec());
        energies.push(energy(x0));
        for _ in 0..steps {
            let r = step(states.last().expect("non-empty"), h)?;
            if r.state.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
            energies.push(energy(&r.state));
            iters.push(r.newton_iters);
            states.push(r.state);
        }
        Ok(Trajectory { h, states, newton_iters: iters, energies })
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().expect("non-empty")
    }

    pub fn energy_drift_max(&self) -> f64 {
        let e0 = self.energies[0];
        self.energies.iter().fold(0.0, |m, e| m.max((e - e0).abs()))
    }

    pub fn newton_iters_mean(&self) -> f64 {
        if self.newton_iters.is_empty() {
            0.0
        } else {
            self.newton_iters.iter().sum::<usize>() as f64 / self.newton_iters.len() as f64
        }
    }
}
