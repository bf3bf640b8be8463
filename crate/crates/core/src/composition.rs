//! Steppers as values: adjoints, compositions, Störmer–Verlet, triple jump.

use std::sync::Arc;

use crate::autodiff::{lift, Real, VectorFn};
use crate::error::{check_len, Error, Result};
use crate::integrators::{hamiltonian_step, momentum_match, StepResult};
use crate::linalg::{concat, norm_inf};
use crate::map::{random_tangent_points, DiscretizationMap, TangentPoint, ThetaMap};
use crate::newton::{newton_solve, newton_solve_fd, NewtonConfig};
use crate::systems::{hamiltonian_gradient, Hamiltonian, Lagrangian};

pub type StepFn = dyn Fn(&[f64], f64) -> Result<StepResult> + Send + Sync;

#[derive(Clone)]
pub struct Stepper {
    pub step: Arc<StepFn>,
    pub declared_order: u32,
    pub symmetric: bool,
    pub symplectic: bool,
    pub label: String,
}

impl std::fmt::Debug for Stepper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stepper")
            .field("label", &self.label)
            .field("declared_order", &self.declared_order)
            .field("symmetric", &self.symmetric)
            .field("symplectic", &self.symplectic)
            .finish()
    }
}

impl Stepper {
    pub fn new<F>(label: impl Into<String>, declared_order: u32, symmetric: bool, symplectic: bool, f: F) -> Self
    where
        F: Fn(&[f64], f64) -> Result<StepResult> + Send + Sync + 'static,
    {
        Stepper { step: Arc::new(f), declared_order, symmetric, symplectic, label: label.into() }
    }

    pub fn step(&self, x: &[f64], h: f64) -> Result<StepResult> {
        (self.step)(x, h)
    }

    pub fn with_order(mut self, order: u32) -> Self {
        self.declared_order = order;
        self
    }

    /// Symplectic step generated by `map` through the cotangent lift.
    pub fn hamiltonian<M, H>(map: M, ham: H, cfg: NewtonConfig) -> Self
    where
        M: DiscretizationMap + 'static,
        H: Hamiltonian + 'static,
    {
        let samples = random_tangent_points(map.dim(), 8, 0.5, 0);
        let symmetric = pointwise_symmetry_condition(&map, &samples) < 1e-10;
        let order = if symmetric { 2 } else { 1 };
        let label = map.name();
        let n = ham.dim();
        Stepper::new(label, order, symmetric, true, move |x, h| {
            check_len(2 * n, x.len())?;
            hamiltonian_step(&map, &ham, &x[..n], &x[n..], h, &cfg)
        })
    }
}

/// `s*(x, h) = s⁻¹(x, -h)`, found by Newton on `s(y, -h) = x` from `y = s(x, h)`.
pub fn adjoint_method(s: &Stepper, cfg: NewtonConfig) -> Stepper {
    let inner = s.clone();
    Stepper::new(format!("adjoint({})", s.label), s.declared_order, s.symmetric, s.symplectic, move |x, h| {
        let guess = inner.step(x, h)?.state;
        let out = newton_solve_fd(
            |y| {
                let r = inner.step(y, -h)?;
                Ok(r.state.iter().zip(x).map(|(a, b)| a - b).collect())
            },
            &guess,
            &cfg,
        )?;
        Ok(StepResult { state: out.x, newton_iters: out.iterations })
    })
}

/// Applies `steppers[i]` with step `gammas[i]·h`, `i = 0` first.
pub fn compose(steppers: &[Stepper], gammas: &[f64]) -> Result<Stepper> {
    if steppers.len() != gammas.len() {
        return Err(Error::DimensionMismatch { expected: steppers.len(), got: gammas.len() });
    }
    if steppers.is_empty() {
        return Err(Error::RejectedInput("empty composition".into()));
    }
    let palindrome = (0..gammas.len()).all(|i| {
        let j = gammas.len() - 1 - i;
        gammas[i] == gammas[j] && steppers[i].label == steppers[j].label
    });
    let symmetric = palindrome && steppers.iter().all(|s| s.symmetric);
    let symplectic = steppers.iter().all(|s| s.symplectic);
    let order = steppers.iter().map(|s| s.declared_order).min().unwrap_or(1);
    let label = if steppers.len() == 1 {
        steppers[0].label.clone()
    } else {
        let parts: Vec<String> = steppers.iter().zip(gammas).map(|(s, g)| format!("{}@{g}", s.label)).collect();
        format!("compose[{}]", parts.join(", "))
    };
    let list: Vec<Stepper> = steppers.to_vec();
    let gs: Vec<f64> = gammas.to_vec();
    Ok(Stepper::new(label, order, symmetric, symplectic, move |x, h| {
        let mut state = x.to_vec();
        let mut iters = 0;
        for (s, g) in list.iter().zip(&gs) {
            let r = s.step(&state, g * h)?;
            state = r.state;
            iters += r.newton_iters;
        }
        Ok(StepResult { state, newton_iters: iters })
    }))
}

/// Explicit-Euler map for `h/2`, then its adjoint `(q - v, q)` for `h/2`.
pub fn stormer_verlet<H: Hamiltonian + Clone + 'static>(ham: H, cfg: NewtonConfig) -> Stepper {
    let n = ham.dim();
    let first = Stepper::hamiltonian(ThetaMap::explicit_euler(n), ham.clone(), cfg);
    let second = Stepper::hamiltonian(ThetaMap::symplectic_euler(n), ham, cfg);
    let mut sv = compose(&[first, second], &[0.5, 0.5]).expect("two steppers, two weights");
    sv.symmetric = true;
    sv.declared_order = 2;
    sv.label = "stormer-verlet".into();
    sv
}

struct HalfMomentum<'a, H> {
    ham: &'a H,
    q: &'a [f64],
    p: &'a [f64],
    h: f64,
}

impl<H: Hamiltonian> VectorFn for HalfMomentum<'_, H> {
    fn eval<T: Real>(&self, y: &[T]) -> Vec<T> {
        let (hq, _) = hamiltonian_gradient(self.ham, &lift::<T>(self.q), y);
        (0..y.len()).map(|i| y[i] - self.p[i] + hq[i] * (self.h / 2.0)).collect()
    }
}

struct FullPosition<'a, H> {
    ham: &'a H,
    q: &'a [f64],
    p_half: &'a [f64],
    h: f64,
}

impl<H: Hamiltonian> VectorFn for FullPosition<'_, H> {
    fn eval<T: Real>(&self, y: &[T]) -> Vec<T> {
        let ph = lift::<T>(self.p_half);
        let (_, hp0) = hamiltonian_gradient(self.ham, &lift::<T>(self.q), &ph);
        let (_, hp1) = hamiltonian_gradient(self.ham, y, &ph);
        (0..y.len()).map(|i| y[i] - self.q[i] - (hp0[i] + hp1[i]) * (self.h / 2.0)).collect()
    }
}

/// The three Störmer–Verlet equations solved directly:
/// `p½ = p - (h/2)H_q(q, p½)`, `q' = q + (h/2)(H_p(q, p½) + H_p(q', p½))`,
/// `p' = p½ - (h/2)H_q(q', p½)`.
pub fn stormer_verlet_equations<H: Hamiltonian + 'static>(ham: H, cfg: NewtonConfig) -> Stepper {
    let n = ham.dim();
    Stepper::new("stormer-verlet-equations", 2, true, true, move |x, h| {
        check_len(2 * n, x.len())?;
        let (q, p) = (&x[..n], &x[n..]);
        let a = newton_solve(&HalfMomentum { ham: &ham, q, p, h }, p, &cfg)?;
        let b = newton_solve(&FullPosition { ham: &ham, q, p_half: &a.x, h }, q, &cfg)?;
        let (hq, _) = hamiltonian_gradient(&ham, &b.x, &a.x);
        let p1: Vec<f64> = a.x.iter().zip(&hq).map(|(a, g)| a - 0.5 * h * g).collect();
        Ok(StepResult { state: concat(&b.x, &p1), newton_iters: a.iterations + b.iterations })
    })
}

/// Symmetric weights `(γ₁, γ₂, γ₁)` lifting a symmetric order-`p` method to `p + 2`.
pub fn triple_jump_coefficients(order: u32) -> [f64; 3] {
    let e = 1.0 / (order as f64 + 1.0);
    let r = 2f64.powf(e);
    let g1 = 1.0 / (2.0 - r);
    [g1, -r / (2.0 - r), g1]
}

pub fn triple_jump(s: &Stepper) -> Result<Stepper> {
    if !s.symmetric {
        return Err(Error::RejectedInput(format!("triple jump needs a symmetric method, got {}", s.label)));
    }
    if s.declared_order == 0 || !s.declared_order.is_multiple_of(2) {
        return Err(Error::RejectedInput(format!("triple jump needs an even order, got {}", s.declared_order)));
    }
    let g = triple_jump_coefficients(s.declared_order);
    let mut out = compose(&[s.clone(), s.clone(), s.clone()], &g)?;
    out.declared_order = s.declared_order + 2;
    out.symmetric = true;
    out.label = format!("triple-jump({})", s.label);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderConditions {
    pub sum: f64,
    pub cube_sum: f64,
    pub satisfied: bool,
}

pub fn check_order_conditions(gammas: &[f64]) -> OrderConditions {
    let sum: f64 = gammas.iter().sum();
    let cube_sum: f64 = gammas.iter().map(|g| g * g * g).sum();
    OrderConditions { sum, cube_sum, satisfied: (sum - 1.0).abs() < 1e-12 && cube_sum.abs() < 1e-12 }
}

/// `sup ‖R_d(q, v) - swap(R_d(q, -v))‖₁` over samples.
pub fn pointwise_symmetry_condition<M: DiscretizationMap + ?Sized>(map: &M, samples: &[TangentPoint]) -> f64 {
    let mut worst = 0.0f64;
    for z in samples {
        let (a1, a2) = map.eval(&z.q, &z.v);
        let neg: Vec<f64> = z.v.iter().map(|x| -x).collect();
        let (b1, b2) = map.eval(&z.q, &neg);
        let d: f64 = a1.iter().zip(&b2).chain(a2.iter().zip(&b1)).map(|(x, y)| (x - y).abs()).sum();
        worst = if d.is_nan() { f64::INFINITY } else { worst.max(d) };
    }
    worst
}

#[derive(Clone, Debug, PartialEq)]
pub struct MicroNodeStep {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    /// Intermediate node `q̄` and its momentum.
    pub q_mid: Vec<f64>,
    pub p_mid: Vec<f64>,
    /// `‖D₂L¹_d(q0, q̄) + D₁L²_d(q̄, q1)‖∞` at the solution.
    pub elimination_residual: f64,
    pub newton_iters: usize,
}

/// Two-map variational step for `L¹_d + L²_d` with the micro-node `q̄` eliminated
/// by `D₂L¹_d(q0, q̄) + D₁L²_d(q̄, q1) = 0`. Substeps have lengths `γ₁h`, `γ₂h`.
#[allow(clippy::too_many_arguments)]
pub fn eliminate_micro_node<M1, M2, L>(
    map1: &M1,
    map2: &M2,
    lag: &L,
    gammas: [f64; 2],
    q: &[f64],
    p: &[f64],
    h: f64,
    cfg: &NewtonConfig,
) -> Result<MicroNodeStep>
where
    M1: DiscretizationMap,
    M2: DiscretizationMap,
    L: Lagrangian,
{
    let a = momentum_match(map1, lag, q, p, gammas[0] * h, cfg)?;
    let n = lag.dim();
    let (q_mid, p_mid) = (a.state[..n].to_vec(), a.state[n..].to_vec());
    let b = momentum_match(map2, lag, &q_mid, &p_mid, gammas[1] * h, cfg)?;
    let (q1, p1) = (b.state[..n].to_vec(), b.state[n..].to_vec());
    let (_, d2) = crate::integrators::discrete_lagrangian_slots(map1, lag, gammas[0] * h, q, &q_mid);
    let (d1, _) = crate::integrators::discrete_lagrangian_slots(map2, lag, gammas[1] * h, &q_mid, &q1);
    let elim: Vec<f64> = d2.iter().zip(&d1).map(|(a, b)| a + b).collect();
    Ok(MicroNodeStep {
        q: q1,
        p: p1,
        q_mid,
        p_mid,
        elimination_residual: norm_inf(&elim),
        newton_iters: a.newton_iters + b.newton_iters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::systems::harmonic;

    #[test]
    fn triple_jump_conditions() {
        let g = triple_jump_coefficients(2);
        let c = check_order_conditions(&g);
        assert!(c.satisfied);
        assert!((c.sum - 1.0).abs() < 1e-15 && c.cube_sum.abs() < 1e-15);
        assert_eq!(check_order_conditions(&[1.0]), OrderConditions { sum: 1.0, cube_sum: 1.0, satisfied: false });
        let half = check_order_conditions(&[0.5, 0.5]);
        assert_eq!((half.sum, half.cube_sum, half.satisfied), (1.0, 0.25, false));
    }

    #[test]
    fn explicit_euler_symmetry_example() {
        let s = [TangentPoint { q: vec![0.0], v: vec![1.0] }];
        assert_eq!(pointwise_symmetry_condition(&ThetaMap::explicit_euler(1), &s), 2.0);
        assert_eq!(pointwise_symmetry_condition(&ThetaMap::midpoint(1), &s), 0.0);
    }

    #[test]
    fn single_stepper_composition_is_transparent() {
        let s = Stepper::hamiltonian(ThetaMap::midpoint(1), harmonic(), NewtonConfig::default());
        let c = compose(std::slice::from_ref(&s), &[1.0]).unwrap();
        let a = s.step(&[0.4, 0.1], 0.1).unwrap().state;
        let b = c.step(&[0.4, 0.1], 0.1).unwrap().state;
        assert_eq!(a, b);
    }

    #[test]
    fn triple_jump_rejects_nonsymmetric() {
        let s = Stepper::hamiltonian(ThetaMap::explicit_euler(1), harmonic(), NewtonConfig::default());
        assert!(!s.symmetric);
        assert!(triple_jump(&s).is_err());
    }

    #[test]
    fn adjoint_of_midpoint_is_midpoint() {
        let s = Stepper::hamiltonian(ThetaMap::midpoint(1), harmonic(), NewtonConfig::default());
        let a = adjoint_method(&s, NewtonConfig::default());
        let x = [0.7, -0.3];
        let d = max_abs_diff(&s.step(&x, 0.1).unwrap().state, &a.step(&x, 0.1).unwrap().state);
        assert!(d < 1e-10, "{d}");
    }
}
