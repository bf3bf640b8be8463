//! Damped Newton iteration and implicit solves that stay differentiable.

use crate::autodiff::{jacobian_fd, jacobian_generic, lift, Dual, Real, VectorFn};
use crate::error::{Error, Result};
use crate::linalg::{norm_inf, Mat};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JacobianMode {
    Ad,
    FiniteDifference,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub jacobian_mode: JacobianMode,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { tol: 1e-12, max_iter: 50, jacobian_mode: JacobianMode::Ad }
    }
}

impl NewtonConfig {
    pub fn with_tol(tol: f64) -> Self {
        NewtonConfig { tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tol > 0.0 && self.tol.is_finite() && self.max_iter > 0 {
            Ok(())
        } else {
            Err(Error::RejectedInput(format!("invalid newton config {self:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

const FD_STEP: f64 = 1e-7;

fn eval_checked(f: &dyn Fn(&[f64]) -> Result<Vec<f64>>, x: &[f64]) -> Result<Vec<f64>> {
    let r = f(x)?;
    if r.iter().all(|v| v.is_finite()) {
        Ok(r)
    } else {
        Err(Error::NonFinite)
    }
}

/// Newton with backtracking. `jac` supplies the Jacobian at the current iterate.
pub fn newton_core(
    f: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    jac: &dyn Fn(&[f64]) -> Result<Mat<f64>>,
    guess: &[f64],
    cfg: &NewtonConfig,
) -> Result<NewtonOutcome> {
    cfg.validate()?;
    let mut x = guess.to_vec();
    let mut r = eval_checked(f, &x)?;
    if r.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: r.len() });
    }
    let mut rn = norm_inf(&r);
    for it in 0..=cfg.max_iter {
        if rn <= cfg.tol {
            return Ok(NewtonOutcome { x, iterations: it, residual: rn });
        }
        if it == cfg.max_iter {
            break;
        }
        let j = jac(&x)?;
        let dx = j.solve(&r)?;
        let xscale = 1.0 + norm_inf(&x);
        if norm_inf(&dx) <= 4.0 * f64::EPSILON * xscale && rn <= 1e3 * cfg.tol {
            // Stalled at roundoff level just above the tolerance.
            return Ok(NewtonOutcome { x, iterations: it, residual: rn });
        }
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a - lambda * d).collect();
            if let Ok(rt) = eval_checked(f, &trial) {
                let tn = norm_inf(&rt);
                if tn < rn || lambda < 1e-8 {
                    x = trial;
                    r = rt;
                    rn = tn;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::NonConvergence { residual: rn, iterations: it + 1 });
        }
    }
    Err(Error::NonConvergence { residual: rn, iterations: cfg.max_iter })
}

/// Solves `residual(x) = 0` starting from `guess`.
pub fn newton_solve<F: VectorFn>(residual: &F, guess: &[f64], cfg: &NewtonConfig) -> Result<NewtonOutcome> {
    let f = |x: &[f64]| Ok(residual.eval(x));
    match cfg.jacobian_mode {
        JacobianMode::Ad => {
            let jac = |x: &[f64]| {
                let j = jacobian_generic(|y: &[Dual<f64>]| residual.eval(y), x);
                if j.data().iter().all(|v| v.is_finite()) {
                    Ok(j)
                } else {
                    Err(Error::NonFinite)
                }
            };
            newton_core(&f, &jac, guess, cfg)
        }
        JacobianMode::FiniteDifference => {
            let jac = |x: &[f64]| jacobian_fd(|y| Ok(residual.eval(y)), x, FD_STEP);
            newton_core(&f, &jac, guess, cfg)
        }
    }
}

/// Newton on a plain closure, with finite-difference Jacobians.
pub fn newton_solve_fd<F: Fn(&[f64]) -> Result<Vec<f64>>>(
    f: F,
    guess: &[f64],
    cfg: &NewtonConfig,
) -> Result<NewtonOutcome> {
    let jac = |x: &[f64]| jacobian_fd(&f, x, FD_STEP);
    newton_core(&f, &jac, guess, cfg)
}

/// A residual `F(x; p)` whose root `x(p)` is wanted as a differentiable function of `p`.
pub trait ParamResidual {
    fn eval<T: Real>(&self, x: &[T], p: &[T]) -> Vec<T>;
}

struct Frozen<'a, R> {
    r: &'a R,
    p: Vec<f64>,
}

impl<R: ParamResidual> VectorFn for Frozen<'_, R> {
    fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        self.r.eval(x, &lift::<T>(&self.p))
    }
}

/// Solves `F(x; p) = 0` in `f64`, then applies `T::DEPTH` Newton corrections in
/// `T` so that every derivative layer carried by `p` is exact at the root.
pub fn solve_implicit<T: Real, R: ParamResidual>(
    r: &R,
    p: &[T],
    guess: &[f64],
    cfg: &NewtonConfig,
) -> Result<(Vec<T>, NewtonOutcome)> {
    let pv: Vec<f64> = p.iter().map(|v| v.value()).collect();
    let out = newton_solve(&Frozen { r, p: pv }, guess, cfg)?;
    let mut x: Vec<T> = lift(&out.x);
    for _ in 0..T::DEPTH {
        let pd: Vec<Dual<T>> = p.iter().map(|&v| Dual::constant(v)).collect();
        let j = jacobian_generic(|y: &[Dual<T>]| r.eval(y, &pd), &x);
        let res = r.eval(&x, p);
        let dx = j.solve(&res)?;
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi -= d;
        }
    }
    Ok((x, out))
}
