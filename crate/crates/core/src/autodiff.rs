//! Forward-mode dual numbers.
//!
//! `Dual<T>` carries one tangent direction. Nesting (`Dual<Dual<f64>>`) gives
//! directional second derivatives. Jacobians take one pass per input.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Scalar type that every differentiable function in the crate is generic over.
pub trait Real:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
{
    /// Nesting depth: 0 for `f64`, one more per `Dual` layer.
    const DEPTH: usize;

    fn cst(x: f64) -> Self;
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn atan(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn is_finite(&self) -> bool;

    fn zero() -> Self {
        Self::cst(0.0)
    }
    fn one() -> Self {
        Self::cst(1.0)
    }
    fn recip(self) -> Self {
        Self::one() / self
    }
    fn abs(self) -> Self {
        if self.value() < 0.0 {
            -self
        } else {
            self
        }
    }
    /// Branches on values only, so it is differentiable away from the cut.
    fn atan2(self, x: Self) -> Self {
        let (yv, xv) = (self.value(), x.value());
        let pi = std::f64::consts::PI;
        if xv.abs() >= yv.abs() {
            let base = (self / x).atan();
            if xv > 0.0 {
                base
            } else if yv >= 0.0 {
                base + pi
            } else {
                base - pi
            }
        } else {
            let base = -(x / self).atan();
            if yv > 0.0 {
                base + pi / 2.0
            } else {
                base - pi / 2.0
            }
        }
    }
}

impl Real for f64 {
    const DEPTH: usize = 0;

    fn cst(x: f64) -> Self {
        x
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn atan(self) -> Self {
        f64::atan(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Real> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Dual { re, eps }
    }

    pub fn constant(re: T) -> Self {
        Dual { re, eps: T::zero() }
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual::new(self.re * o.re, self.eps * o.re + self.re * o.eps)
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = o.re.recip();
        let re = self.re * inv;
        Dual::new(re, (self.eps - re * o.eps) * inv)
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<T: Real> Add<f64> for Dual<T> {
    type Output = Self;
    fn add(self, o: f64) -> Self {
        Dual::new(self.re + o, self.eps)
    }
}

impl<T: Real> Sub<f64> for Dual<T> {
    type Output = Self;
    fn sub(self, o: f64) -> Self {
        Dual::new(self.re - o, self.eps)
    }
}

impl<T: Real> Mul<f64> for Dual<T> {
    type Output = Self;
    fn mul(self, o: f64) -> Self {
        Dual::new(self.re * o, self.eps * o)
    }
}

impl<T: Real> Div<f64> for Dual<T> {
    type Output = Self;
    fn div(self, o: f64) -> Self {
        Dual::new(self.re / o, self.eps / o)
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl<T: Real> $tr for Dual<T> {
            fn $m(&mut self, o: Self) {
                *self = *self $op o;
            }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /);

impl<T: Real> Real for Dual<T> {
    const DEPTH: usize = T::DEPTH + 1;

    fn cst(x: f64) -> Self {
        Dual::constant(T::cst(x))
    }
    fn value(&self) -> f64 {
        self.re.value()
    }
    fn sin(self) -> Self {
        Dual::new(self.re.sin(), self.eps * self.re.cos())
    }
    fn cos(self) -> Self {
        Dual::new(self.re.cos(), -(self.eps * self.re.sin()))
    }
    fn tan(self) -> Self {
        let t = self.re.tan();
        Dual::new(t, self.eps * (t * t + 1.0))
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        Dual::new(e, self.eps * e)
    }
    fn ln(self) -> Self {
        Dual::new(self.re.ln(), self.eps / self.re)
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Dual::new(s, self.eps / (s * 2.0))
    }
    fn atan(self) -> Self {
        Dual::new(self.re.atan(), self.eps / (self.re * self.re + 1.0))
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        Dual::new(self.re.powi(n), self.eps * self.re.powi(n - 1) * n as f64)
    }
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.eps.is_finite()
    }
}

/// A vector-valued function that can be evaluated on any `Real`.
pub trait VectorFn {
    fn eval<T: Real>(&self, x: &[T]) -> Vec<T>;
}

/// A scalar function that can be evaluated on any `Real`.
pub trait ScalarFn {
    fn eval<T: Real>(&self, x: &[T]) -> T;
}

pub fn lift<T: Real>(x: &[f64]) -> Vec<T> {
    x.iter().map(|&v| T::cst(v)).collect()
}

pub fn values<T: Real>(x: &[T]) -> Vec<f64> {
    x.iter().map(|v| v.value()).collect()
}

fn seeded<T: Real>(x: &[T], j: usize) -> Vec<Dual<T>> {
    x.iter()
        .enumerate()
        .map(|(i, &v)| Dual::new(v, if i == j { T::one() } else { T::zero() }))
        .collect()
}

/// Jacobian of `f` at `x` in arbitrary `Real` arithmetic.
pub fn jacobian_generic<T: Real, F: Fn(&[Dual<T>]) -> Vec<Dual<T>>>(f: F, x: &[T]) -> Mat<T> {
    let mut cols = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let out = f(&seeded(x, j));
        cols.push(out.iter().map(|d| d.eps).collect::<Vec<_>>());
    }
    let m = cols.first().map_or(0, |c| c.len());
    let mut jac = Mat::zeros(m, x.len());
    for (j, col) in cols.iter().enumerate() {
        for i in 0..m {
            jac[(i, j)] = col[i];
        }
    }
    jac
}

/// Directional derivative `Df(x)·dir` together with `f(x)`.
pub fn jvp_generic<T: Real, F: Fn(&[Dual<T>]) -> Vec<Dual<T>>>(
    f: F,
    x: &[T],
    dir: &[T],
) -> (Vec<T>, Vec<T>) {
    let xd: Vec<Dual<T>> = x.iter().zip(dir).map(|(&a, &b)| Dual::new(a, b)).collect();
    let out = f(&xd);
    (out.iter().map(|d| d.re).collect(), out.iter().map(|d| d.eps).collect())
}

pub fn gradient_generic<T: Real, F: Fn(&[Dual<T>]) -> Dual<T>>(f: F, x: &[T]) -> Vec<T> {
    (0..x.len()).map(|j| f(&seeded(x, j)).eps).collect()
}

pub fn jacobian_fwd<F: VectorFn>(f: &F, x: &[f64]) -> Result<Mat<f64>> {
    let j = jacobian_generic(|y| f.eval(y), x);
    if j.data().iter().all(|v| v.is_finite()) {
        Ok(j)
    } else {
        Err(Error::NonFinite)
    }
}

pub fn gradient<F: ScalarFn>(f: &F, x: &[f64]) -> Result<Vec<f64>> {
    let g = gradient_generic(|y| f.eval(y), x);
    if g.iter().all(|v| v.is_finite()) {
        Ok(g)
    } else {
        Err(Error::NonFinite)
    }
}

/// Hessian-vector product `∇²f(x)·dir` by nesting two dual layers.
pub fn second_derivative<F: ScalarFn>(f: &F, x: &[f64], dir: &[f64]) -> Result<Vec<f64>> {
    if dir.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: dir.len() });
    }
    let outer: Vec<Dual<f64>> = x.iter().zip(dir).map(|(&a, &b)| Dual::new(a, b)).collect();
    let g = gradient_generic(|y: &[Dual<Dual<f64>>]| f.eval(y), &outer);
    let h: Vec<f64> = g.iter().map(|d| d.eps).collect();
    if h.iter().all(|v| v.is_finite()) {
        Ok(h)
    } else {
        Err(Error::NonFinite)
    }
}

/// Central finite-difference Jacobian of a fallible `f64` function.
pub fn jacobian_fd<F: Fn(&[f64]) -> Result<Vec<f64>>>(f: F, x: &[f64], step: f64) -> Result<Mat<f64>> {
    let mut cols = Vec::with_capacity(x.len());
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        xp[j] = x[j] + step;
        let fp = f(&xp)?;
        xp[j] = x[j] - step;
        let fm = f(&xp)?;
        xp[j] = x[j];
        cols.push(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * step)).collect::<Vec<_>>());
    }
    let m = cols.first().map_or(0, |c| c.len());
    let mut jac = Mat::zeros(m, x.len());
    for (j, col) in cols.iter().enumerate() {
        for i in 0..m {
            jac[(i, j)] = col[i];
        }
    }
    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Pair;
    impl VectorFn for Pair {
        fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
            vec![x[0] * x[1], x[0].sin()]
        }
    }

    struct Quartic;
    impl ScalarFn for Quartic {
        fn eval<T: Real>(&self, x: &[T]) -> T {
            x[0].powi(4)
        }
    }

    #[test]
    fn jacobian_of_product_and_sine() {
        let j = jacobian_fwd(&Pair, &[1.0, 2.0]).unwrap();
        assert_eq!(j[(0, 0)], 2.0);
        assert_eq!(j[(0, 1)], 1.0);
        assert!((j[(1, 0)] - 1f64.cos()).abs() < 1e-15);
        assert_eq!(j[(1, 1)], 0.0);
    }

    #[test]
    fn quartic_second_derivative() {
        let h = second_derivative(&Quartic, &[2.0], &[1.0]).unwrap();
        assert!((h[0] - 48.0).abs() < 1e-12);
    }

    #[test]
    fn atan2_matches_std() {
        for &(y, x) in &[(1.0, 2.0), (-1.0, 2.0), (1.0, -2.0), (-1.0, -2.0), (3.0, 0.5), (-3.0, 0.5), (2.0, -0.1)] {
            assert!((Real::atan2(y, x) - f64::atan2(y, x)).abs() < 1e-14);
        }
    }

    #[test]
    fn division_rule() {
        let x = Dual::new(3.0, 1.0);
        let y = Dual::constant(1.0) / (x * x);
        assert!((y.eps + 2.0 / 27.0).abs() < 1e-15);
    }
}
