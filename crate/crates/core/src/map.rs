//! Discretization maps `R_d(q, v) = (R¹(q, v), R²(q, v))` on flat charts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{jacobian_generic, lift, values, Dual, Real};
use crate::error::{check_finite, check_len, Error, Result};
use crate::linalg::{concat, norm, Mat};
use crate::newton::{solve_implicit, NewtonConfig, ParamResidual};

pub type Point = Vec<f64>;

/// Velocity radius used by maps that do not declare their own domain.
pub const DEFAULT_DOMAIN_RADIUS: f64 = 1.0;

#[derive(Clone, Debug, PartialEq)]
pub struct TangentPoint {
    pub q: Point,
    pub v: Vec<f64>,
}

impl TangentPoint {
    pub fn new(q: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        check_len(q.len(), v.len())?;
        check_finite(&q)?;
        check_finite(&v)?;
        Ok(TangentPoint { q, v })
    }
}

pub trait DiscretizationMap: Send + Sync {
    fn dim(&self) -> usize;

    fn name(&self) -> String;

    fn eval<T: Real>(&self, q: &[T], v: &[T]) -> (Vec<T>, Vec<T>);

    /// `R_d⁻¹(x0, x1)`. The default runs Newton from `q = x0, v = x1 - x0`.
    fn inverse<T: Real>(&self, x0: &[T], x1: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        newton_inverse(self, x0, x1, &NewtonConfig::default())
    }

    fn has_closed_form_inverse(&self) -> bool {
        false
    }

    /// Hand-written Jacobian, if the map has one.
    fn analytic_jacobian(&self, _q: &[f64], _v: &[f64]) -> Option<Mat<f64>> {
        None
    }

    fn in_domain(&self, _q: &[f64], v: &[f64]) -> bool {
        norm(v) < DEFAULT_DOMAIN_RADIUS
    }
}

impl<M: DiscretizationMap + ?Sized> DiscretizationMap for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn name(&self) -> String {
        (**self).name()
    }
    fn eval<T: Real>(&self, q: &[T], v: &[T]) -> (Vec<T>, Vec<T>) {
        (**self).eval(q, v)
    }
    fn inverse<T: Real>(&self, x0: &[T], x1: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        (**self).inverse(x0, x1)
    }
    fn has_closed_form_inverse(&self) -> bool {
        (**self).has_closed_form_inverse()
    }
    fn analytic_jacobian(&self, q: &[f64], v: &[f64]) -> Option<Mat<f64>> {
        (**self).analytic_jacobian(q, v)
    }
    fn in_domain(&self, q: &[f64], v: &[f64]) -> bool {
        (**self).in_domain(q, v)
    }
}

struct InverseResidual<'a, M: ?Sized> {
    map: &'a M,
}

impl<M: DiscretizationMap + ?Sized> ParamResidual for InverseResidual<'_, M> {
    fn eval<T: Real>(&self, x: &[T], p: &[T]) -> Vec<T> {
        let n = self.map.dim();
        let (r1, r2) = self.map.eval(&x[..n], &x[n..]);
        let mut out = Vec::with_capacity(2 * n);
        out.extend(r1.iter().zip(&p[..n]).map(|(&a, &b)| a - b));
        out.extend(r2.iter().zip(&p[n..]).map(|(&a, &b)| a - b));
        out
    }
}

/// Newton inversion of a map, differentiable in `(x0, x1)`.
pub fn newton_inverse<T: Real, M: DiscretizationMap + ?Sized>(
    map: &M,
    x0: &[T],
    x1: &[T],
    cfg: &NewtonConfig,
) -> Result<(Vec<T>, Vec<T>)> {
    let n = map.dim();
    check_len(n, x0.len())?;
    check_len(n, x1.len())?;
    let a = values(x0);
    let b = values(x1);
    let guess = concat(&a, &b.iter().zip(&a).map(|(p, q)| p - q).collect::<Vec<_>>());
    let p = concat(x0, x1);
    let (x, _) = solve_implicit(&InverseResidual { map }, &p, &guess, cfg).map_err(|e| match e {
        Error::NonConvergence { residual, iterations } => Error::NoInverse { residual, iterations },
        other => other,
    })?;
    Ok((x[..n].to_vec(), x[n..].to_vec()))
}

/// The 2n×2n Jacobian `[[∂R¹/∂q, ∂R¹/∂v], [∂R²/∂q, ∂R²/∂v]]` by forward AD.
pub fn map_jacobian<T: Real, M: DiscretizationMap + ?Sized>(map: &M, q: &[T], v: &[T]) -> Mat<T> {
    let n = map.dim();
    jacobian_generic(
        |z: &[Dual<T>]| {
            let (a, b) = map.eval(&z[..n], &z[n..]);
            concat(&a, &b)
        },
        &concat(q, v),
    )
}

fn check_point<M: DiscretizationMap + ?Sized>(map: &M, z: &TangentPoint) -> Result<()> {
    check_len(map.dim(), z.q.len())?;
    check_len(map.dim(), z.v.len())?;
    check_finite(&z.q)?;
    check_finite(&z.v)?;
    if !map.in_domain(&z.q, &z.v) {
        return Err(Error::DomainViolation(format!("{} at q={:?}, v={:?}", map.name(), z.q, z.v)));
    }
    Ok(())
}

pub fn eval_pair<M: DiscretizationMap + ?Sized>(map: &M, z: &TangentPoint) -> Result<(Point, Point)> {
    check_point(map, z)?;
    let (a, b) = map.eval(&z.q, &z.v);
    check_finite(&a)?;
    check_finite(&b)?;
    Ok((a, b))
}

pub fn invert<M: DiscretizationMap + ?Sized>(map: &M, x0: &[f64], x1: &[f64]) -> Result<TangentPoint> {
    check_len(map.dim(), x0.len())?;
    check_len(map.dim(), x1.len())?;
    check_finite(x0)?;
    check_finite(x1)?;
    let (q, v) = map.inverse(x0, x1)?;
    TangentPoint::new(q, v)
}

/// Newton inversion regardless of any closed form.
pub fn invert_with<M: DiscretizationMap + ?Sized>(
    map: &M,
    x0: &[f64],
    x1: &[f64],
    cfg: &NewtonConfig,
) -> Result<TangentPoint> {
    let (q, v) = newton_inverse(map, x0, x1, cfg)?;
    TangentPoint::new(q, v)
}

/// Analytic Jacobian when the map has one, otherwise forward AD.
pub fn jacobian<M: DiscretizationMap + ?Sized>(map: &M, z: &TangentPoint) -> Result<Mat<f64>> {
    check_point(map, z)?;
    let j = match map.analytic_jacobian(&z.q, &z.v) {
        Some(j) => j,
        None => map_jacobian(map, &z.q, &z.v),
    };
    check_finite(j.data())?;
    Ok(j)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryReport {
    pub symmetric: bool,
    pub max_deviation: f64,
}

pub const SYMMETRY_TOL: f64 = 1e-10;

/// Compares `R_d` with its adjoint on the given samples.
pub fn is_symmetric<M: DiscretizationMap + ?Sized>(map: &M, samples: &[TangentPoint]) -> SymmetryReport {
    let adj = AdjointRef { inner: map };
    let mut dev = 0.0f64;
    for z in samples {
        let (a1, a2) = map.eval(&z.q, &z.v);
        let (b1, b2) = adj.eval(&z.q, &z.v);
        dev = dev.max(max_dev(&a1, &b1)).max(max_dev(&a2, &b2));
    }
    SymmetryReport { symmetric: dev < SYMMETRY_TOL, max_deviation: dev }
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| {
        let d = (x - y).abs();
        if d.is_nan() {
            f64::INFINITY
        } else {
            m.max(d)
        }
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidityReport {
    /// max |R_d(q, 0) - (q, q)|
    pub zero_section: f64,
    /// max |(∂R²/∂v - ∂R¹/∂v)(q, 0) - I|
    pub fiber_derivative: f64,
    pub passed: bool,
}

pub const VALIDITY_TOL: f64 = 1e-9;

pub fn validate<M: DiscretizationMap + ?Sized>(map: &M, points: &[Point]) -> ValidityReport {
    let n = map.dim();
    let zero = vec![0.0; n];
    let mut p1 = 0.0f64;
    let mut p2 = 0.0f64;
    for q in points {
        let (a, b) = map.eval(q, &zero);
        p1 = p1.max(max_dev(&a, q)).max(max_dev(&b, q));
        let j = map_jacobian(map, q, &zero);
        for i in 0..n {
            for k in 0..n {
                let d = j[(n + i, n + k)] - j[(i, n + k)] - if i == k { 1.0 } else { 0.0 };
                p2 = p2.max(if d.is_nan() { f64::INFINITY } else { d.abs() });
            }
        }
    }
    ValidityReport { zero_section: p1, fiber_derivative: p2, passed: p1 < VALIDITY_TOL && p2 < VALIDITY_TOL }
}

/// Validity on a submanifold: property 2 is tested only along the given
/// tangent directions at each base point.
pub fn validate_constrained<M, B>(map: &M, points: &[Point], tangent_basis: B) -> ValidityReport
where
    M: DiscretizationMap + ?Sized,
    B: Fn(&[f64]) -> Vec<Vec<f64>>,
{
    let n = map.dim();
    let zero = vec![0.0; n];
    let mut p1 = 0.0f64;
    let mut p2 = 0.0f64;
    for q in points {
        let (a, b) = map.eval(q, &zero);
        p1 = p1.max(max_dev(&a, q)).max(max_dev(&b, q));
        let j = map_jacobian(map, q, &zero);
        for e in tangent_basis(q) {
            let mut d = vec![0.0; n];
            for i in 0..n {
                for k in 0..n {
                    d[i] += (j[(n + i, n + k)] - j[(i, n + k)]) * e[k];
                }
            }
            p2 = p2.max(max_dev(&d, &e));
        }
    }
    ValidityReport { zero_section: p1, fiber_derivative: p2, passed: p1 < VALIDITY_TOL && p2 < VALIDITY_TOL }
}

/// Round-trip error `max |R_d⁻¹(R_d(q, v)) - (q, v)|` over samples.
pub fn inverse_roundtrip_error<M: DiscretizationMap + ?Sized>(map: &M, samples: &[TangentPoint]) -> Result<f64> {
    let mut err = 0.0f64;
    for z in samples {
        let (a, b) = eval_pair(map, z)?;
        let back = invert(map, &a, &b)?;
        err = err.max(max_dev(&back.q, &z.q)).max(max_dev(&back.v, &z.v));
    }
    Ok(err)
}

/// Relative disagreement between the analytic and AD Jacobians, if the map has one.
pub fn analytic_jacobian_error<M: DiscretizationMap + ?Sized>(map: &M, samples: &[TangentPoint]) -> Option<f64> {
    let mut err = 0.0f64;
    for z in samples {
        let a = map.analytic_jacobian(&z.q, &z.v)?;
        let b = map_jacobian(map, &z.q, &z.v);
        err = err.max(a.max_abs_diff(&b) / (1.0 + b.max_abs()));
    }
    Some(err)
}

/// Uniform samples in `[-r, r]^n`.
pub fn random_points(n: usize, count: usize, radius: f64, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..n).map(|_| rng.random_range(-radius..=radius)).collect()).collect()
}

/// Samples with `q` in `[-1, 1]^n` and `‖v‖ ≤ v_max`.
pub fn random_tangent_points(n: usize, count: usize, v_max: f64, seed: u64) -> Vec<TangentPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let q: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let s = norm(&v);
            let r = v_max * rng.random_range(0.0..=1.0f64);
            if s > 0.0 {
                v.iter_mut().for_each(|x| *x *= r / s);
            }
            TangentPoint { q, v }
        })
        .collect()
}

pub trait Retraction: Send + Sync {
    fn dim(&self) -> usize;
    fn name(&self) -> String;
    fn retract<T: Real>(&self, x: &[T], v: &[T]) -> Vec<T>;

    /// Closed-form inverse of `(x, v) ↦ (R(x, -θv), R(x, (1-θ)v))`, if known.
    fn pair_inverse<T: Real>(&self, _theta: f64, _x0: &[T], _x1: &[T]) -> Option<Result<(Vec<T>, Vec<T>)>> {
        None
    }

    fn in_domain(&self, _x: &[f64], v: &[f64]) -> bool {
        norm(v) < DEFAULT_DOMAIN_RADIUS
    }
}

/// `R(x, v) = x + v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EuclideanRetraction {
    pub n: usize,
}

impl Retraction for EuclideanRetraction {
    fn dim(&self) -> usize {
        self.n
    }
    fn name(&self) -> String {
        "euclidean".into()
    }
    fn retract<T: Real>(&self, x: &[T], v: &[T]) -> Vec<T> {
        x.iter().zip(v).map(|(&a, &b)| a + b).collect()
    }
    fn pair_inverse<T: Real>(&self, theta: f64, x0: &[T], x1: &[T]) -> Option<Result<(Vec<T>, Vec<T>)>> {
        let v: Vec<T> = x1.iter().zip(x0).map(|(&b, &a)| b - a).collect();
        let q = x0.iter().zip(&v).map(|(&a, &d)| a + d * theta).collect();
        Some(Ok((q, v)))
    }
    fn in_domain(&self, _x: &[f64], _v: &[f64]) -> bool {
        true
    }
}

/// `R¹(x, v) = x - θv`, `R²(x, v) = x + (1-θ)v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaMap {
    pub n: usize,
    pub theta: f64,
}

impl ThetaMap {
    pub fn new(n: usize, theta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::RejectedInput("dimension must be positive".into()));
        }
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::RejectedInput(format!("theta {theta} outside [0, 1]")));
        }
        Ok(ThetaMap { n, theta })
    }

    /// `(x, x + v)`
    pub fn explicit_euler(n: usize) -> Self {
        ThetaMap { n, theta: 0.0 }
    }

    /// `(x - v/2, x + v/2)`
    pub fn midpoint(n: usize) -> Self {
        ThetaMap { n, theta: 0.5 }
    }

    /// `(x - v, x)`, which generates symplectic Euler.
    pub fn symplectic_euler(n: usize) -> Self {
        ThetaMap { n, theta: 1.0 }
    }
}

impl DiscretizationMap for ThetaMap {
    fn dim(&self) -> usize {
        self.n
    }

    fn name(&self) -> String {
        if self.theta == 0.0 {
            "explicit-euler".into()
        } else if self.theta == 0.5 {
            "midpoint".into()
        } else if self.theta == 1.0 {
            "symplectic-euler".into()
        } else {
            format!("theta({})", self.theta)
        }
    }

    fn eval<T: Real>(&self, q: &[T], v: &[T]) -> (Vec<T>, Vec<T>) {
        let r1 = q.iter().zip(v).map(|(&a, &b)| a - b * self.theta).collect();
        let r2 = q.iter().zip(v).map(|(&a, &b)| a + b * (1.0 - self.theta)).collect();
        (r1, r2)
    }

    fn inverse<T: Real>(&self, x0: &[T], x1: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        check_len(self.n, x0.len())?;
        check_len(self.n, x1.len())?;
        let v: Vec<T> = x1.iter().zip(x0).map(|(&b, &a)| b - a).collect();
        let q = x0.iter().zip(&v).map(|(&a, &d)| a + d * self.theta).collect();
        Ok((q, v))
    }

    fn has_closed_form_inverse(&self) -> bool {
        true
    }

    fn analytic_jacobian(&self, _q: &[f64], _v: &[f64]) -> Option<Mat<f64>> {
        let n = self.n;
        let mut j = Mat::zeros(2 * n, 2 * n);
        for i in 0..n {
            j[(i, i)] = 1.0;
            j[(i, n + i)] = -self.theta;
            j[(n + i, i)] = 1.0;
            j[(n + i, n + i)] = 1.0 - self.theta;
        }
        Some(j)
    }

    fn in_domain(&self, _q: &[f64], _v: &[f64]) -> bool {
        true
    }
}

/// `R¹ = q - v/2 + c·v∘v`, `R² = q + v/2 + c·v∘v`: symmetric but not affine in `v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticMap {
    pub n: usize,
    pub c: f64,
}

impl DiscretizationMap for QuadraticMap {
    fn dim(&self) -> usize {
        self.n
    }
    fn name(&self) -> String {
        format!("quadratic({})", self.c)
    }
    fn eval<T: Real>(&self, q: &[T], v: &[T]) -> (Vec<T>, Vec<T>) {
        let r1 = q.iter().zip(v).map(|(&a, &b)| a - b * 0.5 + b * b * self.c).collect();
        let r2 = q.iter().zip(v).map(|(&a, &b)| a + b * 0.5 + b * b * self.c).collect();
        (r1, r2)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FromRetraction<R> {
    pub retraction: R,
    pub theta: f64,
}

/// `R¹(x, v) = R(x, -θv)`, `R²(x, v) = R(x, (1-θ)v)`.
pub fn from_retraction<R: Retraction>(retraction: R, theta: f64) -> Result<FromRetraction<R>> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::RejectedInput(format!("theta {theta} outside [0, 1]")));
    }
    Ok(FromRetraction { retraction, theta })
}

impl<R: Retraction> DiscretizationMap for FromRetraction<R> {
    fn dim(&self) -> usize {
        self.retraction.dim()
    }

    fn name(&self) -> String {
        format!("{}[theta={}]", self.retraction.name(), self.theta)
    }

    fn eval<T: Real>(&self, q: &[T], v: &[T]) -> (Vec<T>, Vec<T>) {
        let back: Vec<T> = v.iter().map(|&b| b * (-self.theta)).collect();
        let fwd: Vec<T> = v.iter().map(|&b| b * (1.0 - self.theta)).collect();
        (self.retraction.retract(q, &back), self.retraction.retract(q, &fwd))
    }

    fn inverse<T: Real>(&self, x0: &[T], x1: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        match self.retraction.pair_inverse(self.theta, x0, x1) {
            Some(r) => r,
            None => newton_inverse(self, x0, x1, &NewtonConfig::default()),
        }
    }

    fn has_closed_form_inverse(&self) -> bool {
        self.retraction.pair_inverse::<f64>(self.theta, &vec![0.0; self.dim()], &vec![0.0; self.dim()]).is_some()
    }

    fn in_domain(&self, q: &[f64], v: &[f64]) -> bool {
        let back: Vec<f64> = v.iter().map(|b| -b * self.theta).collect();
        let fwd: Vec<f64> = v.iter().map(|b| b * (1.0 - self.theta)).collect();
        self.retraction.in_domain(q, &back) && self.retraction.in_domain(q, &fwd)
    }
}

/// `R*(x, v) = (R²(x, -v), R¹(x, -v))`.
#[derive(Clone, Debug, PartialEq)]
pub struct Adjoint<M> {
    pub inner: M,
}

pub fn adjoint<M: DiscretizationMap>(map: M) -> Adjoint<M> {
    Adjoint { inner: map }
}

struct AdjointRef<'a, M: ?Sized> {
    inner: &'a M,
}

fn adjoint_eval<T: Real, M: DiscretizationMap + ?Sized>(m: &M, q: &[T], v: &[T]) -> (Vec<T>, Vec<T>) {
    let neg: Vec<T> = v.iter().map(|&x| -x).collect();
    let (a, b) = m.eval(q, &neg);
    (b, a)
}

fn adjoint_inverse<T: Real, M: DiscretizationMap + ?Sized>(m: &M, x0: &[T], x1: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    let (q, v) = m.inverse(x1, x0)?;
    Ok((q, v.iter().map(|&x| -x).collect()))
}

impl<M: DiscretizationMap + ?Sized> DiscretizationMap for AdjointRef<'_, M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn name(&self) -> String {
        format!("adjoint({})", self.inner.name())
    }
    fn eval<T: Real>(&self, q: &[T], v: &[T]) -> (Vec<T>, Vec<T>) {
        adjoint_eval(self.inner, q, v)
    }
}

impl<M: DiscretizationMap> DiscretizationMap for Adjoint<M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn name(&self) -> String {
        format!("adjoint({})", self.inner.name())
    }

    fn eval<T: Real>(&self, q: &[T], v: &[T]) -> (Vec<T>, Vec<T>) {
        adjoint_eval(&self.inner, q, v)
    }

    fn inverse<T: Real>(&self, x0: &[T], x1: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        adjoint_inverse(&self.inner, x0, x1)
    }

    fn has_closed_form_inverse(&self) -> bool {
        self.inner.has_closed_form_inverse()
    }

    fn analytic_jacobian(&self, q: &[f64], v: &[f64]) -> Option<Mat<f64>> {
        let n = self.dim();
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let j = self.inner.analytic_jacobian(q, &neg)?;
        let mut out = Mat::zeros(2 * n, 2 * n);
        for i in 0..n {
            for k in 0..n {
                out[(i, k)] = j[(n + i, k)];
                out[(i, n + k)] = -j[(n + i, n + k)];
                out[(n + i, k)] = j[(i, k)];
                out[(n + i, n + k)] = -j[(i, n + k)];
            }
        }
        Some(out)
    }

    fn in_domain(&self, q: &[f64], v: &[f64]) -> bool {
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        self.inner.in_domain(q, &neg)
    }
}

/// Evaluates a map at `f64` points given as plain vectors, lifted to `T`.
pub fn eval_lifted<T: Real, M: DiscretizationMap + ?Sized>(map: &M, q: &[f64], v: &[f64]) -> (Vec<T>, Vec<T>) {
    map.eval(&lift::<T>(q), &lift::<T>(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(q: &[f64], v: &[f64]) -> TangentPoint {
        TangentPoint::new(q.to_vec(), v.to_vec()).unwrap()
    }

    #[test]
    fn midpoint_eval() {
        let (a, b) = eval_pair(&ThetaMap::midpoint(1), &tp(&[0.0], &[2.0])).unwrap();
        assert_eq!((a, b), (vec![-1.0], vec![1.0]));
    }

    #[test]
    fn theta_eval_by_hand() {
        let m = ThetaMap::new(1, 0.3).unwrap();
        let (a, b) = eval_pair(&m, &tp(&[1.0], &[1.0])).unwrap();
        assert!((a[0] - 0.7).abs() < 1e-15 && (b[0] - 1.7).abs() < 1e-15);
    }

    #[test]
    fn invert_examples() {
        let z = invert(&ThetaMap::midpoint(1), &[0.0], &[2.0]).unwrap();
        assert_eq!((z.q, z.v), (vec![1.0], vec![2.0]));
        let z = invert(&ThetaMap::explicit_euler(1), &[1.0], &[1.5]).unwrap();
        assert_eq!((z.q, z.v), (vec![1.0], vec![0.5]));
    }

    #[test]
    fn newton_inverse_matches_closed_form() {
        let m = ThetaMap::new(2, 0.3).unwrap();
        let a = invert(&m, &[0.1, -0.2], &[0.4, 0.3]).unwrap();
        let b = invert_with(&m, &[0.1, -0.2], &[0.4, 0.3], &NewtonConfig::default()).unwrap();
        assert!(crate::linalg::max_abs_diff(&a.q, &b.q) < 1e-13);
        assert!(crate::linalg::max_abs_diff(&a.v, &b.v) < 1e-13);
    }

    #[test]
    fn midpoint_jacobian_blocks() {
        let j = jacobian(&ThetaMap::midpoint(1), &tp(&[0.3], &[0.2])).unwrap();
        assert_eq!(j.to_rows(), vec![vec![1.0, -0.5], vec![1.0, 0.5]]);
    }

    #[test]
    fn domain_guard_rejects() {
        let m = QuadraticMap { n: 1, c: 0.1 };
        assert!(matches!(eval_pair(&m, &tp(&[0.0], &[3.0])), Err(Error::DomainViolation(_))));
    }

    #[test]
    fn from_retraction_rejects_theta() {
        assert!(from_retraction(EuclideanRetraction { n: 1 }, 1.5).is_err());
    }

    struct Broken;
    impl DiscretizationMap for Broken {
        fn dim(&self) -> usize {
            1
        }
        fn name(&self) -> String {
            "broken".into()
        }
        fn eval<T: Real>(&self, q: &[T], v: &[T]) -> (Vec<T>, Vec<T>) {
            (vec![q[0]], vec![q[0] + v[0] * 2.0])
        }
    }

    #[test]
    fn broken_map_fails_property_two() {
        let r = validate(&Broken, &random_points(1, 10, 1.0, 3));
        assert!(!r.passed);
        assert!(r.zero_section < 1e-15);
        assert!((r.fiber_derivative - 1.0).abs() < 1e-15);
    }

    #[test]
    fn symmetry_of_theta_maps() {
        let s = random_tangent_points(2, 20, 0.5, 1);
        assert!(is_symmetric(&ThetaMap::midpoint(2), &s).symmetric);
        assert!(!is_symmetric(&ThetaMap::explicit_euler(2), &s).symmetric);
        assert!(!is_symmetric(&ThetaMap::new(2, 0.3).unwrap(), &s).symmetric);
        assert!(is_symmetric(&QuadraticMap { n: 2, c: 0.1 }, &s).symmetric);
    }
}
