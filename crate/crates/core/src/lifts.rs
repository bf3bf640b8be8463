//! Canonical maps on iterated bundles and the tangent and cotangent lifts.
//!
//! Lifted maps are ordinary [`DiscretizationMap`]s of dimension `2n`:
//!
//! * tangent lift: base slot `(q, q̇)`, fiber slot `(v, v̇)`;
//! * cotangent lift: base slot `(q, p)`, fiber slot `(q̇, ṗ)`.
//!
//! Momenta are row vectors multiplying Jacobian blocks from the left.

use crate::autodiff::{jvp_generic, Dual, Real};
use crate::error::{check_len, Error, Result};
use crate::linalg::{concat, dot, Mat};
use crate::map::{map_jacobian, DiscretizationMap};

type Quad = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>);

fn same_len(parts: [&[f64]; 4]) -> Result<()> {
    let n = parts[0].len();
    for p in &parts[1..] {
        check_len(n, p.len())?;
    }
    Ok(())
}

/// `κ(q, v, q̇, v̇) = (q, q̇, v, v̇)`
pub fn kappa(q: &[f64], v: &[f64], qdot: &[f64], vdot: &[f64]) -> Result<Quad> {
    same_len([q, v, qdot, vdot])?;
    Ok((q.to_vec(), qdot.to_vec(), v.to_vec(), vdot.to_vec()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CotangentPoint {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl CotangentPoint {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        check_len(q.len(), p.len())?;
        if q.iter().chain(&p).all(|x| x.is_finite()) {
            Ok(CotangentPoint { q, p })
        } else {
            Err(Error::NonFinite)
        }
    }
}

/// An element `(q, p, q̇, ṗ)` of `TT*Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseTangent {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub qdot: Vec<f64>,
    pub pdot: Vec<f64>,
}

impl PhaseTangent {
    pub fn new(q: Vec<f64>, p: Vec<f64>, qdot: Vec<f64>, pdot: Vec<f64>) -> Result<Self> {
        same_len([&q, &p, &qdot, &pdot])?;
        Ok(PhaseTangent { q, p, qdot, pdot })
    }
}

/// `α(q, p, q̇, ṗ) = (q, q̇, ṗ, p)`
pub fn alpha(x: &PhaseTangent) -> Result<Quad> {
    same_len([&x.q, &x.p, &x.qdot, &x.pdot])?;
    Ok((x.q.clone(), x.qdot.clone(), x.pdot.clone(), x.p.clone()))
}

/// Inverse of [`alpha`]: `(q, q̇, ṗ, p) ↦ (q, p, q̇, ṗ)`.
pub fn alpha_inv(q: &[f64], qdot: &[f64], pdot: &[f64], p: &[f64]) -> Result<PhaseTangent> {
    same_len([q, qdot, pdot, p])?;
    Ok(PhaseTangent { q: q.to_vec(), p: p.to_vec(), qdot: qdot.to_vec(), pdot: pdot.to_vec() })
}

/// `Φ(q0, p0; q1, p1) = (q0, q1, -p0, p1)`
pub fn phi(a0: &CotangentPoint, a1: &CotangentPoint) -> Result<Quad> {
    same_len([&a0.q, &a0.p, &a1.q, &a1.p])?;
    Ok((a0.q.clone(), a1.q.clone(), a0.p.iter().map(|x| -x).collect(), a1.p.clone()))
}

pub fn phi_inv(q0: &[f64], q1: &[f64], m0: &[f64], m1: &[f64]) -> Result<(CotangentPoint, CotangentPoint)> {
    same_len([q0, q1, m0, m1])?;
    Ok((
        CotangentPoint { q: q0.to_vec(), p: m0.iter().map(|x| -x).collect() },
        CotangentPoint { q: q1.to_vec(), p: m1.to_vec() },
    ))
}

/// Pairing of `α_Q(V)` with `w = (x, δx, ẋ, δẋ) ∈ TTQ`: `ṗ·ẋ + p·δẋ`.
///
/// `V = (q, p, q̇, ṗ)` must sit over `(x, δx)`, i.e. `q = x` and `q̇ = δx`.
pub fn pairing_t(v: &PhaseTangent, w: &[Vec<f64>; 4]) -> Result<f64> {
    same_len([&v.q, &v.p, &v.qdot, &v.pdot])?;
    same_len([&w[0], &w[1], &w[2], &w[3]])?;
    check_len(v.q.len(), w[0].len())?;
    let tol = 1e-9;
    let off = |a: &[f64], b: &[f64]| a.iter().zip(b).any(|(x, y)| (x - y).abs() > tol * (1.0 + x.abs()));
    if off(&v.q, &w[0]) || off(&v.qdot, &w[1]) {
        return Err(Error::RejectedInput("pairing base points do not match".into()));
    }
    Ok(dot(&v.pdot, &w[2]) + dot(&v.p, &w[3]))
}

/// `R^T(q, q̇, v, v̇) = (R¹(q, v), DR¹·(q̇, v̇); R²(q, v), DR²·(q̇, v̇))`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentLift<M> {
    pub base: M,
}

pub fn tangent_lift<M: DiscretizationMap>(base: M) -> TangentLift<M> {
    TangentLift { base }
}

impl<M: DiscretizationMap> DiscretizationMap for TangentLift<M> {
    fn dim(&self) -> usize {
        2 * self.base.dim()
    }

    fn name(&self) -> String {
        format!("tangent-lift({})", self.base.name())
    }

    fn eval<T: Real>(&self, x: &[T], w: &[T]) -> (Vec<T>, Vec<T>) {
        let n = self.base.dim();
        let point = concat(&x[..n], &w[..n]);
        let dir = concat(&x[n..], &w[n..]);
        let (val, der) = jvp_generic(
            |z: &[Dual<T>]| {
                let (a, b) = self.base.eval(&z[..n], &z[n..]);
                concat(&a, &b)
            },
            &point,
            &dir,
        );
        (concat(&val[..n], &der[..n]), concat(&val[n..], &der[n..]))
    }

    fn inverse<T: Real>(&self, z0: &[T], z1: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        let n = self.base.dim();
        check_len(2 * n, z0.len())?;
        check_len(2 * n, z1.len())?;
        let (q, v) = self.base.inverse(&z0[..n], &z1[..n])?;
        let j = map_jacobian(&self.base, &q, &v);
        let fib = j.solve(&concat(&z0[n..], &z1[n..])).map_err(|_| Error::NoInverse {
            residual: f64::INFINITY,
            iterations: 0,
        })?;
        Ok((concat(&q, &fib[..n]), concat(&v, &fib[n..])))
    }

    fn has_closed_form_inverse(&self) -> bool {
        self.base.has_closed_form_inverse()
    }

    fn in_domain(&self, x: &[f64], w: &[f64]) -> bool {
        let n = self.base.dim();
        self.base.in_domain(&x[..n], &w[..n])
    }
}

/// `R^{T*}(q, p, q̇, ṗ) = Φ⁻¹(R_d(q, q̇), (ṗ, p)·(DR_d(q, q̇))⁻¹)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CotangentLift<M> {
    pub base: M,
}

pub fn cotangent_lift<M: DiscretizationMap>(base: M) -> CotangentLift<M> {
    CotangentLift { base }
}

/// `(R^{T*})⁻¹` through the closed form
/// `α⁻¹(R_d⁻¹(q0, q1), (-p0, p1)·DR_d)`, returned as `(q, p, q̇, ṗ)`.
pub fn cotangent_inverse<T: Real, M: DiscretizationMap + ?Sized>(
    base: &M,
    q0: &[T],
    p0: &[T],
    q1: &[T],
    p1: &[T],
) -> Result<[Vec<T>; 4]> {
    let (q, v) = base.inverse(q0, q1)?;
    let j = map_jacobian(base, &q, &v);
    let m: Vec<T> = concat(&p0.iter().map(|&x| -x).collect::<Vec<_>>(), p1);
    let row = j.vec_mul(&m);
    let n = base.dim();
    Ok([q, row[n..].to_vec(), v, row[..n].to_vec()])
}

impl<M: DiscretizationMap> DiscretizationMap for CotangentLift<M> {
    fn dim(&self) -> usize {
        2 * self.base.dim()
    }

    fn name(&self) -> String {
        format!("cotangent-lift({})", self.base.name())
    }

    fn eval<T: Real>(&self, x: &[T], w: &[T]) -> (Vec<T>, Vec<T>) {
        let n = self.base.dim();
        let (q, p) = (&x[..n], &x[n..]);
        let (qdot, pdot) = (&w[..n], &w[n..]);
        let (r1, r2) = self.base.eval(q, qdot);
        let j = map_jacobian(&self.base, q, qdot);
        let y = match j.solve_left(&concat(pdot, p)) {
            Ok(y) => y,
            Err(_) => vec![T::cst(f64::NAN); 2 * n],
        };
        let m0: Vec<T> = y[..n].iter().map(|&a| -a).collect();
        (concat(&r1, &m0), concat(&r2, &y[n..]))
    }

    fn inverse<T: Real>(&self, z0: &[T], z1: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        let n = self.base.dim();
        check_len(2 * n, z0.len())?;
        check_len(2 * n, z1.len())?;
        let [q, p, qdot, pdot] = cotangent_inverse(&self.base, &z0[..n], &z0[n..], &z1[..n], &z1[n..])?;
        Ok((concat(&q, &p), concat(&qdot, &pdot)))
    }

    fn has_closed_form_inverse(&self) -> bool {
        self.base.has_closed_form_inverse()
    }

    fn in_domain(&self, x: &[f64], w: &[f64]) -> bool {
        let n = self.base.dim();
        self.base.in_domain(&x[..n], &w[..n])
    }
}

/// Defect of the pullback identity `Ω₁₂(DRδ₁, DRδ₂) = (dq∧dṗ + dq̇∧dp)(δ₁, δ₂)`
/// for the cotangent lift at `z = (q, p, q̇, ṗ)`.
pub fn cotangent_lift_symplectic_defect<M: DiscretizationMap>(
    lift: &CotangentLift<M>,
    z: &PhaseTangent,
    d1: &[f64],
    d2: &[f64],
) -> Result<f64> {
    let n = lift.base.dim();
    check_len(4 * n, d1.len())?;
    check_len(4 * n, d2.len())?;
    let x = concat(&z.q, &z.p);
    let w = concat(&z.qdot, &z.pdot);
    let j: Mat<f64> = map_jacobian(lift, &x, &w);
    let a = j.mul_vec(d1);
    let b = j.mul_vec(d2);
    // image layout: (Q0, P0, Q1, P1)
    let omega = |u: &[f64], v: &[f64], qs: usize, ps: usize| {
        (0..n).map(|i| u[qs + i] * v[ps + i] - u[ps + i] * v[qs + i]).sum::<f64>()
    };
    let lhs = omega(&a, &b, 2 * n, 3 * n) - omega(&a, &b, 0, n);
    // input layout: (q, p, q̇, ṗ)
    let rhs = omega(d1, d2, 0, 3 * n) + omega(d1, d2, 2 * n, n);
    Ok((lhs - rhs).abs())
}
