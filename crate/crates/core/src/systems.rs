//! Mechanical systems: Hamiltonians, Lagrangians, SODEs and first-order fields.

use crate::autodiff::{gradient_generic, jacobian_generic, lift, Dual, Real};
use crate::error::{Error, Result};
use crate::linalg::{concat, dot, Mat};
use crate::newton::{solve_implicit, NewtonConfig, ParamResidual};

pub trait Hamiltonian: Send + Sync {
    fn dim(&self) -> usize;
    fn h<T: Real>(&self, q: &[T], p: &[T]) -> T;
}

pub trait Lagrangian: Send + Sync {
    fn dim(&self) -> usize;
    fn l<T: Real>(&self, q: &[T], v: &[T]) -> T;

    /// Fiber derivative `FL(q, v) = ∂L/∂v`.
    fn legendre<T: Real>(&self, q: &[T], v: &[T]) -> Vec<T> {
        let qd: Vec<Dual<T>> = q.iter().map(|&x| Dual::constant(x)).collect();
        gradient_generic(|w: &[Dual<T>]| self.l(&qd, w), v)
    }

    /// `FL⁻¹(q, p)`. The default solves `FL(q, v) = p` by Newton from `v = p`.
    fn legendre_inv<T: Real>(&self, q: &[T], p: &[T]) -> Result<Vec<T>> {
        let n = self.dim();
        let guess: Vec<f64> = p.iter().map(|x| x.value()).collect();
        let params = concat(q, p);
        let (v, _) = solve_implicit(&LegendreResidual { l: self, n }, &params, &guess, &NewtonConfig::default())?;
        Ok(v)
    }
}

struct LegendreResidual<'a, L: ?Sized> {
    l: &'a L,
    n: usize,
}

impl<L: Lagrangian + ?Sized> ParamResidual for LegendreResidual<'_, L> {
    fn eval<T: Real>(&self, v: &[T], params: &[T]) -> Vec<T> {
        let fl = self.l.legendre(&params[..self.n], v);
        fl.iter().zip(&params[self.n..]).map(|(&a, &b)| a - b).collect()
    }
}

impl<H: Hamiltonian + ?Sized> Hamiltonian for &H {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn h<T: Real>(&self, q: &[T], p: &[T]) -> T {
        (**self).h(q, p)
    }
}

impl<L: Lagrangian + ?Sized> Lagrangian for &L {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn l<T: Real>(&self, q: &[T], v: &[T]) -> T {
        (**self).l(q, v)
    }
    fn legendre<T: Real>(&self, q: &[T], v: &[T]) -> Vec<T> {
        (**self).legendre(q, v)
    }
    fn legendre_inv<T: Real>(&self, q: &[T], p: &[T]) -> Result<Vec<T>> {
        (**self).legendre_inv(q, p)
    }
}

/// First-order field `ẋ = X(x)`.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;
    fn field<T: Real>(&self, x: &[T]) -> Vec<T>;
}

/// Second-order field `q̈ = Γ(q, q̇)`.
pub trait Sode: Send + Sync {
    fn dim(&self) -> usize;
    fn gamma<T: Real>(&self, q: &[T], v: &[T]) -> Vec<T>;
}

/// `(∂H/∂q, ∂H/∂p)`
pub fn hamiltonian_gradient<T: Real, H: Hamiltonian + ?Sized>(ham: &H, q: &[T], p: &[T]) -> (Vec<T>, Vec<T>) {
    let n = ham.dim();
    let g = gradient_generic(|z: &[Dual<T>]| ham.h(&z[..n], &z[n..]), &concat(q, p));
    (g[..n].to_vec(), g[n..].to_vec())
}

/// `X_H = (∂H/∂p, -∂H/∂q)`
pub fn hamiltonian_field<T: Real, H: Hamiltonian + ?Sized>(ham: &H, q: &[T], p: &[T]) -> (Vec<T>, Vec<T>) {
    let (hq, hp) = hamiltonian_gradient(ham, q, p);
    (hp, hq.iter().map(|&x| -x).collect())
}

pub fn energy<H: Hamiltonian + ?Sized>(ham: &H, state: &[f64]) -> f64 {
    let n = ham.dim();
    ham.h(&state[..n], &state[n..])
}

/// Checks that `∂²L/∂v²` is invertible at `(q, v)`.
pub fn check_regular<L: Lagrangian + ?Sized>(lag: &L, q: &[f64], v: &[f64]) -> Result<()> {
    let qd: Vec<Dual<f64>> = lift(q);
    let hess = jacobian_generic(|w: &[Dual<f64>]| lag.legendre(&qd, w), v);
    hess.inverse().map(|_| ()).map_err(|_| Error::RejectedInput("lagrangian is not regular".into()))
}

pub trait Potential: Send + Sync {
    fn dim(&self) -> usize;
    fn v<T: Real>(&self, q: &[T]) -> T;
    fn name(&self) -> String;
}

/// `V(q) = k |q|²/2`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spring {
    pub n: usize,
    pub k: f64,
}

impl Potential for Spring {
    fn dim(&self) -> usize {
        self.n
    }
    fn v<T: Real>(&self, q: &[T]) -> T {
        dot(q, q) * (0.5 * self.k)
    }
    fn name(&self) -> String {
        "spring".into()
    }
}

/// `V(q) = -cos q`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PendulumPotential;

impl Potential for PendulumPotential {
    fn dim(&self) -> usize {
        1
    }
    fn v<T: Real>(&self, q: &[T]) -> T {
        -q[0].cos()
    }
    fn name(&self) -> String {
        "pendulum".into()
    }
}

/// `V(q) = -1/|q|` in the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KeplerPotential;

impl Potential for KeplerPotential {
    fn dim(&self) -> usize {
        2
    }
    fn v<T: Real>(&self, q: &[T]) -> T {
        -dot(q, q).sqrt().recip()
    }
    fn name(&self) -> String {
        "kepler-2d".into()
    }
}

/// `V(q) = q²/2 + q³/3`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicPotential;

impl Potential for CubicPotential {
    fn dim(&self) -> usize {
        1
    }
    fn v<T: Real>(&self, q: &[T]) -> T {
        q[0] * q[0] * 0.5 + q[0].powi(3) / 3.0
    }
    fn name(&self) -> String {
        "cubic".into()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroPotential {
    pub n: usize,
}

impl Potential for ZeroPotential {
    fn dim(&self) -> usize {
        self.n
    }
    fn v<T: Real>(&self, _q: &[T]) -> T {
        T::zero()
    }
    fn name(&self) -> String {
        "free".into()
    }
}

/// `H = p·M⁻¹p/2 + V(q)` and `L = v·Mv/2 - V(q)` with diagonal `M`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mechanical<V> {
    pub mass: Vec<f64>,
    pub potential: V,
}

impl<V: Potential> Mechanical<V> {
    pub fn unit(potential: V) -> Self {
        Mechanical { mass: vec![1.0; potential.dim()], potential }
    }

    pub fn force<T: Real>(&self, q: &[T]) -> Vec<T> {
        gradient_generic(|z: &[Dual<T>]| self.potential.v(z), q).iter().map(|&g| -g).collect()
    }
}

pub fn harmonic() -> Mechanical<Spring> {
    Mechanical::unit(Spring { n: 1, k: 1.0 })
}

pub fn pendulum() -> Mechanical<PendulumPotential> {
    Mechanical::unit(PendulumPotential)
}

pub fn kepler() -> Mechanical<KeplerPotential> {
    Mechanical::unit(KeplerPotential)
}

pub fn cubic_oscillator() -> Mechanical<CubicPotential> {
    Mechanical::unit(CubicPotential)
}

impl<V: Potential> Hamiltonian for Mechanical<V> {
    fn dim(&self) -> usize {
        self.mass.len()
    }
    fn h<T: Real>(&self, q: &[T], p: &[T]) -> T {
        let mut k = T::zero();
        for (pi, m) in p.iter().zip(&self.mass) {
            k += *pi * *pi / (2.0 * m);
        }
        k + self.potential.v(q)
    }
}

impl<V: Potential> Lagrangian for Mechanical<V> {
    fn dim(&self) -> usize {
        self.mass.len()
    }
    fn l<T: Real>(&self, q: &[T], v: &[T]) -> T {
        let mut k = T::zero();
        for (vi, m) in v.iter().zip(&self.mass) {
            k += *vi * *vi * (0.5 * m);
        }
        k - self.potential.v(q)
    }
    fn legendre<T: Real>(&self, _q: &[T], v: &[T]) -> Vec<T> {
        v.iter().zip(&self.mass).map(|(&x, &m)| x * m).collect()
    }
    fn legendre_inv<T: Real>(&self, _q: &[T], p: &[T]) -> Result<Vec<T>> {
        Ok(p.iter().zip(&self.mass).map(|(&x, &m)| x / m).collect())
    }
}

impl<V: Potential> Sode for Mechanical<V> {
    fn dim(&self) -> usize {
        self.mass.len()
    }
    fn gamma<T: Real>(&self, q: &[T], _v: &[T]) -> Vec<T> {
        self.force(q).iter().zip(&self.mass).map(|(&f, &m)| f / m).collect()
    }
}

/// Hamiltonian vector field on `(q, p)` stacked into one state.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianVectorField<H> {
    pub ham: H,
}

impl<H: Hamiltonian> VectorField for HamiltonianVectorField<H> {
    fn dim(&self) -> usize {
        2 * self.ham.dim()
    }
    fn field<T: Real>(&self, x: &[T]) -> Vec<T> {
        let n = self.ham.dim();
        let (a, b) = hamiltonian_field(&self.ham, &x[..n], &x[n..]);
        concat(&a, &b)
    }
}

/// `H(q, p) = p·v - L(q, v)` with `v = FL⁻¹(q, p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LegendreHamiltonian<L> {
    pub lag: L,
}

impl<L: Lagrangian> Hamiltonian for LegendreHamiltonian<L> {
    fn dim(&self) -> usize {
        self.lag.dim()
    }
    fn h<T: Real>(&self, q: &[T], p: &[T]) -> T {
        match self.lag.legendre_inv(q, p) {
            Ok(v) => dot(p, &v) - self.lag.l(q, &v),
            Err(_) => T::cst(f64::NAN),
        }
    }
}

/// Linear field `ẋ = A x`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearField {
    pub a: Mat<f64>,
}

impl VectorField for LinearField {
    fn dim(&self) -> usize {
        self.a.rows()
    }
    fn field<T: Real>(&self, x: &[T]) -> Vec<T> {
        let a: Mat<T> = Mat::from_rows(&self.a.to_rows().iter().map(|r| lift::<T>(r)).collect::<Vec<_>>());
        a.mul_vec(x)
    }
}
