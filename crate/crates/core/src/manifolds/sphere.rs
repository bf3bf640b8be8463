//! Maps on `S²` in ambient coordinates, the explicit symplectic step on `T*S²`,
//! and a spherical-coordinate chart for cross-checks.

use crate::autodiff::{lift, Real, VectorFn};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::map::{from_retraction, DiscretizationMap, FromRetraction, Retraction};
use crate::newton::{newton_solve, NewtonConfig};
use crate::systems::{hamiltonian_gradient, Hamiltonian};

/// `R(x, v) = (x + v)/‖x + v‖`
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SphereRetraction;

fn normalize<T: Real>(x: &[T]) -> Vec<T> {
    let n = norm(x);
    x.iter().map(|&a| a / n).collect()
}

impl Retraction for SphereRetraction {
    fn dim(&self) -> usize {
        3
    }

    fn name(&self) -> String {
        "sphere-projection".into()
    }

    fn retract<T: Real>(&self, x: &[T], v: &[T]) -> Vec<T> {
        let w: Vec<T> = x.iter().zip(v).map(|(&a, &b)| a + b).collect();
        normalize(&w)
    }

    fn pair_inverse<T: Real>(&self, theta: f64, x0: &[T], x1: &[T]) -> Option<Result<(Vec<T>, Vec<T>)>> {
        if theta == 0.0 {
            let s = dot(x0, x1);
            if s.value() <= 0.0 {
                return Some(Err(Error::Chart(format!("x0·x1 = {} is not positive", s.value()))));
            }
            let v = x1.iter().zip(x0).map(|(&b, &a)| b / s - a).collect();
            Some(Ok((x0.to_vec(), v)))
        } else if theta == 0.5 {
            let sum: Vec<T> = x0.iter().zip(x1).map(|(&a, &b)| a + b).collect();
            let len = norm(&sum);
            if len.value() <= 1e-12 {
                return Some(Err(Error::Chart("antipodal points".into())));
            }
            let lambda = len.recip() * 2.0;
            let x = sum.iter().map(|&a| a * lambda * 0.5).collect();
            let xi = x1.iter().zip(x0).map(|(&b, &a)| (b - a) * lambda).collect();
            Some(Ok((x, xi)))
        } else {
            None
        }
    }

    fn in_domain(&self, x: &[f64], v: &[f64]) -> bool {
        let w: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + b).collect();
        norm(&w) > 1e-6
    }
}

/// `((x - ξ/2)/‖x - ξ/2‖, (x + ξ/2)/‖x + ξ/2‖)`
pub fn sphere_projection_map() -> FromRetraction<SphereRetraction> {
    from_retraction(SphereRetraction, 0.5).expect("theta in range")
}

/// `(x, (x + ξ)/‖x + ξ‖)`
pub fn sphere_projection_one_sided() -> FromRetraction<SphereRetraction> {
    from_retraction(SphereRetraction, 0.0).expect("theta in range")
}

/// `(cos(|ξ|/2)x - sin(|ξ|/2)ξ/|ξ|, cos(|ξ|/2)x + sin(|ξ|/2)ξ/|ξ|)`
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SphereExpMap;

/// `(cos(s/2), sin(s/2)/s)` as functions of `s² = ‖ξ‖²`, smooth through `ξ = 0`.
fn half_angle<T: Real>(w: T) -> (T, T) {
    if w.value() < 1e-12 {
        (T::one() - w / 8.0 + w * w / 384.0, T::cst(0.5) - w / 48.0 + w * w / 3840.0)
    } else {
        let s = w.sqrt();
        let half = s * 0.5;
        (half.cos(), half.sin() / s)
    }
}

impl DiscretizationMap for SphereExpMap {
    fn dim(&self) -> usize {
        3
    }

    fn name(&self) -> String {
        "sphere-exp".into()
    }

    fn eval<T: Real>(&self, x: &[T], xi: &[T]) -> (Vec<T>, Vec<T>) {
        let (c, k) = half_angle(dot(xi, xi));
        let a = x.iter().zip(xi).map(|(&p, &d)| p * c - d * k).collect();
        let b = x.iter().zip(xi).map(|(&p, &d)| p * c + d * k).collect();
        (a, b)
    }

    fn inverse<T: Real>(&self, x0: &[T], x1: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        let sum: Vec<T> = x0.iter().zip(x1).map(|(&a, &b)| a + b).collect();
        let diff: Vec<T> = x1.iter().zip(x0).map(|(&b, &a)| b - a).collect();
        let c = norm(&sum) * 0.5;
        if c.value() <= 1e-12 {
            return Err(Error::Chart("antipodal points".into()));
        }
        let r2 = dot(&diff, &diff) * 0.25;
        let t2 = r2 / (c * c);
        let factor = if t2.value() < 1e-12 {
            (T::one() - t2 / 3.0 + t2 * t2 / 5.0) / c
        } else {
            let r = r2.sqrt();
            (r / c).atan() / r
        };
        Ok((normalize(&sum), diff.iter().map(|&d| d * factor).collect()))
    }

    fn has_closed_form_inverse(&self) -> bool {
        true
    }

    fn in_domain(&self, _x: &[f64], xi: &[f64]) -> bool {
        norm(xi) <= std::f64::consts::PI
    }
}

/// Orthonormal basis of `T_x S²`.
pub fn tangent_basis(x: &[f64]) -> Vec<Vec<f64>> {
    let k = (0..3).min_by(|&i, &j| x[i].abs().total_cmp(&x[j].abs())).unwrap_or(0);
    let mut a = [0.0; 3];
    a[k] = 1.0;
    let ax = dot(&a, x);
    let u: Vec<f64> = (0..3).map(|i| a[i] - ax * x[i]).collect();
    let u = normalize(&u);
    let w = vec![x[1] * u[2] - x[2] * u[1], x[2] * u[0] - x[0] * u[2], x[0] * u[1] - x[1] * u[0]];
    vec![u, w]
}

#[derive(Clone, Debug, PartialEq)]
pub struct SphereCotangent {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

pub const SPHERE_TOL: f64 = 1e-10;

impl SphereCotangent {
    pub fn new(x: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        let s = SphereCotangent { x, p };
        s.check(SPHERE_TOL)?;
        Ok(s)
    }

    /// Normalizes `x` and removes the component of `p` along `x`.
    pub fn project(x: &[f64], p: &[f64]) -> Self {
        let x = normalize(x);
        let xp = dot(&x, p);
        let p = p.iter().zip(&x).map(|(a, b)| a - xp * b).collect();
        SphereCotangent { x, p }
    }

    pub fn norm_defect(&self) -> f64 {
        (norm(&self.x) - 1.0).abs()
    }

    pub fn orthogonality_defect(&self) -> f64 {
        dot(&self.x, &self.p).abs()
    }

    pub fn check(&self, tol: f64) -> Result<()> {
        if self.x.len() != 3 || self.p.len() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, got: self.x.len().max(self.p.len()) });
        }
        if self.norm_defect() > tol || self.orthogonality_defect() > tol {
            return Err(Error::RejectedInput(format!(
                "not in T*S²: |‖x‖-1| = {:.2e}, |x·p| = {:.2e}",
                self.norm_defect(),
                self.orthogonality_defect()
            )));
        }
        Ok(())
    }
}

struct SphereResidual<'a, H> {
    ham: &'a H,
    x0: &'a [f64],
    p0: &'a [f64],
    h: f64,
}

/// `p₁·C` with `c_ij = s[δ_ij + s y_i x_j - y_i y_j]`, `s = x·y`.
pub fn c_matrix_product<T: Real>(x: &[T], y: &[T], p1: &[T]) -> Vec<T> {
    let s = dot(x, y);
    let py = dot(p1, y);
    (0..3).map(|j| s * (p1[j] + s * py * x[j] - py * y[j])).collect()
}

impl<H: Hamiltonian> VectorFn for SphereResidual<'_, H> {
    fn eval<T: Real>(&self, z: &[T]) -> Vec<T> {
        let x0 = lift::<T>(self.x0);
        let (u, p1) = (&z[..3], &z[3..]);
        let w: Vec<T> = x0.iter().zip(u).map(|(&a, &b)| a + b).collect();
        let x1 = normalize(&w);
        let s = dot(&x0, &x1);
        let pc = c_matrix_product(&x0, &x1, p1);
        let (hq, hp) = hamiltonian_gradient(self.ham, &x0, &pc);
        let radial = dot(&x0, &hp);
        let mut r = Vec::with_capacity(6);
        for i in 0..3 {
            r.push(u[i] - (hp[i] - x0[i] * radial) * self.h);
        }
        for i in 0..3 {
            r.push(p1[i] * s - self.p0[i] + hq[i] * self.h);
        }
        r
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SphereStep {
    pub state: SphereCotangent,
    pub newton_iters: usize,
    /// `|x₁·p₁|` before any re-projection.
    pub raw_orthogonality_defect: f64,
}

/// One step of the projection-map symplectic scheme on `T*S²`:
/// `x₁/(x₀·x₁) - x₀ = h H_p(x₀, p₁C)`, `-p₀ + (x₀·x₁)p₁ = -h H_q(x₀, p₁C)`.
///
/// The unknown is `(u, p₁)` with `x₁ = (x₀ + u)/‖x₀ + u‖`. With `u ⊥ x₀` the first
/// equation reads `u = h H_p`; its normal component is removed so the system is square.
pub fn sphere_hamiltonian_step<H: Hamiltonian>(
    ham: &H,
    state: &SphereCotangent,
    h: f64,
    reproject: bool,
    cfg: &NewtonConfig,
) -> Result<SphereStep> {
    if ham.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: ham.dim() });
    }
    let (x0, p0) = (&state.x, &state.p);
    let (_, hp) = hamiltonian_gradient(ham, x0, p0);
    let radial = dot(x0, &hp);
    let mut guess: Vec<f64> = (0..3).map(|i| h * (hp[i] - radial * x0[i])).collect();
    guess.extend_from_slice(p0);
    let out = newton_solve(&SphereResidual { ham, x0, p0, h }, &guess, cfg)?;
    let w: Vec<f64> = x0.iter().zip(&out.x[..3]).map(|(a, b)| a + b).collect();
    let x1 = normalize(&w);
    let s = dot(x0, &x1);
    if s <= 0.0 {
        return Err(Error::Chart(format!("x0·x1 = {s} is not positive")));
    }
    let p1 = out.x[3..].to_vec();
    let raw = dot(&x1, &p1).abs();
    let next = if reproject { SphereCotangent::project(&x1, &p1) } else { SphereCotangent { x: x1, p: p1 } };
    Ok(SphereStep { state: next, newton_iters: out.iterations, raw_orthogonality_defect: raw })
}

/// Free particle `H = ‖p‖²/2` in ambient coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FreeParticle;

impl Hamiltonian for FreeParticle {
    fn dim(&self) -> usize {
        3
    }
    fn h<T: Real>(&self, _q: &[T], p: &[T]) -> T {
        dot(p, p) * 0.5
    }
}

/// `(θ, φ) ↦ (sin θ cos φ, sin θ sin φ, cos θ)`
pub fn spherical_embed<T: Real>(c: &[T]) -> Vec<T> {
    let (st, ct) = (c[0].sin(), c[0].cos());
    vec![st * c[1].cos(), st * c[1].sin(), ct]
}

/// Inverse of [`spherical_embed`]; scale-invariant, so no normalization is needed.
pub fn spherical_chart<T: Real>(y: &[T]) -> Vec<T> {
    let rho = (y[0] * y[0] + y[1] * y[1]).sqrt();
    vec![rho.atan2(y[2]), y[1].atan2(y[0])]
}

/// The two-sided projection map pulled back to spherical coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SphericalChartMap;

impl DiscretizationMap for SphericalChartMap {
    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> String {
        "sphere-chart".into()
    }

    fn eval<T: Real>(&self, c: &[T], w: &[T]) -> (Vec<T>, Vec<T>) {
        let x = spherical_embed(c);
        let (st, ct, sp, cp) = (c[0].sin(), c[0].cos(), c[1].sin(), c[1].cos());
        // Dx·w
        let d = [ct * cp * w[0] - st * sp * w[1], ct * sp * w[0] + st * cp * w[1], -(st * w[0])];
        let a: Vec<T> = (0..3).map(|i| x[i] - d[i] * 0.5).collect();
        let b: Vec<T> = (0..3).map(|i| x[i] + d[i] * 0.5).collect();
        (spherical_chart(&a), spherical_chart(&b))
    }

    fn in_domain(&self, c: &[f64], w: &[f64]) -> bool {
        c[0].sin().abs() > 1e-3 && norm(w) < 1.0
    }
}

/// `H = (p_θ² + p_φ²/sin²θ)/2`
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SphericalFreeParticle;

impl Hamiltonian for SphericalFreeParticle {
    fn dim(&self) -> usize {
        2
    }
    fn h<T: Real>(&self, c: &[T], p: &[T]) -> T {
        let s = c[0].sin();
        (p[0] * p[0] + p[1] * p[1] / (s * s)) * 0.5
    }
}

/// Ambient `(x, p)` from chart `(c, p_c)`: `x = e(c)`, `p = De(c)⁻ᵀ p_c` restricted to `T_x S²`.
pub fn spherical_to_ambient(c: &[f64], pc: &[f64]) -> SphereCotangent {
    let x = spherical_embed(c);
    let (st, ct, sp, cp) = (c[0].sin(), c[0].cos(), c[1].sin(), c[1].cos());
    let e_theta = [ct * cp, ct * sp, -st];
    let e_phi = [-sp, cp, 0.0];
    let p: Vec<f64> = (0..3).map(|i| pc[0] * e_theta[i] + pc[1] / st * e_phi[i]).collect();
    SphereCotangent { x, p }
}
