//! `SO(3)` through the Cayley chart, and a free rigid body integrated in it.

use crate::autodiff::Real;
use crate::error::{Error, Result};
use crate::integrators::hamiltonian_step;
use crate::linalg::{dot, Mat};
use crate::map::DiscretizationMap;
use crate::newton::NewtonConfig;
use crate::systems::Hamiltonian;

pub fn hat<T: Real>(a: &[T]) -> Mat<T> {
    let z = T::zero();
    Mat::from_rows(&[vec![z, -a[2], a[1]], vec![a[2], z, -a[0]], vec![-a[1], a[0], z]])
}

pub fn vee<T: Real>(m: &Mat<T>) -> Vec<T> {
    vec![m[(2, 1)], m[(0, 2)], m[(1, 0)]]
}

fn half_hat<T: Real>(a: &[T], sign: f64) -> Mat<T> {
    Mat::identity(3).add(&hat(a).scale(T::cst(0.5 * sign)))
}

/// `(I - â/2)⁻¹(I + â/2)`
pub fn cay<T: Real>(a: &[T]) -> Result<Mat<T>> {
    let minus = half_hat(a, -1.0).inverse()?;
    Ok(minus.matmul(&half_hat(a, 1.0)))
}

/// `vee(2(R - I)(R + I)⁻¹)`; defined away from rotations by π.
pub fn cay_inv<T: Real>(r: &Mat<T>) -> Result<Vec<T>> {
    let id = Mat::identity(3);
    let plus = r.add(&id).inverse()?;
    let m = r.sub(&id).matmul(&plus).scale(T::cst(2.0));
    Ok(vee(&m))
}

/// Body angular velocity `ξ` of the curve `cay(a + t v)` at `t = 0`:
/// `ξ̂ = (I + â/2)⁻¹ v̂ (I - â/2)⁻¹`.
pub fn body_velocity<T: Real>(a: &[T], v: &[T]) -> Result<Vec<T>> {
    let left = half_hat(a, 1.0).inverse()?;
    let right = half_hat(a, -1.0).inverse()?;
    Ok(vee(&left.matmul(&hat(v)).matmul(&right)))
}

/// `B(a)` with `ξ = B(a) v`.
pub fn body_jacobian<T: Real>(a: &[T]) -> Result<Mat<T>> {
    let mut b = Mat::zeros(3, 3);
    for j in 0..3 {
        let mut e = vec![T::zero(); 3];
        e[j] = T::one();
        let col = body_velocity(a, &e)?;
        for i in 0..3 {
            b[(i, j)] = col[i];
        }
    }
    Ok(b)
}

fn scaled<T: Real>(a: &[T], s: f64) -> Vec<T> {
    a.iter().map(|&x| x * s).collect()
}

/// In the Cayley chart: `R^{1,2}(a, v) = cay⁻¹(cay(a)·cay(∓ξ/2))`, `ξ = B(a)v`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CayleyChartMap;

impl CayleyChartMap {
    fn try_eval<T: Real>(a: &[T], v: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        let xi = body_velocity(a, v)?;
        let g = cay(a)?;
        let r1 = cay_inv(&g.matmul(&cay(&scaled(&xi, -0.5))?))?;
        let r2 = cay_inv(&g.matmul(&cay(&scaled(&xi, 0.5))?))?;
        Ok((r1, r2))
    }
}

impl DiscretizationMap for CayleyChartMap {
    fn dim(&self) -> usize {
        3
    }

    fn name(&self) -> String {
        "cayley".into()
    }

    fn eval<T: Real>(&self, a: &[T], v: &[T]) -> (Vec<T>, Vec<T>) {
        Self::try_eval(a, v).unwrap_or_else(|_| {
            let nan = vec![T::cst(f64::NAN); 3];
            (nan.clone(), nan)
        })
    }

    fn inverse<T: Real>(&self, a0: &[T], a1: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        let (g0, g1) = (cay(a0)?, cay(a1)?);
        // g0ᵀg1 = cay(c)² with c = ξ/2; halve the rotation inside the chart.
        let w = cay_inv(&g0.transpose().matmul(&g1))?;
        let denom = T::one() + (T::one() + dot(&w, &w) * 0.25).sqrt();
        let c: Vec<T> = w.iter().map(|&x| x / denom).collect();
        let xi = scaled(&c, 2.0);
        let a = cay_inv(&g1.matmul(&cay(&scaled(&c, -1.0))?))?;
        let v = body_jacobian(&a)?.solve(&xi)?;
        Ok((a, v))
    }

    fn has_closed_form_inverse(&self) -> bool {
        true
    }
}

/// Free rigid body in chart coordinates: `H = ½ Πᵀ I⁻¹ Π` with `Π = B(a)⁻ᵀ p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidBody {
    pub inertia: [f64; 3],
}

impl RigidBody {
    pub fn new(inertia: [f64; 3]) -> Result<Self> {
        if inertia.iter().any(|&i| !(i > 0.0 && i.is_finite())) {
            return Err(Error::RejectedInput(format!("inertia must be positive, got {inertia:?}")));
        }
        Ok(RigidBody { inertia })
    }

    pub fn kinetic_energy(&self, pi: &[f64]) -> f64 {
        (0..3).map(|i| pi[i] * pi[i] / (2.0 * self.inertia[i])).sum()
    }
}

/// `Π = B(a)⁻ᵀ p`
pub fn body_momentum<T: Real>(a: &[T], p: &[T]) -> Result<Vec<T>> {
    body_jacobian(a)?.solve_left(p)
}

impl Hamiltonian for RigidBody {
    fn dim(&self) -> usize {
        3
    }

    fn h<T: Real>(&self, a: &[T], p: &[T]) -> T {
        match body_momentum(a, p) {
            Ok(pi) => (0..3).fold(T::zero(), |s, i| s + pi[i] * pi[i] / (2.0 * self.inertia[i])),
            Err(_) => T::cst(f64::NAN),
        }
    }
}

/// A point of `SO(3)` as `anchor·cay(a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct So3Chart {
    pub a: Vec<f64>,
    pub anchor: Mat<f64>,
}

impl So3Chart {
    pub fn new(a: Vec<f64>, anchor: Mat<f64>) -> Result<Self> {
        if a.len() != 3 || anchor.rows() != 3 || anchor.cols() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, got: a.len() });
        }
        let defect = anchor.transpose().matmul(&anchor).max_abs_diff(&Mat::identity(3));
        if defect > 1e-10 {
            return Err(Error::RejectedInput(format!("anchor is not orthogonal (defect {defect:.2e})")));
        }
        Ok(So3Chart { a, anchor })
    }

    pub fn rotation(&self) -> Result<Mat<f64>> {
        Ok(self.anchor.matmul(&cay(&self.a)?))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RigidBodyState {
    pub chart: So3Chart,
    pub p: Vec<f64>,
}

impl RigidBodyState {
    /// Identity attitude with body momentum `pi`.
    pub fn at_identity(pi: [f64; 3]) -> Self {
        RigidBodyState { chart: So3Chart { a: vec![0.0; 3], anchor: Mat::identity(3) }, p: pi.to_vec() }
    }

    pub fn body_momentum(&self) -> Result<Vec<f64>> {
        body_momentum(&self.chart.a, &self.p)
    }
}

/// Chart coordinates are re-centred once `‖a‖` exceeds this.
pub const REANCHOR_RADIUS: f64 = 0.5;

/// One symplectic step with the cotangent-lifted Cayley map, followed by re-anchoring if needed.
/// Re-anchoring keeps the rotation and body momentum unchanged.
pub fn rigid_body_step(
    body: &RigidBody,
    state: &RigidBodyState,
    h: f64,
    cfg: &NewtonConfig,
) -> Result<(RigidBodyState, usize)> {
    let out = hamiltonian_step(&CayleyChartMap, body, &state.chart.a, &state.p, h, cfg)?;
    let (a, p) = (out.state[..3].to_vec(), out.state[3..].to_vec());
    let next = if dot(&a, &a).sqrt() > REANCHOR_RADIUS {
        let pi = body_momentum(&a, &p)?;
        let anchor = state.chart.anchor.matmul(&cay(&a)?);
        RigidBodyState { chart: So3Chart { a: vec![0.0; 3], anchor }, p: pi }
    } else {
        RigidBodyState { chart: So3Chart { a, anchor: state.chart.anchor.clone() }, p }
    };
    Ok((next, out.newton_iters))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn cay_is_rotation_and_inverts() {
        let a = [0.3, -0.7, 0.2];
        let r = cay(&a).unwrap();
        assert!(r.transpose().matmul(&r).max_abs_diff(&Mat::identity(3)) < 1e-15);
        assert!(max_abs_diff(&cay_inv(&r).unwrap(), &a) < 1e-15);
    }

    #[test]
    fn body_velocity_at_origin_is_identity() {
        assert!(body_jacobian(&[0.0; 3]).unwrap().max_abs_diff(&Mat::identity(3)) < 1e-15);
    }

    #[test]
    fn group_form_at_identity() {
        let x = [0.2, 0.1, -0.3];
        let (r1, r2) = CayleyChartMap.eval(&[0.0; 3], &x);
        let xh = hat(&x).scale(0.25);
        let id = Mat::identity(3);
        let g1 = id.add(&xh).inverse().unwrap().matmul(&id.sub(&xh));
        let g2 = id.sub(&xh).inverse().unwrap().matmul(&id.add(&xh));
        assert!(cay(&r1).unwrap().max_abs_diff(&g1) < 1e-15);
        assert!(cay(&r2).unwrap().max_abs_diff(&g2) < 1e-15);
    }

    #[test]
    fn closed_inverse_roundtrip() {
        let (a, v) = ([0.1, 0.3, -0.2], [0.4, -0.1, 0.25]);
        let (a0, a1) = CayleyChartMap.eval(&a, &v);
        let (b, w) = CayleyChartMap.inverse(&a0, &a1).unwrap();
        assert!(max_abs_diff(&b, &a) < 1e-14);
        assert!(max_abs_diff(&w, &v) < 1e-14);
    }
}
