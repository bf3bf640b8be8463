//! Named maps and systems.

use dmap::autodiff::Real;
use dmap::lifts::{cotangent_lift, tangent_lift, TangentLift};
use dmap::linalg::Mat;
use dmap::manifolds::sphere::{sphere_projection_map, sphere_projection_one_sided, tangent_basis, SphereRetraction};
use dmap::manifolds::{CayleyChartMap, SphereExpMap, SphericalChartMap};
use dmap::map::{
    adjoint, from_retraction, random_points, validate, validate_constrained, Adjoint, DiscretizationMap,
    EuclideanRetraction, FromRetraction, QuadraticMap, ThetaMap, ValidityReport,
};
use dmap::integrators::NewmarkMap;
use dmap::Result as CoreResult;

use crate::config::MapSpec;
use crate::error::{config_err, Result};

/// Maps that are not built from other maps.
#[derive(Clone, Debug)]
pub enum BaseMap {
    Theta(ThetaMap),
    Quadratic(QuadraticMap),
    Euclidean(FromRetraction<EuclideanRetraction>),
    Sphere(FromRetraction<SphereRetraction>),
    SphereExp(SphereExpMap),
    SphereChart(SphericalChartMap),
    Cayley(CayleyChartMap),
    Newmark(NewmarkMap),
}

/// Every map the harness can build. Wrappers nest one level only, which keeps
/// the nested-dual instantiations finite.
#[derive(Clone, Debug)]
pub enum AnyMap {
    Base(BaseMap),
    Adjoint(Adjoint<BaseMap>),
    Tangent(TangentLift<BaseMap>),
}

macro_rules! forward {
    ($ty:ty, $($variant:path),+) => {
        impl DiscretizationMap for $ty {
            fn dim(&self) -> usize {
                match self { $($variant(m) => m.dim()),+ }
            }
            fn name(&self) -> String {
                match self { $($variant(m) => m.name()),+ }
            }
            fn eval<T: Real>(&self, q: &[T], v: &[T]) -> (Vec<T>, Vec<T>) {
                match self { $($variant(m) => m.eval(q, v)),+ }
            }
            fn inverse<T: Real>(&self, x0: &[T], x1: &[T]) -> CoreResult<(Vec<T>, Vec<T>)> {
                match self { $($variant(m) => m.inverse(x0, x1)),+ }
            }
            fn has_closed_form_inverse(&self) -> bool {
                match self { $($variant(m) => m.has_closed_form_inverse()),+ }
            }
            fn analytic_jacobian(&self, q: &[f64], v: &[f64]) -> Option<Mat<f64>> {
                match self { $($variant(m) => m.analytic_jacobian(q, v)),+ }
            }
            fn in_domain(&self, q: &[f64], v: &[f64]) -> bool {
                match self { $($variant(m) => m.in_domain(q, v)),+ }
            }
        }
    };
}

forward!(
    BaseMap,
    BaseMap::Theta,
    BaseMap::Quadratic,
    BaseMap::Euclidean,
    BaseMap::Sphere,
    BaseMap::SphereExp,
    BaseMap::SphereChart,
    BaseMap::Cayley,
    BaseMap::Newmark
);
forward!(AnyMap, AnyMap::Base, AnyMap::Adjoint, AnyMap::Tangent);

/// Geometry a map lives on, which decides how it is validated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    /// `ℝⁿ` for any `n`.
    Flat,
    /// Unit sphere in `ℝ³`, ambient coordinates.
    Sphere,
    /// A fixed-dimension chart.
    Chart(usize),
    /// `T ℝⁿ`, dimension `2n`.
    TangentBundle,
}

pub struct MapInfo {
    pub name: &'static str,
    pub space: Space,
    pub params: &'static str,
    pub about: &'static str,
}

pub const MAPS: &[MapInfo] = &[
    MapInfo { name: "midpoint", space: Space::Flat, params: "", about: "θ-map with θ = 1/2" },
    MapInfo { name: "explicit-euler", space: Space::Flat, params: "", about: "θ-map with θ = 0: (q, q + v)" },
    MapInfo { name: "symplectic-euler", space: Space::Flat, params: "", about: "θ-map with θ = 1: (q - v, q)" },
    MapInfo { name: "theta", space: Space::Flat, params: "theta", about: "(q - θv, q + (1-θ)v)" },
    MapInfo { name: "quadratic", space: Space::Flat, params: "c", about: "symmetric map with a quadratic term c·v∘v" },
    MapInfo { name: "euclidean-retraction", space: Space::Flat, params: "theta", about: "x + v built from a retraction" },
    MapInfo { name: "adjoint-midpoint", space: Space::Flat, params: "", about: "adjoint of the midpoint map" },
    MapInfo { name: "adjoint-theta", space: Space::Flat, params: "theta", about: "adjoint of a θ-map" },
    MapInfo { name: "sphere-projection", space: Space::Sphere, params: "theta", about: "projection retraction on S², one-sided by default" },
    MapInfo { name: "sphere-exp", space: Space::Sphere, params: "", about: "geodesic map (exp(-v/2), exp(v/2)) on S²" },
    MapInfo { name: "sphere-chart", space: Space::Chart(2), params: "", about: "two-sided projection map in spherical coordinates" },
    MapInfo { name: "cayley", space: Space::Chart(3), params: "", about: "Cayley map on SO(3) in a Lie-algebra chart" },
    MapInfo { name: "newmark", space: Space::TangentBundle, params: "gamma, beta", about: "Newmark map on TQ (uses h = 0.1 when validated)" },
    MapInfo { name: "tangent-midpoint", space: Space::TangentBundle, params: "", about: "tangent lift of the midpoint map" },
    MapInfo { name: "cotangent-midpoint", space: Space::TangentBundle, params: "", about: "cotangent lift of the midpoint map" },
];

fn need(v: Option<f64>, key: &str, map: &str) -> Result<f64> {
    match v {
        Some(x) => Ok(x),
        None => config_err(format!("map `{map}` needs `{key}`")),
    }
}

fn theta_map(n: usize, theta: f64) -> Result<ThetaMap> {
    ThetaMap::new(n, theta).or_else(|e| config_err(e.to_string()))
}

/// Builds a map on configuration space of dimension `n`. `h` is only read by Newmark.
pub fn build_map(spec: &MapSpec, n: usize, h: f64) -> Result<AnyMap> {
    let name = spec.name.as_str();
    Ok(match name {
        "midpoint" => base(BaseMap::Theta(ThetaMap::midpoint(n))),
        "explicit-euler" => base(BaseMap::Theta(ThetaMap::explicit_euler(n))),
        "symplectic-euler" => base(BaseMap::Theta(ThetaMap::symplectic_euler(n))),
        "theta" => base(BaseMap::Theta(theta_map(n, need(spec.theta, "theta", name)?)?)),
        "quadratic" => base(BaseMap::Quadratic(QuadraticMap { n, c: spec.c.unwrap_or(0.1) })),
        "euclidean-retraction" => {
            let r = from_retraction(EuclideanRetraction { n }, spec.theta.unwrap_or(0.5));
            base(BaseMap::Euclidean(r.or_else(|e| config_err(e.to_string()))?))
        }
        "adjoint-midpoint" => AnyMap::Adjoint(adjoint(BaseMap::Theta(ThetaMap::midpoint(n)))),
        "adjoint-theta" => {
            let inner = BaseMap::Theta(theta_map(n, need(spec.theta, "theta", name)?)?);
            AnyMap::Adjoint(adjoint(inner))
        }
        "sphere-projection" => {
            check_dim(name, 3, n)?;
            match spec.theta {
                None => base(BaseMap::Sphere(sphere_projection_one_sided())),
                Some(0.5) => base(BaseMap::Sphere(sphere_projection_map())),
                Some(t) => base(BaseMap::Sphere(from_retraction(SphereRetraction, t).or_else(|e| config_err(e.to_string()))?)),
            }
        }
        "sphere-exp" => {
            check_dim(name, 3, n)?;
            base(BaseMap::SphereExp(SphereExpMap))
        }
        "sphere-chart" => {
            check_dim(name, 2, n)?;
            base(BaseMap::SphereChart(SphericalChartMap))
        }
        "cayley" => {
            check_dim(name, 3, n)?;
            base(BaseMap::Cayley(CayleyChartMap))
        }
        "newmark" => {
            let (gamma, beta) = (need(spec.gamma, "gamma", name)?, need(spec.beta, "beta", name)?);
            base(BaseMap::Newmark(NewmarkMap::new(n, gamma, beta, h)))
        }
        _ => {
            let known: Vec<&str> = MAPS.iter().map(|m| m.name).collect();
            return config_err(format!("unknown map `{name}` (known: {})", known.join(", ")));
        }
    })
}

fn base(m: BaseMap) -> AnyMap {
    AnyMap::Base(m)
}

fn check_dim(name: &str, want: usize, got: usize) -> Result<()> {
    if want == got {
        Ok(())
    } else {
        config_err(format!("map `{name}` works in dimension {want}, the system has {got}"))
    }
}

/// A map on `TQ` from a base-map spec: Newmark natively, anything else through the tangent lift.
pub fn build_tq_map(spec: &MapSpec, n: usize, h: f64) -> Result<AnyMap> {
    Ok(match build_map(spec, n, h)? {
        m @ AnyMap::Base(BaseMap::Newmark(_)) => m,
        AnyMap::Base(b) => AnyMap::Tangent(tangent_lift(b)),
        _ => return config_err(format!("map `{}` cannot be lifted to TQ", spec.name)),
    })
}

/// Number of random points `validate-map` samples.
pub const VALIDATION_POINTS: usize = 100;

/// Checks the two defining identities of a discretization map at random points.
pub fn validate_named(name: &str) -> Result<Vec<(String, ValidityReport)>> {
    let Some(info) = MAPS.iter().find(|m| m.name == name) else {
        return config_err(format!("unknown map `{name}`"));
    };
    let spec = MapSpec { name: name.to_string(), theta: Some(0.3), gamma: Some(0.6), beta: Some(0.3), c: Some(0.1) };
    let mut out = Vec::new();
    match info.space {
        Space::Flat => {
            for n in [1, 2, 3] {
                let map = build_map(&MapSpec { theta: default_theta(name), ..spec.clone() }, n, 0.1)?;
                out.push((format!("n={n}"), validate(&map, &random_points(n, VALIDATION_POINTS, 1.0, n as u64))));
            }
        }
        Space::Sphere => {
            let pts: Vec<Vec<f64>> = random_points(3, VALIDATION_POINTS, 1.0, 7)
                .into_iter()
                .map(|x| {
                    let r = dmap::linalg::norm(&x).max(1e-3);
                    x.iter().map(|a| a / r).collect()
                })
                .collect();
            let thetas: &[Option<f64>] = if name == "sphere-projection" { &[None, Some(0.5)] } else { &[None] };
            for &t in thetas {
                let map = build_map(&MapSpec { theta: t, ..spec.clone() }, 3, 0.1)?;
                out.push((map.name(), validate_constrained(&map, &pts, tangent_basis)));
            }
        }
        Space::Chart(n) => {
            let pts: Vec<Vec<f64>> = random_points(n, VALIDATION_POINTS, 0.4, 11)
                .into_iter()
                .map(|mut x| {
                    if name == "sphere-chart" {
                        x[0] += std::f64::consts::FRAC_PI_2;
                    }
                    x
                })
                .collect();
            let map = build_map(&spec, n, 0.1)?;
            out.push((format!("n={n}"), validate(&map, &pts)));
        }
        Space::TangentBundle => {
            for n in [1, 2] {
                let pts = random_points(2 * n, VALIDATION_POINTS, 1.0, 20 + n as u64);
                let report = match name {
                    "newmark" => validate(&build_tq_map(&spec, n, 0.1)?, &pts),
                    "tangent-midpoint" => validate(&tangent_lift(ThetaMap::midpoint(n)), &pts),
                    _ => validate(&cotangent_lift(ThetaMap::midpoint(n)), &pts),
                };
                out.push((format!("n={n}"), report));
            }
        }
    }
    Ok(out)
}

fn default_theta(name: &str) -> Option<f64> {
    match name {
        "theta" | "adjoint-theta" => Some(0.3),
        "euclidean-retraction" => Some(0.5),
        _ => None,
    }
}

pub struct SystemInfo {
    pub name: &'static str,
    pub state: &'static str,
    pub params: &'static str,
    pub reference: &'static str,
}

pub const SYSTEMS: &[SystemInfo] = &[
    SystemInfo { name: "harmonic", state: "(q, p) in R^n, n = len(q0)", params: "k", reference: "exact" },
    SystemInfo { name: "pendulum", state: "(q, p) in R^2", params: "", reference: "triple-jump at h/64" },
    SystemInfo { name: "cubic", state: "(q, p) in R^2", params: "", reference: "triple-jump at h/64" },
    SystemInfo { name: "kepler-2d", state: "(q, p) in R^4", params: "eccentricity", reference: "triple-jump at h/64" },
    SystemInfo { name: "sphere-free", state: "(x, p) on T*S^2 in R^6", params: "", reference: "exact geodesic" },
    SystemInfo { name: "rigid-body", state: "(R, Π) with R row-major, 12 numbers", params: "inertia", reference: "triple-jump at h/64" },
];
