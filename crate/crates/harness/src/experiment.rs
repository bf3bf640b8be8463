//! One experiment: a system, a method and a list of step sizes, producing one row per step size.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dmap::composition::{
    adjoint_method, check_order_conditions, compose, pointwise_symmetry_condition, stormer_verlet, triple_jump, Stepper,
};
use dmap::integrators::{
    defect_newton, hamiltonian_step, momentum_match, ode_step, sode_step_endpoint, sode_step_midbase, symplectic_defect,
    StepResult, Trajectory, DEFECT_FD_STEP, NewmarkMap,
};
use dmap::linalg::{dot, max_abs_diff, Mat};
use dmap::manifolds::so3::{body_momentum, cay};
use dmap::manifolds::sphere::{sphere_hamiltonian_step, tangent_basis, FreeParticle, SphereCotangent};
use dmap::manifolds::{CayleyChartMap, RigidBody};
use dmap::map::{random_tangent_points, DiscretizationMap, ThetaMap};
use dmap::newton::NewtonConfig;
use dmap::systems::{
    cubic_oscillator, energy, kepler, pendulum, HamiltonianVectorField, Mechanical, Potential, Spring,
};

use crate::config::{Composition, ExperimentConfig, MapSpec, Scheme};
use crate::error::{config_err, HarnessError, Result};
use crate::registry::{build_map, build_tq_map, AnyMap, BaseMap};

pub const CSV_HEADER: &str = "h,global_error,energy_drift_max,symplectic_defect,newton_iters_mean,wall_time";

/// Errors at or below this are treated as round-off and left out of slope fits.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

/// Refinement factor of the reference run when no closed form exists.
pub const REFERENCE_REFINEMENT: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub h: f64,
    pub global_error: f64,
    pub energy_drift_max: f64,
    pub symplectic_defect: f64,
    pub newton_iters_mean: f64,
    pub wall_time: f64,
}

impl ReportRow {
    /// Shortest round-trip formatting, so output is reproducible bit for bit.
    pub fn csv(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{},{}",
            self.h, self.global_error, self.energy_drift_max, self.symplectic_defect, self.newton_iters_mean, self.wall_time
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Reference {
    Exact,
    /// Triple jump of the midpoint method at `h / 64`.
    TripleJump { h: f64 },
}

impl std::fmt::Display for Reference {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Reference::Exact => write!(f, "exact"),
            Reference::TripleJump { h } => write!(f, "triple-jump reference at h/{REFERENCE_REFINEMENT} = {h}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub config: String,
    pub method: String,
    pub declared_order: u32,
    pub reference: Reference,
    pub rows: Vec<ReportRow>,
    /// Set when a step size failed; `rows` then holds the sizes that finished.
    pub failure: Option<HarnessError>,
}

impl Report {
    pub fn csv(&self) -> String {
        let mut s = format!("{CSV_HEADER}\n");
        for r in &self.rows {
            s.push_str(&r.csv());
            s.push('\n');
        }
        s
    }

    pub fn observed_order(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> =
            self.rows.iter().filter(|r| r.global_error > ROUNDOFF_FLOOR).map(|r| (r.h, r.global_error)).collect();
        least_squares_slope(&pts)
    }

    /// `key = value` lines for the sidecar file.
    pub fn meta(&self) -> String {
        let order = self.observed_order().map_or("n/a".to_string(), |o| format!("{o:.4}"));
        let status = if self.failure.is_some() { "partial" } else { "ok" };
        let mut s = format!(
            "config = {}\nmethod = {}\ndeclared_order = {}\nobserved_order = {order}\nreference = {}\nstatus = {status}\n",
            self.config, self.method, self.declared_order, self.reference
        );
        if let Some(e) = &self.failure {
            s.push_str(&format!("error = {e}\n"));
        }
        s
    }
}

/// Slope of the least-squares line through `(log h, log e)`; `None` with fewer than two points.
pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunOptions {
    /// Fill `wall_time`; off by default so reports are reproducible.
    pub timing: bool,
}

type EnergyFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type ExactFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// How the symplectic defect of a step is measured.
#[derive(Clone)]
enum DefectMode {
    /// The state is canonical `(q, p)`.
    Canonical,
    /// Ambient `(x, p)` on `T*S²`: the canonical form restricted to the tangent space.
    Sphere,
    /// `(R, Π)`: measured on the chart step `(a, p)` at `a = 0`.
    RigidBody(Stepper),
}

struct Problem {
    x0: Vec<f64>,
    stepper: Stepper,
    energy: EnergyFn,
    exact: Option<ExactFn>,
    reference: Option<Stepper>,
    defect: DefectMode,
}

fn newton_cfg(tol: f64) -> NewtonConfig {
    NewtonConfig { tol, ..NewtonConfig::default() }
}

fn require_map(cfg: &ExperimentConfig) -> Result<&MapSpec> {
    cfg.map.as_ref().ok_or_else(|| HarnessError::Config(format!("scheme {:?} needs a `map`", cfg.scheme)))
}

fn symmetry_order<M: DiscretizationMap>(map: &M) -> (bool, u32) {
    let samples = random_tangent_points(map.dim(), 8, 0.5, 0);
    let symmetric = pointwise_symmetry_condition(map, &samples) < 1e-10;
    (symmetric, if symmetric { 2 } else { 1 })
}

/// The map's own step size only matters for Newmark.
enum TqMap {
    Fixed(AnyMap),
    Newmark { n: usize, gamma: f64, beta: f64 },
}

impl TqMap {
    fn at(&self, h: f64) -> AnyMap {
        match self {
            TqMap::Fixed(m) => m.clone(),
            TqMap::Newmark { n, gamma, beta } => AnyMap::Base(BaseMap::Newmark(NewmarkMap::new(*n, *gamma, *beta, h))),
        }
    }
}

fn mechanical_stepper<V>(sys: &Mechanical<V>, cfg: &ExperimentConfig, newton: NewtonConfig) -> Result<Stepper>
where
    V: Potential + Clone + 'static,
{
    let n = sys.mass.len();
    let base = match cfg.scheme {
        Scheme::Hamiltonian => Stepper::hamiltonian(build_map(require_map(cfg)?, n, 0.0)?, sys.clone(), newton),
        Scheme::StormerVerlet => {
            if cfg.map.is_some() {
                return config_err("scheme stormer-verlet takes no `map`");
            }
            stormer_verlet(sys.clone(), newton)
        }
        Scheme::Variational => {
            let map = build_map(require_map(cfg)?, n, 0.0)?;
            let (symmetric, order) = symmetry_order(&map);
            let lag = sys.clone();
            Stepper::new(format!("variational({})", map.name()), order, symmetric, true, move |x, h| {
                momentum_match(&map, &lag, &x[..n], &x[n..], h, &newton)
            })
        }
        Scheme::SodeEndpoint | Scheme::SodeMidbase => {
            let spec = require_map(cfg)?;
            let probe = build_tq_map(spec, n, 0.1)?;
            let (symmetric, order) = symmetry_order(&probe);
            let tq = match probe {
                AnyMap::Base(BaseMap::Newmark(m)) => TqMap::Newmark { n, gamma: m.gamma, beta: m.beta },
                other => TqMap::Fixed(other),
            };
            let endpoint = cfg.scheme == Scheme::SodeEndpoint;
            let label = format!("{}({})", if endpoint { "sode-endpoint" } else { "sode-midbase" }, probe_name(&tq));
            let sode = sys.clone();
            Stepper::new(label, order, symmetric, false, move |x, h| {
                let map = tq.at(h);
                if endpoint {
                    sode_step_endpoint(&map, &sode, &x[..n], &x[n..], h, &newton)
                } else {
                    sode_step_midbase(&map, &sode, &x[..n], &x[n..], h, &newton)
                }
            })
        }
        Scheme::Ode => {
            let map = build_map(require_map(cfg)?, 2 * n, 0.0)?;
            let (symmetric, order) = symmetry_order(&map);
            let field = HamiltonianVectorField { ham: sys.clone() };
            Stepper::new(format!("ode({})", map.name()), order, symmetric, false, move |x, h| {
                ode_step(&map, &field, x, h, &newton)
            })
        }
    };
    apply_composition(base, &cfg.composition, newton)
}

fn probe_name(tq: &TqMap) -> String {
    tq.at(0.1).name()
}

fn apply_composition(s: Stepper, comp: &Composition, newton: NewtonConfig) -> Result<Stepper> {
    let bad = |e: dmap::Error| HarnessError::Config(e.to_string());
    Ok(match comp {
        Composition::None => s,
        Composition::Adjoint => adjoint_method(&s, newton),
        Composition::TripleJump(k) => {
            let mut out = s;
            for _ in 0..*k {
                out = triple_jump(&out).map_err(bad)?;
            }
            out
        }
        Composition::Weights(w) => {
            let oc = check_order_conditions(w);
            if (oc.sum - 1.0).abs() > 1e-12 {
                return config_err(format!("composition weights sum to {}, not 1", oc.sum));
            }
            let order = if oc.satisfied && s.symmetric && s.declared_order == 2 { s.declared_order + 2 } else { s.declared_order };
            compose(&vec![s; w.len()], w).map_err(bad)?.with_order(order)
        }
    })
}

fn midpoint_reference<V>(sys: &Mechanical<V>, newton: NewtonConfig) -> Result<Stepper>
where
    V: Potential + Clone + 'static,
{
    let base = Stepper::hamiltonian(ThetaMap::midpoint(sys.mass.len()), sys.clone(), newton);
    triple_jump(&base).map_err(|e| HarnessError::Config(e.to_string()))
}

fn vector_or(v: &Option<Vec<f64>>, default: Vec<f64>, key: &str, len: Option<usize>) -> Result<Vec<f64>> {
    let out = v.clone().unwrap_or(default);
    match len {
        Some(n) if out.len() != n => config_err(format!("`{key}` needs {n} values, got {}", out.len())),
        _ => Ok(out),
    }
}

fn mechanical_problem<V>(
    sys: Mechanical<V>,
    q0: Vec<f64>,
    p0: Vec<f64>,
    exact: Option<ExactFn>,
    cfg: &ExperimentConfig,
    newton: NewtonConfig,
) -> Result<Problem>
where
    V: Potential + Clone + 'static,
{
    if q0.len() != p0.len() {
        return config_err(format!("q0 has {} values but p0 has {}", q0.len(), p0.len()));
    }
    let stepper = mechanical_stepper(&sys, cfg, newton)?;
    let reference = if exact.is_some() { None } else { Some(midpoint_reference(&sys, newton)?) };
    let ham = sys.clone();
    Ok(Problem {
        x0: [q0, p0].concat(),
        stepper,
        energy: Arc::new(move |x| energy(&ham, x)),
        exact,
        reference,
        defect: DefectMode::Canonical,
    })
}

fn only_hamiltonian(cfg: &ExperimentConfig, map: &str) -> Result<()> {
    if cfg.scheme != Scheme::Hamiltonian {
        return config_err(format!("system `{}` supports only scheme hamiltonian", cfg.system.name));
    }
    match &cfg.map {
        Some(m) if m.name == map => Ok(()),
        _ => config_err(format!("system `{}` needs map = {map}", cfg.system.name)),
    }
}

#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn build_problem(cfg: &ExperimentConfig, newton: NewtonConfig) -> Result<Problem> {
    let s = &cfg.system;
    match s.name.as_str() {
        "harmonic" => {
            if !(s.k > 0.0) {
                return config_err("harmonic needs k > 0");
            }
            let q0 = vector_or(&cfg.q0, vec![1.0], "q0", None)?;
            let p0 = vector_or(&cfg.p0, vec![0.5], "p0", Some(q0.len()))?;
            let sys = Mechanical::unit(Spring { n: q0.len(), k: s.k });
            let w = s.k.sqrt();
            let (a, b) = (q0.clone(), p0.clone());
            let exact: ExactFn = Arc::new(move |t| {
                let (c, sn) = ((w * t).cos(), (w * t).sin());
                let q = a.iter().zip(&b).map(|(q, p)| q * c + p / w * sn);
                let p = a.iter().zip(&b).map(|(q, p)| -q * w * sn + p * c);
                q.chain(p).collect()
            });
            mechanical_problem(sys, q0, p0, Some(exact), cfg, newton)
        }
        "pendulum" => {
            let q0 = vector_or(&cfg.q0, vec![1.0], "q0", Some(1))?;
            let p0 = vector_or(&cfg.p0, vec![0.0], "p0", Some(1))?;
            mechanical_problem(pendulum(), q0, p0, None, cfg, newton)
        }
        "cubic" => {
            let q0 = vector_or(&cfg.q0, vec![0.5], "q0", Some(1))?;
            let p0 = vector_or(&cfg.p0, vec![0.3], "p0", Some(1))?;
            mechanical_problem(cubic_oscillator(), q0, p0, None, cfg, newton)
        }
        "kepler-2d" => {
            let e = s.eccentricity;
            if !(0.0..1.0).contains(&e) {
                return config_err(format!("eccentricity must lie in [0, 1), got {e}"));
            }
            let q0 = vector_or(&cfg.q0, vec![1.0 - e, 0.0], "q0", Some(2))?;
            let p0 = vector_or(&cfg.p0, vec![0.0, ((1.0 + e) / (1.0 - e)).sqrt()], "p0", Some(2))?;
            mechanical_problem(kepler(), q0, p0, None, cfg, newton)
        }
        "sphere-free" => sphere_problem(cfg, newton),
        "rigid-body" => rigid_body_problem(cfg, newton),
        other => config_err(format!("unknown system `{other}`")),
    }
}

fn sphere_problem(cfg: &ExperimentConfig, newton: NewtonConfig) -> Result<Problem> {
    only_hamiltonian(cfg, "sphere-projection")?;
    if cfg.map.as_ref().and_then(|m| m.theta).is_some_and(|t| t != 0.0) {
        return config_err("sphere-free steps with the one-sided projection map (theta = 0) only");
    }
    let x = vector_or(&cfg.q0, vec![0.0, 0.6, 0.8], "q0", Some(3))?;
    let p = vector_or(&cfg.p0, vec![1.0, 0.0, 0.0], "p0", Some(3))?;
    let start = SphereCotangent::new(x.clone(), p.clone()).map_err(|e| HarnessError::Config(e.to_string()))?;
    let base = Stepper::new("sphere-projection", 1, false, true, move |s, h| {
        let st = SphereCotangent { x: s[..3].to_vec(), p: s[3..].to_vec() };
        let out = sphere_hamiltonian_step(&FreeParticle, &st, h, true, &newton)?;
        Ok(StepResult { state: [out.state.x, out.state.p].concat(), newton_iters: out.newton_iters })
    });
    let stepper = apply_composition(base, &cfg.composition, newton)?;
    let exact: ExactFn = Arc::new(move |t| {
        let w = dot(&start.p, &start.p).sqrt();
        if w == 0.0 {
            return [start.x.clone(), start.p.clone()].concat();
        }
        let (c, s) = ((w * t).cos(), (w * t).sin());
        let xs = (0..3).map(|i| c * start.x[i] + s * start.p[i] / w);
        let ps = (0..3).map(|i| -w * s * start.x[i] + c * start.p[i]);
        xs.chain(ps).collect()
    });
    Ok(Problem {
        x0: [x, p].concat(),
        stepper,
        energy: Arc::new(|s| 0.5 * dot(&s[3..], &s[3..])),
        exact: Some(exact),
        reference: None,
        defect: DefectMode::Sphere,
    })
}

fn rotation_from(x: &[f64]) -> Mat<f64> {
    Mat::from_rows(&[x[0..3].to_vec(), x[3..6].to_vec(), x[6..9].to_vec()])
}

/// `(R, Π)` stepper: each step is taken in the Cayley chart centred at the current attitude.
fn rigid_body_stepper(body: RigidBody, newton: NewtonConfig) -> Stepper {
    Stepper::new("cayley", 2, true, true, move |x, h| {
        let r = rotation_from(x);
        let out = hamiltonian_step(&CayleyChartMap, &body, &[0.0; 3], &x[9..12], h, &newton)?;
        let (a, p) = (&out.state[..3], &out.state[3..]);
        let r1 = r.matmul(&cay(a)?);
        let pi = body_momentum(a, p)?;
        let mut state = r1.data().to_vec();
        state.extend(pi);
        Ok(StepResult { state, newton_iters: out.newton_iters })
    })
}

fn rigid_body_problem(cfg: &ExperimentConfig, newton: NewtonConfig) -> Result<Problem> {
    only_hamiltonian(cfg, "cayley")?;
    let body = RigidBody::new(cfg.system.inertia).map_err(|e| HarnessError::Config(e.to_string()))?;
    let a0 = vector_or(&cfg.q0, vec![0.0; 3], "q0", Some(3))?;
    let pi0 = vector_or(&cfg.p0, vec![0.3, 0.9, -0.4], "p0", Some(3))?;
    let r0 = cay(&a0).map_err(|e| HarnessError::Config(format!("q0 is not a valid Cayley chart point: {e}")))?;
    let stepper = apply_composition(rigid_body_stepper(body, newton), &cfg.composition, newton)?;
    let reference = triple_jump(&rigid_body_stepper(body, newton)).map_err(|e| HarnessError::Config(e.to_string()))?;
    let chart = apply_composition(Stepper::hamiltonian(CayleyChartMap, body, defect_newton()), &cfg.composition, defect_newton())?;
    let mut x0 = r0.data().to_vec();
    x0.extend(pi0);
    Ok(Problem {
        x0,
        stepper,
        energy: Arc::new(move |x| body.kinetic_energy(&x[9..12])),
        exact: None,
        reference: Some(reference),
        defect: DefectMode::RigidBody(chart),
    })
}

/// `max |ω(Mu_i, Mu_j) - ω(u_i, u_j)|` over a basis of `T(T*S²)` at `x = (x, p)`.
fn sphere_defect(step: &Stepper, x: &[f64], h: f64) -> dmap::Result<f64> {
    let (pos, mom) = (&x[..3], &x[3..]);
    let t = tangent_basis(pos);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for ti in &t {
        let c = dot(mom, ti);
        basis.push(ti.iter().chain(pos.iter().map(|xi| -c * xi).collect::<Vec<_>>().iter()).copied().collect());
    }
    for ti in &t {
        basis.push([vec![0.0; 3], ti.clone()].concat());
    }
    let omega = |a: &[f64], b: &[f64]| dot(&a[..3], &b[3..]) - dot(&a[3..], &b[..3]);
    let eps = DEFECT_FD_STEP;
    let mut images = Vec::new();
    for u in &basis {
        let plus: Vec<f64> = x.iter().zip(u).map(|(a, b)| a + eps * b).collect();
        let minus: Vec<f64> = x.iter().zip(u).map(|(a, b)| a - eps * b).collect();
        let (fp, fm) = (step.step(&plus, h)?.state, step.step(&minus, h)?.state);
        images.push(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * eps)).collect::<Vec<f64>>());
    }
    let mut worst = 0.0f64;
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            worst = worst.max((omega(&images[i], &images[j]) - omega(&basis[i], &basis[j])).abs());
        }
    }
    Ok(worst)
}

fn defect_at(mode: &DefectMode, step: &Stepper, x: &[f64], h: f64) -> dmap::Result<f64> {
    match mode {
        DefectMode::Canonical => symplectic_defect(|y| Ok(step.step(y, h)?.state), x, DEFECT_FD_STEP),
        DefectMode::Sphere => sphere_defect(step, x, h),
        DefectMode::RigidBody(chart) => {
            let y = [vec![0.0; 3], x[9..12].to_vec()].concat();
            symplectic_defect(|z| Ok(chart.step(z, h)?.state), &y, DEFECT_FD_STEP)
        }
    }
}

/// Runs every step size. Configuration problems are returned as errors; a numerical
/// failure stops the sweep and is recorded in [`Report::failure`] alongside the finished rows.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Report> {
    cfg.check()?;
    let problem = build_problem(cfg, newton_cfg(cfg.tol))?;
    let probe = build_problem(cfg, defect_newton())?;
    let h_min = *cfg.h_list.last().expect("checked non-empty");
    let mut report = Report {
        config: cfg.name.clone(),
        method: problem.stepper.label.clone(),
        declared_order: problem.stepper.declared_order,
        reference: match problem.exact {
            Some(_) => Reference::Exact,
            None => Reference::TripleJump { h: h_min / REFERENCE_REFINEMENT as f64 },
        },
        rows: Vec::new(),
        failure: None,
    };
    let target = match (&problem.exact, &problem.reference) {
        (Some(f), _) => f(cfg.t_final),
        (None, Some(r)) => {
            let h_ref = h_min / REFERENCE_REFINEMENT as f64;
            let steps = cfg.steps(h_min) * REFERENCE_REFINEMENT;
            match Trajectory::integrate(&problem.x0, h_ref, steps, |x, h| r.step(x, h), |_| 0.0) {
                Ok(t) => t.last().to_vec(),
                Err(e) => {
                    report.failure = Some(HarnessError::Numerical(format!("reference run: {e}")));
                    return Ok(report);
                }
            }
        }
        (None, None) => unreachable!("every problem has an exact solution or a reference"),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for &h in &cfg.h_list {
        match run_one(&problem, &probe, cfg, h, &target, &mut rng, opts) {
            Ok(row) => report.rows.push(row),
            Err(e) => {
                report.failure = Some(HarnessError::Numerical(format!("h = {h}: {e}")));
                break;
            }
        }
    }
    Ok(report)
}

fn run_one(
    problem: &Problem,
    probe: &Problem,
    cfg: &ExperimentConfig,
    h: f64,
    target: &[f64],
    rng: &mut ChaCha8Rng,
    opts: &RunOptions,
) -> dmap::Result<ReportRow> {
    let start = Instant::now();
    let steps = cfg.steps(h);
    let energy = problem.energy.clone();
    let traj = Trajectory::integrate(&problem.x0, h, steps, |x, h| problem.stepper.step(x, h), |x| energy(x))?;
    let wall = start.elapsed().as_secs_f64();
    let mut defect = defect_at(&probe.defect, &probe.stepper, &problem.x0, h)?;
    for _ in 0..cfg.defect_samples {
        let k = rng.random_range(0..traj.states.len());
        defect = defect.max(defect_at(&probe.defect, &probe.stepper, &traj.states[k], h)?);
    }
    Ok(ReportRow {
        h,
        global_error: max_abs_diff(traj.last(), target),
        energy_drift_max: traj.energy_drift_max(),
        symplectic_defect: defect,
        newton_iters_mean: traj.newton_iters_mean(),
        wall_time: if opts.timing { wall } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<(f64, f64)> = [0.1, 0.05, 0.025].iter().map(|&h| (h, 3.0 * h * h)).collect();
        assert!((least_squares_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(least_squares_slope(&pts[..1]), None);
    }

    #[test]
    fn harmonic_exact_solution_is_a_rotation() {
        let cfg = ExperimentConfig::parse("preset = harmonic-midpoint", "t").unwrap();
        let p = build_problem(&cfg, NewtonConfig::default()).unwrap();
        let f = p.exact.unwrap();
        let x = f(std::f64::consts::TAU);
        assert!(max_abs_diff(&x, &[1.0, 0.5]) < 1e-14);
        assert!(p.reference.is_none());
    }
}
