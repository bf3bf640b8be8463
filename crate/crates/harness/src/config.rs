//! Flat `key = value` experiment files. The grammar is documented in `docs/config.md`.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{config_err, HarnessError, Result};
use crate::presets::preset_source;

/// Every key the parser accepts.
pub const KNOWN_KEYS: &[&str] = &[
    "preset",
    "name",
    "system",
    "k",
    "eccentricity",
    "inertia",
    "map",
    "theta",
    "gamma",
    "beta",
    "c",
    "scheme",
    "composition",
    "h_list",
    "t_final",
    "q0",
    "p0",
    "seed",
    "tol",
    "defect_samples",
    "output",
];

/// Raw key-value pairs, in key order.
pub type Entries = BTreeMap<String, String>;

/// Parses the text of one file. Comments start at `#`; blank lines are ignored.
pub fn parse_entries(text: &str) -> Result<Entries> {
    let mut out = Entries::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return config_err(format!("line {}: expected `key = value`, got `{line}`", i + 1));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || !k.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_') {
            return config_err(format!("line {}: bad key `{k}`", i + 1));
        }
        if !KNOWN_KEYS.contains(&k) {
            return config_err(format!("line {}: unknown key `{k}`", i + 1));
        }
        if v.is_empty() {
            return config_err(format!("line {}: empty value for `{k}`", i + 1));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return config_err(format!("line {}: duplicate key `{k}`", i + 1));
        }
    }
    Ok(out)
}

/// Parses a file's text and layers it over its preset, if it names one.
pub fn resolve(text: &str) -> Result<Entries> {
    let own = parse_entries(text)?;
    let Some(name) = own.get("preset") else {
        return Ok(own);
    };
    let base = preset_source(name).ok_or_else(|| HarnessError::Config(format!("unknown preset `{name}`")))?;
    let mut merged = parse_entries(&base)?;
    merged.extend(own);
    Ok(merged)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Scheme {
    Hamiltonian,
    StormerVerlet,
    Variational,
    SodeEndpoint,
    SodeMidbase,
    Ode,
}

impl Scheme {
    pub const NAMES: &'static [&'static str] =
        &["hamiltonian", "stormer-verlet", "variational", "sode-endpoint", "sode-midbase", "ode"];

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "hamiltonian" => Scheme::Hamiltonian,
            "stormer-verlet" => Scheme::StormerVerlet,
            "variational" => Scheme::Variational,
            "sode-endpoint" => Scheme::SodeEndpoint,
            "sode-midbase" => Scheme::SodeMidbase,
            "ode" => Scheme::Ode,
            _ => return config_err(format!("unknown scheme `{s}` (expected one of {})", Self::NAMES.join(", "))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Composition {
    None,
    Adjoint,
    /// Triple jump applied `n` times.
    TripleJump(u32),
    Weights(Vec<f64>),
}

impl Composition {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "none" => Composition::None,
            "adjoint" => Composition::Adjoint,
            "triple-jump" => Composition::TripleJump(1),
            "triple-jump-2" => Composition::TripleJump(2),
            _ => match s.strip_prefix("weights:") {
                Some(w) => Composition::Weights(parse_list(w, "composition")?),
                None => return config_err(format!("unknown composition `{s}`")),
            },
        })
    }
}

/// Map name plus the parameters a map may read.
#[derive(Clone, Debug, PartialEq)]
pub struct MapSpec {
    pub name: String,
    pub theta: Option<f64>,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub c: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub name: String,
    pub k: f64,
    pub eccentricity: f64,
    pub inertia: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub system: SystemSpec,
    pub map: Option<MapSpec>,
    pub scheme: Scheme,
    pub composition: Composition,
    pub h_list: Vec<f64>,
    pub t_final: f64,
    pub q0: Option<Vec<f64>>,
    pub p0: Option<Vec<f64>>,
    pub seed: u64,
    pub tol: f64,
    pub defect_samples: usize,
    pub output: Option<String>,
}

fn parse_f64(s: &str, key: &str) -> Result<f64> {
    match s.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => config_err(format!("`{key}`: `{s}` is not a finite number")),
    }
}

pub fn parse_list(s: &str, key: &str) -> Result<Vec<f64>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(|t| parse_f64(t, key)).collect()
}

impl ExperimentConfig {
    pub fn from_entries(e: &Entries, fallback_name: &str) -> Result<Self> {
        let get = |k: &str| e.get(k).map(String::as_str);
        let num = |k: &str, d: f64| get(k).map_or(Ok(d), |s| parse_f64(s, k));
        let Some(system) = get("system") else {
            return config_err("missing `system`");
        };
        let inertia = match get("inertia") {
            Some(s) => {
                let v = parse_list(s, "inertia")?;
                let Ok(arr) = <[f64; 3]>::try_from(v.as_slice()) else {
                    return config_err("`inertia` needs three values");
                };
                arr
            }
            None => [1.0, 2.0, 3.0],
        };
        let system = SystemSpec { name: system.to_string(), k: num("k", 1.0)?, eccentricity: num("eccentricity", 0.5)?, inertia };
        let map = match get("map") {
            Some(name) => Some(MapSpec {
                name: name.to_string(),
                theta: get("theta").map(|s| parse_f64(s, "theta")).transpose()?,
                gamma: get("gamma").map(|s| parse_f64(s, "gamma")).transpose()?,
                beta: get("beta").map(|s| parse_f64(s, "beta")).transpose()?,
                c: get("c").map(|s| parse_f64(s, "c")).transpose()?,
            }),
            None => None,
        };
        let h_list = match get("h_list") {
            Some(s) => parse_list(s, "h_list")?,
            None => return config_err("missing `h_list`"),
        };
        let seed = match get("seed") {
            Some(s) => s.parse::<u64>().map_err(|_| HarnessError::Config(format!("`seed`: `{s}` is not an integer")))?,
            None => 0,
        };
        let defect_samples = match get("defect_samples") {
            Some(s) => s
                .parse::<usize>()
                .map_err(|_| HarnessError::Config(format!("`defect_samples`: `{s}` is not an integer")))?,
            None => 2,
        };
        let cfg = ExperimentConfig {
            name: get("name").unwrap_or(fallback_name).to_string(),
            system,
            map,
            scheme: Scheme::parse(get("scheme").unwrap_or("hamiltonian"))?,
            composition: Composition::parse(get("composition").unwrap_or("none"))?,
            h_list,
            t_final: num("t_final", 1.0)?,
            q0: get("q0").map(|s| parse_list(s, "q0")).transpose()?,
            p0: get("p0").map(|s| parse_list(s, "p0")).transpose()?,
            seed,
            tol: num("tol", 1e-12)?,
            defect_samples,
            output: get("output").map(str::to_string),
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn parse(text: &str, fallback_name: &str) -> Result<Self> {
        Self::from_entries(&resolve(text)?, fallback_name)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("experiment");
        Self::parse(&text, stem)
    }

    // Negated comparisons also reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    /// Invariants: non-empty, positive, strictly descending `h_list`; each `h` divides `t_final`.
    pub fn check(&self) -> Result<()> {
        if self.h_list.is_empty() {
            return config_err("`h_list` is empty");
        }
        if !(self.t_final > 0.0) {
            return config_err(format!("`t_final` must be positive, got {}", self.t_final));
        }
        if self.h_list.iter().any(|&h| !(h > 0.0)) {
            return config_err("`h_list` entries must be positive");
        }
        if self.h_list.windows(2).any(|w| w[1] >= w[0]) {
            return config_err("`h_list` must be strictly descending");
        }
        for &h in &self.h_list {
            let n = (self.t_final / h).round();
            if n < 1.0 || (n * h - self.t_final).abs() > 1e-9 * self.t_final {
                return config_err(format!("h = {h} does not divide t_final = {}", self.t_final));
            }
        }
        if !(self.tol > 0.0) {
            return config_err("`tol` must be positive");
        }
        Ok(())
    }

    /// Number of steps for `h`; exact because [`check`](Self::check) passed.
    pub fn steps(&self, h: f64) -> usize {
        (self.t_final / h).round() as usize
    }
}
