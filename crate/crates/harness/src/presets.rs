//! Named configurations for the worked examples. A file may start from one with `preset = <name>`.

const ORDER_STUDY: &str = "h_list = 0.1, 0.05, 0.025, 0.0125\nt_final = 1\n";

pub const PRESETS: &[(&str, &str)] = &[
    ("harmonic-symplectic-euler", "system = harmonic\nmap = symplectic-euler\nq0 = 1\np0 = 0.5\n"),
    ("harmonic-midpoint", "system = harmonic\nmap = midpoint\nq0 = 1\np0 = 0.5\n"),
    ("harmonic-stormer-verlet", "system = harmonic\nscheme = stormer-verlet\nq0 = 1\np0 = 0.5\n"),
    ("harmonic-triple-jump", "system = harmonic\nmap = midpoint\ncomposition = triple-jump\nq0 = 1\np0 = 0.5\n"),
    ("harmonic-ode-midpoint", "system = harmonic\nscheme = ode\nmap = midpoint\nq0 = 1\np0 = 0.5\n"),
    ("pendulum-midpoint", "system = pendulum\nmap = midpoint\nq0 = 1\np0 = 0\n"),
    ("pendulum-stormer-verlet", "system = pendulum\nscheme = stormer-verlet\nq0 = 1\np0 = 0\n"),
    ("pendulum-variational", "system = pendulum\nscheme = variational\nmap = midpoint\nq0 = 1\np0 = 0\n"),
    ("pendulum-newmark", "system = pendulum\nscheme = sode-endpoint\nmap = newmark\ngamma = 0.5\nbeta = 0.25\nq0 = 1\np0 = 0\n"),
    ("pendulum-tangent-midbase", "system = pendulum\nscheme = sode-midbase\nmap = midpoint\nq0 = 1\np0 = 0\n"),
    ("kepler-midpoint", "system = kepler-2d\nmap = midpoint\neccentricity = 0.5\n"),
    ("kepler-triple-jump", "system = kepler-2d\nscheme = stormer-verlet\ncomposition = triple-jump\neccentricity = 0.5\n"),
    ("sphere-free", "system = sphere-free\nmap = sphere-projection\nq0 = 0, 0.6, 0.8\np0 = 1, 0, 0\n"),
    (
        "rigid-body",
        "system = rigid-body\nmap = cayley\ninertia = 1, 2, 3\np0 = 0.3, 0.9, -0.4\nh_list = 0.2, 0.1, 0.05, 0.025\n",
    ),
];

/// Full text of a preset. The default step-size study fills in keys the preset leaves unset.
pub fn preset_source(name: &str) -> Option<String> {
    let (_, body) = PRESETS.iter().find(|(n, _)| *n == name)?;
    let mut text = body.to_string();
    for line in ORDER_STUDY.lines() {
        let key = line.split('=').next().unwrap_or("").trim();
        if !body.lines().any(|l| l.split('=').next().unwrap_or("").trim() == key) {
            text.push_str(line);
            text.push('\n');
        }
    }
    Some(text)
}

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}
