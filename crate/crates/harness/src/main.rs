use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dmap_harness::config::{parse_list, ExperimentConfig};
use dmap_harness::error::Result;
use dmap_harness::presets::preset_names;
use dmap_harness::registry::{validate_named, MAPS, SYSTEMS, VALIDATION_POINTS};
use dmap_harness::{run_experiment, run_suite, RunOptions};

#[derive(Parser, Debug)]
#[command(name = "dmap", version, about = "Run discretization-map integrator experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Step sizes, comma separated; replaces the config's `h_list`.
    #[arg(long = "h", global = true, value_name = "H[,H...]")]
    h: Option<String>,
    /// Final time; replaces the config's `t_final`.
    #[arg(long, global = true)]
    t_final: Option<f64>,
    /// Output file for `run`, output directory for `suite`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Newton tolerance; replaces the config's `tol`.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Record wall-clock time per row. Reports are then no longer reproducible.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one config file.
    Run { config: PathBuf },
    /// Run every `*.cfg` file in a directory.
    Suite { dir: PathBuf },
    /// List the built-in maps.
    ListMaps,
    /// List the built-in systems and presets.
    ListSystems,
    /// Check a map's defining identities at random points.
    ValidateMap { name: String },
}

struct Overrides {
    h: Option<Vec<f64>>,
    t_final: Option<f64>,
    tol: Option<f64>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(h) = &self.h {
            cfg.h_list = h.clone();
        }
        if let Some(t) = self.t_final {
            cfg.t_final = t;
        }
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

fn run(cli: &Cli, ov: &Overrides, config: &Path, opts: &RunOptions) -> Result<i32> {
    let mut cfg = ExperimentConfig::load(config)?;
    ov.apply(&mut cfg);
    cfg.check()?;
    let report = run_experiment(&cfg, opts)?;
    let out = cli.out.clone().or_else(|| cfg.output.as_ref().map(PathBuf::from));
    match out {
        Some(path) => {
            write(&path, &report.csv())?;
            write(&sidecar(&path), &report.meta())?;
        }
        None => {
            print!("{}", report.csv());
            for line in report.meta().lines() {
                eprintln!("# {line}");
            }
        }
    }
    if let Some(e) = &report.failure {
        eprintln!("error: {e}");
        return Ok(e.exit_code());
    }
    Ok(0)
}

fn suite(cli: &Cli, ov: &Overrides, dir: &Path, opts: &RunOptions) -> Result<i32> {
    let report = run_suite(dir, |c| ov.apply(c), opts)?;
    match &cli.out {
        Some(out) => {
            write(&out.join("report.csv"), &report.report_csv())?;
            write(&out.join("slopes.csv"), &report.slope_csv())?;
            write(&out.join("failures.csv"), &report.failure_csv())?;
        }
        None => {
            print!("{}", report.report_csv());
            print!("\n# observed orders\n{}", report.slope_csv());
            print!("\n# failures\n{}", report.failure_csv());
        }
    }
    for (file, e) in report.failures() {
        eprintln!("{file}: {e}");
    }
    Ok(report.exit_code())
}

fn list_maps() {
    println!("{:<22} {:<14} {:<12} description", "name", "space", "params");
    for m in MAPS {
        let space = format!("{:?}", m.space).to_lowercase();
        println!("{:<22} {:<14} {:<12} {}", m.name, space, m.params, m.about);
    }
}

fn list_systems() {
    println!("{:<12} {:<38} {:<13} reference", "name", "state", "params");
    for s in SYSTEMS {
        println!("{:<12} {:<38} {:<13} {}", s.name, s.state, s.params, s.reference);
    }
    println!("\npresets: {}", preset_names().join(", "));
}

fn validate_map(name: &str) -> Result<i32> {
    let mut ok = true;
    for (label, r) in validate_named(name)? {
        println!(
            "{name} {label}: zero_section = {:.3e}, fiber_derivative = {:.3e}, {} ({VALIDATION_POINTS} points)",
            r.zero_section,
            r.fiber_derivative,
            if r.passed { "PASS" } else { "FAIL" }
        );
        ok &= r.passed;
    }
    Ok(if ok { 0 } else { 3 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions { timing: cli.timing };
    let result = (|| -> Result<i32> {
        let h = match &cli.h {
            Some(s) => Some(parse_list(s, "--h")?),
            None => None,
        };
        let ov = Overrides { h, t_final: cli.t_final, tol: cli.tol };
        match &cli.command {
            Command::Run { config } => run(&cli, &ov, config, &opts),
            Command::Suite { dir } => suite(&cli, &ov, dir, &opts),
            Command::ListMaps => {
                list_maps();
                Ok(0)
            }
            Command::ListSystems => {
                list_systems();
                Ok(0)
            }
            Command::ValidateMap { name } => validate_map(name),
        }
    })();
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
