//! A directory of `*.cfg` files run as one batch.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::experiment::{run_experiment, Report, RunOptions, CSV_HEADER};

pub const CONFIG_EXTENSION: &str = "cfg";

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteEntry {
    pub file: String,
    pub outcome: std::result::Result<Report, HarnessError>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteReport {
    /// Sorted by file name.
    pub entries: Vec<SuiteEntry>,
}

/// Configuration files in `dir`, sorted so the report order is fixed.
pub fn config_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let rd = std::fs::read_dir(dir).map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in rd {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == CONFIG_EXTENSION) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Runs every config concurrently. A failing config is recorded and does not stop the others.
pub fn run_suite(dir: &Path, apply: impl Fn(&mut ExperimentConfig) + Sync, opts: &RunOptions) -> Result<SuiteReport> {
    let files = config_files(dir)?;
    let entries = files
        .par_iter()
        .map(|path| {
            let file = path.file_name().and_then(|s| s.to_str()).unwrap_or("?").to_string();
            let outcome = ExperimentConfig::load(path).and_then(|mut cfg| {
                apply(&mut cfg);
                run_experiment(&cfg, opts)
            });
            SuiteEntry { file, outcome }
        })
        .collect();
    Ok(SuiteReport { entries })
}

impl SuiteReport {
    pub fn reports(&self) -> impl Iterator<Item = (&str, &Report)> {
        self.entries.iter().filter_map(|e| e.outcome.as_ref().ok().map(|r| (e.file.as_str(), r)))
    }

    /// `(file, error)` for configs that failed outright or stopped early.
    pub fn failures(&self) -> Vec<(&str, &HarnessError)> {
        self.entries
            .iter()
            .filter_map(|e| match &e.outcome {
                Err(err) => Some((e.file.as_str(), err)),
                Ok(r) => r.failure.as_ref().map(|err| (e.file.as_str(), err)),
            })
            .collect()
    }

    /// All rows, prefixed by config and method.
    pub fn report_csv(&self) -> String {
        let mut s = format!("config,method,{CSV_HEADER}\n");
        for (_, r) in self.reports() {
            for row in &r.rows {
                s.push_str(&format!("{},{},{}\n", r.config, r.method, row.csv()));
            }
        }
        s
    }

    /// Least-squares log-log slope of global error against `h`, one line per config.
    pub fn slope_csv(&self) -> String {
        let mut s = String::from("config,method,declared_order,observed_order,points,reference\n");
        for (_, r) in self.reports() {
            let order = r.observed_order().map_or(String::from("n/a"), |o| format!("{o:.4}"));
            let pts = r.rows.iter().filter(|x| x.global_error > crate::experiment::ROUNDOFF_FLOOR).count();
            s.push_str(&format!("{},{},{},{order},{pts},{}\n", r.config, r.method, r.declared_order, r.reference));
        }
        s
    }

    pub fn failure_csv(&self) -> String {
        let mut s = String::from("file,exit_code,error\n");
        for (file, e) in self.failures() {
            s.push_str(&format!("{file},{},\"{}\"\n", e.exit_code(), e.to_string().replace('"', "'")));
        }
        s
    }

    /// 0 if everything ran; otherwise the most severe failure's code (configuration before numerics).
    pub fn exit_code(&self) -> i32 {
        let codes: Vec<i32> = self.failures().iter().map(|(_, e)| e.exit_code()).collect();
        if codes.contains(&2) {
            2
        } else if codes.contains(&3) {
            3
        } else {
            0
        }
    }
}
