//! Runs many scenarios in parallel and writes per-scenario traces plus a summary.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::controller::ControllerVariant;
use crate::performance::RigidityMarginCheck;
use crate::rigidity::Framework;
use crate::scenario::{PreparedScenario, Scenario};
use crate::simulation::{classify_shape, Flags, ShapeClass, SimulationTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub name: String,
    pub variant: Option<ControllerVariant>,
    pub final_error_norm: Option<f64>,
    pub max_bound_ratio: Option<f64>,
    pub flags: Flags,
    pub classification: Option<ShapeClass>,
    pub max_centroid_error: Option<f64>,
    pub margin: Option<RigidityMarginCheck>,
    pub halt: Option<String>,
    pub wall_time_s: f64,
    pub csv: Option<PathBuf>,
    /// Validation or IO failure; the remaining fields are then mostly empty.
    pub error: Option<String>,
}

impl ScenarioSummary {
    fn failed(name: &str, error: String) -> Self {
        Self {
            name: name.to_string(),
            variant: None,
            final_error_norm: None,
            max_bound_ratio: None,
            flags: Flags::default(),
            classification: None,
            max_centroid_error: None,
            margin: None,
            halt: None,
            wall_time_s: 0.0,
            csv: None,
            error: Some(error),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: ScenarioSummary,
    pub trace: SimulationTrace,
}

/// Simulates a prepared scenario and summarizes the run.
pub fn run_prepared(prepared: &PreparedScenario) -> RunOutcome {
    let start = Instant::now();
    let trace = prepared.run();
    let wall_time_s = start.elapsed().as_secs_f64();
    let classification = match (&prepared.desired, trace.final_positions()) {
        (Some(desired), Some(q)) => {
            Framework::new(desired.graph().clone(), desired.dim(), q.clone())
                .ok()
                .and_then(|fw| {
                    classify_shape(&fw, desired, prepared.scenario.checks.shape_tol).ok()
                })
        }
        _ => None,
    };
    let summary = ScenarioSummary {
        name: prepared.name().to_string(),
        variant: Some(prepared.scenario.controller.variant),
        final_error_norm: Some(trace.final_error_norm()),
        max_bound_ratio: Some(trace.max_bound_ratio()),
        flags: trace.final_flags(),
        classification,
        max_centroid_error: trace.max_centroid_error(),
        margin: Some(prepared.margin),
        halt: trace.halt.map(|h| h.to_string()),
        wall_time_s,
        csv: None,
        error: None,
    };
    RunOutcome { summary, trace }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub scenarios: Vec<ScenarioSummary>,
}

impl BatchReport {
    pub fn any_error(&self) -> bool {
        self.scenarios.iter().any(|s| s.error.is_some())
    }

    pub fn any_violation(&self) -> bool {
        self.scenarios.iter().any(|s| s.flags.any())
    }

    /// 2 for validation or IO errors, 1 for violation flags, 0 otherwise.
    pub fn exit_code(&self) -> u8 {
        if self.any_error() {
            2
        } else if self.any_violation() {
            1
        } else {
            0
        }
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<32} {:<20} {:>11} {:>9} {:>4} {:>4} {:>4} {:>10} {:>8}",
            "scenario", "variant", "|e(T)|", "max e/b", "ppb", "col", "dis", "shape", "wall[s]"
        );
        for s in &self.scenarios {
            if let Some(err) = &s.error {
                let _ = writeln!(out, "{:<32} error: {err}", s.name);
                continue;
            }
            let flag = |b: bool| if b { "X" } else { "-" };
            let _ = writeln!(
                out,
                "{:<32} {:<20} {:>11.3e} {:>9.4} {:>4} {:>4} {:>4} {:>10} {:>8.3}",
                s.name,
                s.variant.map(|v| v.name()).unwrap_or("-"),
                s.final_error_norm.unwrap_or(f64::NAN),
                s.max_bound_ratio.unwrap_or(f64::NAN),
                flag(s.flags.ppb_violation),
                flag(s.flags.collision),
                flag(s.flags.disconnection),
                s.classification
                    .map(|c| c.to_string())
                    .unwrap_or_else(|| "-".into()),
                s.wall_time_s,
            );
            if let Some(halt) = &s.halt {
                let _ = writeln!(out, "    halted: {halt}");
            }
        }
        out
    }
}

fn csv_name(name: &str) -> String {
    let clean: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{clean}.csv")
}

fn write_trace(trace: &SimulationTrace, path: &Path) -> io::Result<()> {
    trace.write_csv(BufWriter::new(File::create(path)?))
}

/// Validates and runs every scenario in parallel.
///
/// One failing scenario never aborts the others; its error lands in the summary.
/// When `out_dir` is given, each trace goes to `<name>.csv` and the summary to
/// `summary.json` and `summary.txt`.
pub fn run_batch(scenarios: &[Scenario], out_dir: Option<&Path>) -> io::Result<BatchReport> {
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
    }
    let summaries = scenarios
        .par_iter()
        .map(|scenario| {
            let prepared = match scenario.prepare() {
                Ok(p) => p,
                Err(err) => return ScenarioSummary::failed(&scenario.name, err.to_string()),
            };
            let RunOutcome { mut summary, trace } = run_prepared(&prepared);
            if let Some(dir) = out_dir {
                let path = dir.join(csv_name(&scenario.name));
                match write_trace(&trace, &path) {
                    Ok(()) => summary.csv = Some(path),
                    Err(err) => summary.error = Some(format!("{}: {err}", path.display())),
                }
            }
            summary
        })
        .collect();
    let report = BatchReport {
        scenarios: summaries,
    };
    if let Some(dir) = out_dir {
        fs::write(
            dir.join("summary.json"),
            serde_json::to_string_pretty(&report).map_err(io::Error::other)? + "\n",
        )?;
        fs::write(dir.join("summary.txt"), report.table())?;
    }
    Ok(report)
}
