//! Reproducible experiments: bundled scenarios, runs, sweeps and their output
//! files.

mod experiment;
mod metrics;
mod scenario;
mod sweep;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub use experiment::{
    regression_slope, run_experiment, run_replication, ControllerSpec, ExperimentConfig, ExperimentResult,
    RunResult, RunSummary, Simulation, SlotReport,
};
pub use metrics::{columns, emit_csv, read_csv, MetricsSeries, Totals, BASE_COLUMNS};
pub use scenario::{build_scenario, scenario_config, Scenario, SCENARIOS};
pub use sweep::{emit_rows, load_sweep, SweepPoint};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "run-manifest.txt";

/// Text recording everything needed to repeat a run: the crate version, the
/// command that produced it and the fully resolved configuration.
pub fn manifest(command: &str, cfg: &ExperimentConfig) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "# pcnet {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(text, "# command: {command}");
    let _ = writeln!(text, "# seeds: {}..{}", cfg.seed, cfg.seed + u64::from(cfg.replications));
    text.push('\n');
    text.push_str(&cfg.to_toml());
    text
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `series.csv` (mean over replications), one
/// `series_<r>.csv` per replication when there are several, `summary.csv`,
/// `episodes.csv` for learning controllers and the run manifest. Returns the
/// files written.
pub fn write_outputs(dir: &Path, command: &str, cfg: &ExperimentConfig, result: &ExperimentResult) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::new();

    let path = dir.join("series.csv");
    emit_csv(&result.mean, &path)?;
    written.push(path);
    if result.runs.len() > 1 {
        for run in &result.runs {
            let path = dir.join(format!("series_{}.csv", run.summary.replication));
            emit_csv(&run.series, &path)?;
            written.push(path);
        }
    }

    let path = dir.join("summary.csv");
    let summaries: Vec<_> = result.runs.iter().map(|r| r.summary.clone()).collect();
    emit_rows(&summaries, &path)?;
    written.push(path);

    if matches!(cfg.controller, ControllerSpec::Tucrl(_)) {
        let path = dir.join("episodes.csv");
        emit_rows(&result.runs[0].episode_log, &path)?;
        written.push(path);
    }

    let path = dir.join(MANIFEST_FILE);
    std::fs::write(&path, manifest(command, cfg)).map_err(io(&path))?;
    written.push(path);
    Ok(written)
}
