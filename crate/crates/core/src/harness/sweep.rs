use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::experiment::{run_experiment, ControllerSpec, ExperimentConfig};
use crate::error::{Error, Result};

/// One cell of a load sweep, averaged over replications.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub load: f64,
    pub controller: String,
    /// Mean total backlog at the last slot.
    pub final_queue: f64,
    pub queue_slope: f64,
    pub delivered_fraction: f64,
    pub drop_fraction: f64,
}

/// Runs `base` once per (load, controller) pair, loads in the outer order.
pub fn load_sweep(base: &ExperimentConfig, loads: &[f64], controllers: &[ControllerSpec]) -> Result<Vec<SweepPoint>> {
    if loads.is_empty() {
        return Err(Error::Config("a sweep needs at least one load".into()));
    }
    if controllers.is_empty() {
        return Err(Error::Config("a sweep needs at least one controller".into()));
    }
    let cells: Vec<(f64, ControllerSpec)> = loads
        .iter()
        .flat_map(|&l| controllers.iter().map(move |&c| (l, c)))
        .collect();
    cells
        .par_iter()
        .map(|&(load, controller)| {
            let cfg = ExperimentConfig {
                load,
                controller,
                ..base.clone()
            };
            let result = run_experiment(&cfg)?;
            let n = result.runs.len() as f64;
            let avg = |f: &dyn Fn(&super::RunSummary) -> f64| result.runs.iter().map(|r| f(&r.summary)).sum::<f64>() / n;
            Ok(SweepPoint {
                load,
                controller: controller.name().to_string(),
                final_queue: avg(&|s| s.backlog as f64),
                queue_slope: avg(&|s| s.queue_slope),
                delivered_fraction: avg(&|s| s.delivered_fraction),
                drop_fraction: avg(&|s| s.drop_fraction),
            })
        })
        .collect()
}

/// Writes serializable rows as CSV with a header taken from the field names.
pub fn emit_rows<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let wrap = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    for r in rows {
        w.serialize(r).map_err(wrap)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
