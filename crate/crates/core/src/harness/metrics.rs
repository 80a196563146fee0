//! Per-slot metrics and their CSV form.
//!
//! Columns, in order:
//!
//! | column | meaning |
//! |---|---|
//! | `slot` | slots completed |
//! | `total_queue` | `Σ Q_ik` |
//! | `arrivals` | cumulative exogenous arrivals, dropped ones included |
//! | `delivered` | cumulative packets that reached their destination |
//! | `dropped` | cumulative packets refused by admission control |
//! | `drop_fraction` | `dropped / arrivals`, 0 before the first arrival |
//! | `virtual_x` | `Σ X_ik` (Tracking-MaxWeight, else 0) |
//! | `virtual_y_abs` | `Σ |Y_ijk|` (Tracking-MaxWeight, else 0) |
//! | `q_<i>_<k>` | backlog of flow `k` at node `i`, buffered queues only |
//! | `g_<i>_<j>_<k>` | running mean of the imagined rate on `i → j` for flow `k` (Tracking-MaxWeight only) |
//!
//! Ids in column names are one-based.

use std::path::Path;

use crate::control::Probe;
use crate::error::{Error, Result};
use crate::model::{FlowId, Network, NodeId, QueueState};

pub const BASE_COLUMNS: [&str; 8] = [
    "slot",
    "total_queue",
    "arrivals",
    "delivered",
    "dropped",
    "drop_fraction",
    "virtual_x",
    "virtual_y_abs",
];

/// Sampled metrics of one run, or the mean over several.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSeries {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl MetricsSeries {
    pub fn new(columns: Vec<String>) -> Self {
        MetricsSeries {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// One column as a vector.
    pub fn values(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.column(name)?;
        Some(self.rows.iter().map(|r| r[c]).collect())
    }

    pub fn last(&self, name: &str) -> Option<f64> {
        let c = self.column(name)?;
        self.rows.last().map(|r| r[c])
    }

    /// Entrywise mean of series with identical shape.
    pub fn mean(series: &[MetricsSeries]) -> Result<MetricsSeries> {
        let first = series
            .first()
            .ok_or_else(|| Error::Config("mean of zero series".into()))?;
        if series
            .iter()
            .any(|s| s.columns != first.columns || s.rows.len() != first.rows.len())
        {
            return Err(Error::Config("series differ in shape".into()));
        }
        let n = series.len() as f64;
        let rows = (0..first.rows.len())
            .map(|r| {
                (0..first.columns.len())
                    .map(|c| series.iter().map(|s| s.rows[r][c]).sum::<f64>() / n)
                    .collect()
            })
            .collect();
        Ok(MetricsSeries {
            columns: first.columns.clone(),
            rows,
        })
    }
}

/// Column layout for a network, with imagined-rate columns for `imagined`.
pub fn columns(net: &Network, imagined: &[(NodeId, NodeId, FlowId)]) -> Vec<String> {
    let mut cols: Vec<String> = BASE_COLUMNS.iter().map(|c| c.to_string()).collect();
    for (i, k) in net.buffered_queues() {
        cols.push(format!("q_{}_{}", i.label(), k.label()));
    }
    for (i, j, k) in imagined {
        cols.push(format!("g_{}_{}_{}", i.label(), j.label(), k.label()));
    }
    cols
}

/// Cumulative counters a row is built from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Totals {
    pub arrivals: u64,
    pub delivered: u64,
    pub dropped: u64,
}

impl Totals {
    pub fn drop_fraction(&self) -> f64 {
        if self.arrivals == 0 {
            0.0
        } else {
            self.dropped as f64 / self.arrivals as f64
        }
    }
}

pub(crate) fn row(net: &Network, slot: u64, q: &QueueState, totals: &Totals, probe: &Probe) -> Vec<f64> {
    let mut r = vec![
        slot as f64,
        q.total() as f64,
        totals.arrivals as f64,
        totals.delivered as f64,
        totals.dropped as f64,
        totals.drop_fraction(),
        probe.virtual_x,
        probe.virtual_y_abs,
    ];
    r.extend(net.buffered_queues().into_iter().map(|(i, k)| q.get(i, k) as f64));
    r.extend(probe.imagined_means.iter().map(|&(_, m)| m));
    r
}

pub fn emit_csv(series: &MetricsSeries, path: &Path) -> Result<()> {
    let wrap = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    w.write_record(&series.columns).map_err(wrap)?;
    for r in &series.rows {
        w.write_record(r.iter().map(|v| v.to_string())).map_err(wrap)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_csv(path: &Path) -> Result<MetricsSeries> {
    let wrap = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(wrap)?;
    let columns = r.headers().map_err(wrap)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(wrap)?;
        let row = rec
            .iter()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|e| Error::Config(format!("{}: bad number `{v}`: {e}", path.display())))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(MetricsSeries { columns, rows })
}
