use rayon::prelude::*;

use crate::error::{Error, Result};

/// Known transition law of a finite MDP, sparse by row.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionTable {
    states: usize,
    actions: usize,
    rows: Vec<Vec<(u32, f64)>>,
}

impl TransitionTable {
    /// `rows[s * actions + a]` lists `(next, probability)` pairs. Each row
    /// must sum to one within `1e-9`.
    pub fn new(states: usize, actions: usize, rows: Vec<Vec<(u32, f64)>>) -> Result<Self> {
        if rows.len() != states * actions {
            return Err(Error::StateSpace(format!(
                "{} rows for {states} states and {actions} actions",
                rows.len()
            )));
        }
        for (idx, row) in rows.iter().enumerate() {
            let total: f64 = row.iter().map(|&(_, p)| p).sum();
            if (total - 1.0).abs() > 1e-9 || row.iter().any(|&(s, p)| s as usize >= states || p < 0.0) {
                return Err(Error::StateSpace(format!(
                    "row for state {} action {} is not a distribution",
                    idx / actions,
                    idx % actions
                )));
            }
        }
        Ok(TransitionTable { states, actions, rows })
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn row(&self, s: usize, a: usize) -> &[(u32, f64)] {
        &self.rows[s * self.actions + a]
    }
}

/// Optimal average cost of a known model.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    /// Optimal average cost starting from state 0.
    pub gain: f64,
    /// Optimal average cost from every state. All entries agree unless the
    /// model is multichain.
    pub state_gains: Vec<f64>,
    pub policy: Vec<usize>,
    pub iterations: usize,
}

/// Span tolerance of [`oracle_average_cost`].
pub const ORACLE_TOLERANCE: f64 = 1e-6;

/// Relative value iteration on the exact model.
///
/// Iterates on the lazy chain `τ·I + (1 − τ)·P` with `τ = 1/2`, which has the
/// same gain and optimal policies as `P` and is aperiodic. Stops once the
/// span of successive differences is at most `tolerance`. Some truncated
/// models are multichain (packets can be stranded where the underlay never
/// serves them), so iteration also stops once the per-state differences
/// move by less than `tolerance / 1000` in one step; they converge to the
/// per-state optimal gains.
pub fn oracle_average_cost(
    table: &TransitionTable,
    costs: &[f64],
    tolerance: f64,
    max_iterations: usize,
) -> Result<OracleSolution> {
    const LAZY: f64 = 0.5;
    let states = table.states();
    if costs.len() != states {
        return Err(Error::StateSpace(format!("{} costs for {states} states", costs.len())));
    }
    let mut h = vec![0.0; states];
    let mut last = f64::INFINITY;
    let mut prev_diff: Vec<f64> = Vec::new();
    for iteration in 1..=max_iterations {
        let backups: Vec<(f64, usize)> = (0..states)
            .into_par_iter()
            .map(|s| {
                let mut best = (f64::INFINITY, 0);
                for a in 0..table.actions() {
                    let ev: f64 = table.row(s, a).iter().map(|&(t, p)| p * h[t as usize]).sum();
                    if ev < best.0 {
                        best = (ev, a);
                    }
                }
                (costs[s] + LAZY * h[s] + (1.0 - LAZY) * best.0, best.1)
            })
            .collect();
        let diff: Vec<f64> = backups.iter().zip(&h).map(|(&(v, _), &old)| v - old).collect();
        let (lo, hi) = diff
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| (lo.min(d), hi.max(d)));
        last = hi - lo;
        let settled = prev_diff.len() == states
            && diff.iter().zip(&prev_diff).all(|(d, p)| (d - p).abs() <= tolerance / 1000.0);
        if last <= tolerance || settled {
            let policy = backups.iter().map(|&(_, a)| a).collect();
            let (gain, state_gains) = if last <= tolerance {
                let g = (hi + lo) / 2.0;
                (g, vec![g; states])
            } else {
                (diff[0], diff)
            };
            return Ok(OracleSolution {
                gain,
                state_gains,
                policy,
                iterations: iteration,
            });
        }
        prev_diff = diff;
        let anchor = backups[0].0;
        for (slot, &(v, _)) in h.iter_mut().zip(&backups) {
            *slot = v - anchor;
        }
    }
    Err(Error::NotConverged {
        iterations: max_iterations,
        span: last,
        target: tolerance,
    })
}
