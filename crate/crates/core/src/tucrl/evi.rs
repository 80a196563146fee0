//! Extended value iteration over an L1 confidence set.

use rayon::prelude::*;

use super::confidence::ConfidenceParams;
use super::model::MdpModel;
use super::space::Neighborhood;
use crate::error::{Error, Result};

/// Minimizes `Σ p(s')·w(s')` over distributions within L1 distance `d` of
/// `p_hat`, every state being reachable.
///
/// Up to `d/2` extra mass goes to the state with the smallest `w`; the
/// surplus is then taken from the states with the largest `w` first.
pub fn optimistic_distribution(p_hat: &[f64], d: f64, w: &[f64]) -> Result<Vec<f64>> {
    let best = super::space::argmin(w);
    let support: Vec<(u32, f64)> = p_hat
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(s, &p)| (s as u32, p))
        .collect();
    let sparse = optimistic_sparse(&support, d, best, w)?;
    let mut p = vec![0.0; p_hat.len()];
    for (s, m) in sparse {
        p[s as usize] = m;
    }
    Ok(p)
}

/// Sparse form of [`optimistic_distribution`]: `support` lists the nonzero
/// entries of `p_hat` in increasing state order and `best` is the reachable
/// state with the smallest value.
pub fn optimistic_sparse(support: &[(u32, f64)], d: f64, best: usize, w: &[f64]) -> Result<Vec<(u32, f64)>> {
    let total: f64 = support.iter().map(|&(_, p)| p).sum();
    if total == 0.0 {
        if d < 2.0 {
            return Err(Error::EmptyEstimate { radius: d });
        }
        return Ok(vec![(best as u32, 1.0)]);
    }
    let mut p: Vec<(u32, f64)> = support.to_vec();
    let pos = match p.binary_search_by_key(&(best as u32), |&(s, _)| s) {
        Ok(pos) => pos,
        Err(pos) => {
            p.insert(pos, (best as u32, 0.0));
            pos
        }
    };
    p[pos].1 = (p[pos].1 + d / 2.0).min(1.0);

    let mut order: Vec<usize> = (0..p.len()).filter(|&i| i != pos).collect();
    order.sort_by(|&a, &b| {
        w[p[b].0 as usize]
            .total_cmp(&w[p[a].0 as usize])
            .then(p[a].0.cmp(&p[b].0))
    });
    let mut excess: f64 = p.iter().map(|&(_, m)| m).sum::<f64>() - 1.0;
    for i in order {
        if excess <= 0.0 {
            break;
        }
        let take = excess.min(p[i].1);
        p[i].1 -= take;
        excess -= take;
    }
    p.retain(|&(_, m)| m > 0.0);
    Ok(p)
}

/// Empirical distribution and L1 radius of one state-action pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceEntry {
    pub estimate: Vec<(u32, f64)>,
    pub radius: f64,
}

/// The plausible transition laws: one L1 ball per state-action pair.
#[derive(Debug, Clone)]
pub struct ConfidenceSet {
    states: usize,
    actions: usize,
    entries: Vec<ConfidenceEntry>,
}

impl ConfidenceSet {
    /// `entries[s * actions + a]` describes `(s, a)`.
    pub fn new(states: usize, actions: usize, entries: Vec<ConfidenceEntry>) -> Result<Self> {
        if entries.len() != states * actions {
            return Err(Error::StateSpace(format!(
                "{} entries for {states} states and {actions} actions",
                entries.len()
            )));
        }
        for e in &entries {
            if e.estimate.iter().any(|&(s, _)| s as usize >= states) {
                return Err(Error::StateSpace("estimate points outside the state space".into()));
            }
        }
        Ok(ConfidenceSet {
            states,
            actions,
            entries,
        })
    }

    pub fn from_model(model: &MdpModel, params: &ConfidenceParams) -> Self {
        let entries = (0..model.states())
            .flat_map(|s| (0..model.actions()).map(move |a| (s, a)))
            .map(|(s, a)| ConfidenceEntry {
                estimate: model.estimate_sparse(s, a),
                radius: params.radius(model.visits(s, a), model.episode_start()),
            })
            .collect();
        ConfidenceSet {
            states: model.states(),
            actions: model.actions(),
            entries,
        }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn entry(&self, s: usize, a: usize) -> &ConfidenceEntry {
        &self.entries[s * self.actions + a]
    }
}

/// Output of one planning round.
#[derive(Debug, Clone, PartialEq)]
pub struct EviResult {
    pub policy: Vec<usize>,
    /// Optimistic average cost per slot.
    pub gain: f64,
    /// Relative values, smallest entry zero.
    pub values: Vec<f64>,
    pub iterations: usize,
}

/// Stopping accuracy `1/sqrt(max(1, t))` for an episode starting at slot `t`.
pub fn evi_accuracy(episode_start: u64) -> f64 {
    1.0 / (episode_start.max(1) as f64).sqrt()
}

fn span(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Value iteration where each backup also picks the most favourable law in
/// the confidence set.
///
/// Starts from `w = 0` and stops once the span of `w_{j+1} − w_j` is at most
/// `accuracy`. The policy is greedy with respect to the last backup (lowest
/// action index on ties) and the gain is the midpoint of the last difference
/// vector.
pub fn extended_value_iteration(
    set: &ConfidenceSet,
    costs: &[f64],
    neighborhood: &dyn Neighborhood,
    accuracy: f64,
    max_iterations: usize,
) -> Result<EviResult> {
    let states = set.states();
    if costs.len() != states {
        return Err(Error::StateSpace(format!("{} costs for {states} states", costs.len())));
    }
    let mut w = vec![0.0; states];
    let mut last_span = f64::INFINITY;
    for iteration in 1..=max_iterations {
        let best = neighborhood.reachable_argmin(&w);
        let backups: Vec<(f64, usize)> = (0..states)
            .into_par_iter()
            .map(|s| -> Result<(f64, usize)> {
                let mut chosen = (f64::INFINITY, 0);
                for a in 0..set.actions() {
                    let e = set.entry(s, a);
                    let p = optimistic_sparse(&e.estimate, e.radius, best[s], &w)?;
                    let v: f64 = p.iter().map(|&(t, m)| m * w[t as usize]).sum();
                    if v < chosen.0 {
                        chosen = (v, a);
                    }
                }
                Ok((costs[s] + chosen.0, chosen.1))
            })
            .collect::<Result<_>>()?;

        let diff: Vec<f64> = backups.iter().zip(&w).map(|(&(v, _), &old)| v - old).collect();
        let (lo, hi) = span(&diff);
        last_span = hi - lo;
        let (vmin, _) = span(&backups.iter().map(|&(v, _)| v).collect::<Vec<_>>());
        if last_span <= accuracy {
            return Ok(EviResult {
                policy: backups.iter().map(|&(_, a)| a).collect(),
                gain: ((hi + lo) / 2.0).max(0.0),
                values: backups.iter().map(|&(v, _)| v - vmin).collect(),
                iterations: iteration,
            });
        }
        // values only matter up to a constant
        for (slot, &(v, _)) in w.iter_mut().zip(&backups) {
            *slot = v - vmin;
        }
    }
    Err(Error::NotConverged {
        iterations: max_iterations,
        span: last_span,
        target: accuracy,
    })
}
