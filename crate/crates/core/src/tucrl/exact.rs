use std::collections::BTreeMap;

use rayon::prelude::*;

use super::agent::{drop_packets, JointActionSpace};
use super::oracle::TransitionTable;
use super::space::TruncatedStateSpace;
use crate::error::Result;
use crate::model::{apply, arrival_pmf, combine_actions, Network, NetworkEvent};
use crate::policy::UncontrollablePolicy;

/// Every arrival vector with its probability.
fn arrival_outcomes(net: &Network) -> Vec<(f64, NetworkEvent)> {
    let mut out = vec![(1.0, NetworkEvent::none(net.node_count(), net.flow_count()))];
    for k in net.flow_ids() {
        let flow = net.flow(k);
        let pmf = arrival_pmf(flow);
        out = out
            .into_iter()
            .flat_map(|(p, e)| {
                pmf.iter().filter(|&&(_, q)| q > 0.0).map(move |&(n, q)| {
                    let mut e = e.clone();
                    e.set_arrivals(flow.source, k, n);
                    (p * q, e)
                })
            })
            .collect();
    }
    out
}

/// Transition law of the truncated system under `policy` for every state
/// and joint controllable action, admission control included.
///
/// Only usable when the uncontrollable behaviour is known, as in tests and
/// the oracle subcommand.
pub fn exact_transition_table(
    net: &Network,
    policy: &dyn UncontrollablePolicy,
    space: &TruncatedStateSpace,
    actions: &JointActionSpace,
) -> Result<TransitionTable> {
    let arrivals = arrival_outcomes(net);
    let controllable: Vec<_> = (0..actions.len()).map(|a| actions.action(a)).collect();
    let rows = (0..space.len())
        .into_par_iter()
        .map(|s| -> Result<Vec<Vec<(u32, f64)>>> {
            let q = space.decode(s);
            let uncontrollable = policy.outcomes(&q);
            let mut per_action = Vec::with_capacity(controllable.len());
            for f_c in &controllable {
                let mut row: BTreeMap<u32, f64> = BTreeMap::new();
                for (pu, f_u) in &uncontrollable {
                    let f = combine_actions(net, f_c, f_u)?;
                    for (pa, event) in &arrivals {
                        let (admitted, _) = drop_packets(&q, event, space.truncation())?;
                        let next = apply(net, &q, &f, &admitted).next;
                        *row.entry(space.encode(&next)? as u32).or_default() += pu * pa;
                    }
                }
                per_action.push(row.into_iter().collect());
            }
            Ok(per_action)
        })
        .collect::<Result<Vec<_>>>()?;
    TransitionTable::new(space.len(), actions.len(), rows.into_iter().flatten().collect())
}
