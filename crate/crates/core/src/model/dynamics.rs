use super::action::{RoutingAction, Transmission};
use super::network::Network;
use super::state::{NetworkEvent, QueueState};
use super::topology::{FlowId, NodeId};
use crate::error::{Error, Result};

/// Result of advancing the network by one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next: QueueState,
    /// Packets actually moved, `f̃`, for controllable and uncontrollable nodes.
    pub actual: RoutingAction,
    /// Packets that reached their destination this slot, per flow.
    pub delivered: Vec<u64>,
}

impl StepOutcome {
    pub fn delivered_total(&self) -> u64 {
        self.delivered.iter().sum()
    }
}

/// Merges the controllable and uncontrollable halves of an action, checking
/// each half only covers its own side of the partition.
pub fn combine_actions(
    net: &Network,
    f_c: &RoutingAction,
    f_u: &RoutingAction,
) -> Result<RoutingAction> {
    let topo = net.topology();
    f_c.validate(topo, net.flow_count())?;
    f_u.validate(topo, net.flow_count())?;
    let mut f = f_c.clone();
    for (i, t) in f_u.iter() {
        if f_c.get(i).is_some() {
            return Err(Error::OverlappingActions(i));
        }
        if topo.is_controllable(i) {
            return Err(Error::WrongPartition { node: i });
        }
        f.set(i, Some(*t));
    }
    for (i, _) in f_c.iter() {
        if !topo.is_controllable(i) {
            return Err(Error::WrongPartition { node: i });
        }
    }
    Ok(f)
}

/// One slot of the queue recursion
/// `Q(t+1) = Q(t) + a(t) + Σ_j f̃_jik − Σ_j f̃_ijk`.
///
/// Transmissions draw on the beginning-of-slot backlog, so packets that
/// arrive in a slot wait for the next one. The exception is a
/// [`relay`](Transmission::relay) transmission: such a node may also forward
/// what reached it earlier in the same slot. Relays are resolved after all
/// other nodes, in increasing node order. Packets landing on their
/// destination are counted as delivered and leave the system.
pub fn step(
    net: &Network,
    q: &QueueState,
    f_c: &RoutingAction,
    f_u: &RoutingAction,
    event: &NetworkEvent,
) -> Result<StepOutcome> {
    let f = combine_actions(net, f_c, f_u)?;
    Ok(apply(net, q, &f, event))
}

/// [`step`] on an already-combined action. The caller guarantees feasibility.
pub(crate) fn apply(
    net: &Network,
    q: &QueueState,
    f: &RoutingAction,
    event: &NetworkEvent,
) -> StepOutcome {
    let n = net.node_count();
    let kf = net.flow_count();
    let mut actual = RoutingAction::idle(n);
    let mut inflow = vec![0u64; n * kf];

    fn send(actual: &mut RoutingAction, inflow: &mut [u64], kf: usize, i: NodeId, t: &Transmission, avail: u64) {
        let moved = u64::from(t.rate).min(avail);
        inflow[t.to.0 * kf + t.flow.0] += moved;
        actual.set(i, Some(Transmission { rate: moved as u32, ..*t }));
    }

    for (i, t) in f.iter().filter(|(_, t)| !t.relay) {
        send(&mut actual, &mut inflow, kf, i, t, q.get(i, t.flow));
    }
    for (i, t) in f.iter().filter(|(_, t)| t.relay) {
        let avail = q.get(i, t.flow) + inflow[i.0 * kf + t.flow.0];
        send(&mut actual, &mut inflow, kf, i, t, avail);
    }

    let mut next = q.clone();
    let mut delivered = vec![0u64; kf];
    for i in net.topology().nodes() {
        for k in net.flow_ids() {
            let out = u64::from(actual.rate_from(i, k));
            let before = q.get(i, k);
            let value = before + event.arrivals(i, k) + inflow[i.0 * kf + k.0] - out;
            if net.is_destination(i, k) {
                delivered[k.0] += value;
                next.set(i, k, 0);
            } else {
                next.set(i, k, value);
            }
        }
    }
    StepOutcome {
        next,
        actual,
        delivered,
    }
}

impl RoutingAction {
    /// Total offered by `i` for flow `k` over all its links.
    pub fn rate_from(&self, i: NodeId, k: FlowId) -> u32 {
        match self.get(i) {
            Some(t) if t.flow == k => t.rate,
            _ => 0,
        }
    }
}
