//! Tracking-MaxWeight.
//!
//! Besides choosing what the controllable nodes do, every slot the controller
//! *imagines* an action `g^u` for the uncontrollable nodes. Two virtual queues
//! are driven by these choices:
//!
//! * `X` replays the physical recursion as if the imagined action had been
//!   carried out (offered rates, rectified at zero);
//! * `Y_ijk` accumulates `g_ijk − f̃_ijk`, the gap between the imagined and the
//!   observed transmissions of uncontrollable node `i`.
//!
//! Weights are `W_ijk = X_ik − X_jk − Y_ijk`, so a link that keeps
//! under-delivering what was imagined for it gets penalized.
//!
//! Controllable nodes never offer more than their physical backlog. This keeps
//! `Q_ik ≤ X_ik + Σ_j Y_ijk − Σ_{j∈U} Y_jik` exact at every slot (see
//! [`tracking_gap`]); imagined uncontrollable actions offer full capacity.

use crate::error::{Error, Result};
use crate::model::{FlowId, Network, NetworkEvent, NodeId, QueueState, RoutingAction, Transmission};

/// `X` (one entry per node and flow) and `Y` (one entry per link and flow).
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualQueues {
    flows: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl VirtualQueues {
    /// `X(0) = Q(0)`, `Y(0) = 0`.
    pub fn new(net: &Network, q0: &QueueState) -> Self {
        let flows = net.flow_count();
        let x = q0.as_slice().iter().map(|&v| v as f64).collect();
        VirtualQueues {
            flows,
            x,
            y: vec![0.0; net.topology().links().len() * flows],
        }
    }

    pub fn x(&self, i: NodeId, k: FlowId) -> f64 {
        self.x[i.0 * self.flows + k.0]
    }

    pub fn set_x(&mut self, i: NodeId, k: FlowId, v: f64) {
        self.x[i.0 * self.flows + k.0] = v;
    }

    /// `Y` for the link with index `link` in the topology.
    pub fn y(&self, link: usize, k: FlowId) -> f64 {
        self.y[link * self.flows + k.0]
    }

    pub fn set_y(&mut self, link: usize, k: FlowId, v: f64) {
        self.y[link * self.flows + k.0] = v;
    }

    pub fn total_x(&self) -> f64 {
        self.x.iter().sum()
    }

    pub fn total_abs_y(&self) -> f64 {
        self.y.iter().map(|v| v.abs()).sum()
    }
}

/// Controllable action plus the imagined uncontrollable action.
#[derive(Debug, Clone, PartialEq)]
pub struct TmwDecision {
    pub controllable: RoutingAction,
    pub imagined: RoutingAction,
}

impl TmwDecision {
    /// `g` over all nodes.
    pub fn joint(&self) -> RoutingAction {
        let mut g = self.controllable.clone();
        for (i, t) in self.imagined.iter() {
            g.set(i, Some(*t));
        }
        g
    }
}

/// `W_ijk = X_ik − X_jk − Y_ijk` for link index `link`.
pub fn tmw_weight(net: &Network, vq: &VirtualQueues, link: usize, k: FlowId) -> f64 {
    let l = net.topology().link(link);
    vq.x(l.src, k) - vq.x(l.dst, k) - vq.y(link, k)
}

/// Largest rate node `i` may offer on `link` for flow `k`.
pub fn tmw_rate(net: &Network, q: &QueueState, i: NodeId, link: usize, k: FlowId) -> u32 {
    let cap = net.topology().link(link).capacity;
    if net.topology().is_controllable(i) {
        u64::from(cap).min(q.get(i, k)) as u32
    } else {
        cap
    }
}

/// Maximizes `Σ g_ijk · W_ijk` over the joint action space.
///
/// With one transmission per node the objective separates by node: each node
/// takes the `(j, k)` with the largest `rate · W`, idling if that is not
/// positive, ties to the lowest `(j, k)`.
pub fn tmw_decide(net: &Network, vq: &VirtualQueues, q: &QueueState) -> TmwDecision {
    let topo = net.topology();
    let n = net.node_count();
    let mut controllable = RoutingAction::idle(n);
    let mut imagined = RoutingAction::idle(n);
    for i in topo.nodes() {
        let mut best: (f64, Option<Transmission>) = (0.0, None);
        for &l in topo.outgoing(i) {
            let to = topo.link(l).dst;
            for k in net.flow_ids() {
                let rate = tmw_rate(net, q, i, l, k);
                let v = f64::from(rate) * tmw_weight(net, vq, l, k);
                if v > best.0 {
                    best = (v, Some(Transmission::new(to, k, rate)));
                }
            }
        }
        if topo.is_controllable(i) {
            controllable.set(i, best.1);
        } else {
            imagined.set(i, best.1);
        }
    }
    TmwDecision {
        controllable,
        imagined,
    }
}

/// `Σ g_ijk · W_ijk` for an arbitrary joint action.
pub fn tmw_objective(net: &Network, vq: &VirtualQueues, g: &RoutingAction) -> f64 {
    g.iter()
        .map(|(i, t)| {
            let l = net.topology().link_index(i, t.to).expect("action uses a missing link");
            f64::from(t.rate) * tmw_weight(net, vq, l, t.flow)
        })
        .sum()
}

/// Advances both virtual queues by one slot.
///
/// `actual_u` holds the observed transmissions `f̃` of the uncontrollable
/// nodes; entries for controllable nodes are rejected. `event` carries the
/// arrivals that entered the network.
pub fn tmw_update(
    net: &Network,
    vq: &mut VirtualQueues,
    decision: &TmwDecision,
    actual_u: &RoutingAction,
    event: &NetworkEvent,
) -> Result<()> {
    let topo = net.topology();
    if let Some((i, _)) = actual_u.iter().find(|(i, _)| topo.is_controllable(*i)) {
        return Err(Error::WrongPartition { node: i });
    }
    let g = decision.joint();
    let kf = net.flow_count();

    let mut delta = vec![0.0; topo.node_count() * kf];
    for (i, t) in g.iter() {
        let r = f64::from(t.rate);
        delta[i.0 * kf + t.flow.0] -= r;
        delta[t.to.0 * kf + t.flow.0] += r;
    }
    for i in topo.nodes() {
        for k in net.flow_ids() {
            let x = if net.is_destination(i, k) {
                0.0
            } else {
                (vq.x(i, k) + event.arrivals(i, k) as f64 + delta[i.0 * kf + k.0]).max(0.0)
            };
            vq.set_x(i, k, x);
        }
    }

    for i in topo.uncontrollable_nodes() {
        for &l in topo.outgoing(i) {
            let j = topo.link(l).dst;
            for k in net.flow_ids() {
                let d = f64::from(g.rate(i, j, k)) - f64::from(actual_u.rate(i, j, k));
                if d != 0.0 {
                    vq.set_y(l, k, vq.y(l, k) + d);
                }
            }
        }
    }
    Ok(())
}

/// Smallest slack of `Q_ik ≤ X_ik + Σ_j Y_ijk − Σ_{j∈U} Y_jik` over all
/// buffered queues. Nonnegative whenever the bound holds.
pub fn tracking_gap(net: &Network, vq: &VirtualQueues, q: &QueueState) -> f64 {
    let topo = net.topology();
    let kf = net.flow_count();
    let mut rhs: Vec<f64> = (0..topo.node_count() * kf)
        .map(|idx| vq.x(NodeId(idx / kf), FlowId(idx % kf)))
        .collect();
    for (l, link) in topo.links().iter().enumerate() {
        if topo.is_controllable(link.src) {
            continue;
        }
        for k in net.flow_ids() {
            let y = vq.y(l, k);
            rhs[link.src.0 * kf + k.0] += y;
            rhs[link.dst.0 * kf + k.0] -= y;
        }
    }
    net.buffered_queues()
        .into_iter()
        .map(|(i, k)| rhs[i.0 * kf + k.0] - q.get(i, k) as f64)
        .fold(f64::INFINITY, f64::min)
}
