use super::state::QueueState;
use super::topology::{FlowId, NodeId, Topology};
use crate::error::{Error, Result};

/// One node's transmission in a slot: offer `rate` packets of `flow` to `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Transmission {
    pub to: NodeId,
    pub flow: FlowId,
    pub rate: u32,
    /// The sender may forward packets it receives within the same slot.
    /// Only meaningful for uncontrollable relays; controllers never set it.
    pub relay: bool,
}

impl Transmission {
    pub fn new(to: NodeId, flow: FlowId, rate: u32) -> Self {
        Transmission {
            to,
            flow,
            rate,
            relay: false,
        }
    }
}

/// Offered rates `f_ijk` for one slot.
///
/// Each node sends to at most one neighbour and serves at most one flow per
/// slot, so the action is stored as one optional [`Transmission`] per node.
/// That makes the scheduling constraint hold by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RoutingAction {
    per_node: Vec<Option<Transmission>>,
}

impl RoutingAction {
    pub fn idle(nodes: usize) -> Self {
        RoutingAction {
            per_node: vec![None; nodes],
        }
    }

    pub fn node_count(&self) -> usize {
        self.per_node.len()
    }

    pub fn get(&self, node: NodeId) -> Option<&Transmission> {
        self.per_node[node.0].as_ref()
    }

    pub fn set(&mut self, node: NodeId, tx: Option<Transmission>) {
        self.per_node[node.0] = tx;
    }

    /// Nodes with a transmission, in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &Transmission)> {
        self.per_node
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.as_ref().map(|t| (NodeId(i), t)))
    }

    /// `f_ijk`, zero for every pair the action does not mention.
    pub fn rate(&self, i: NodeId, j: NodeId, k: FlowId) -> u32 {
        match self.get(i) {
            Some(t) if t.to == j && t.flow == k => t.rate,
            _ => 0,
        }
    }

    /// Checks links exist and rates fit their capacities.
    pub fn validate(&self, topology: &Topology, flows: usize) -> Result<()> {
        if self.per_node.len() != topology.node_count() {
            return Err(Error::Config(format!(
                "action covers {} nodes, topology has {}",
                self.per_node.len(),
                topology.node_count()
            )));
        }
        for (i, t) in self.iter() {
            let bad = |reason: String| Error::InfeasibleAction { node: i, reason };
            if t.flow.0 >= flows {
                return Err(bad(format!("unknown flow {}", t.flow)));
            }
            let cap = topology
                .capacity(i, t.to)
                .ok_or_else(|| bad(format!("no link to {}", t.to)))?;
            if t.rate > cap {
                return Err(bad(format!("rate {} exceeds capacity {cap}", t.rate)));
            }
        }
        Ok(())
    }
}

/// The choices open to `node` in one slot: idle, or one `(outgoing link,
/// flow)` pair at the link's full capacity.
///
/// Order is deterministic: idle first, then by destination, then by flow.
pub fn enumerate_node_actions(
    topology: &Topology,
    node: NodeId,
    flows: usize,
) -> Result<Vec<Option<Transmission>>> {
    if !topology.contains(node) {
        return Err(Error::UnknownNode(node));
    }
    let mut out = vec![None];
    for &l in topology.outgoing(node) {
        let link = topology.link(l);
        for k in 0..flows {
            out.push(Some(Transmission::new(link.dst, FlowId(k), link.capacity)));
        }
    }
    Ok(out)
}

/// `f̃_ijk = min(f_ijk, Q_ik)`: what leaves each node given its
/// beginning-of-slot backlog.
pub fn actual_transmissions(q: &QueueState, f: &RoutingAction) -> RoutingAction {
    let mut out = f.clone();
    for slot in out.per_node.iter_mut().enumerate() {
        if let (i, Some(t)) = slot {
            let avail = q.get(NodeId(i), t.flow);
            t.rate = u64::from(t.rate).min(avail) as u32;
        }
    }
    out
}
