use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Zero-based node index. Displayed (and written in config files) one-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub usize);

impl NodeId {
    /// Node from its one-based label, as used in configs and figures.
    pub const fn from_label(label: usize) -> Self {
        NodeId(label - 1)
    }

    pub const fn label(self) -> usize {
        self.0 + 1
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Zero-based flow (commodity) index. Displayed one-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlowId(pub usize);

impl FlowId {
    pub const fn from_label(label: usize) -> Self {
        FlowId(label - 1)
    }

    pub const fn label(self) -> usize {
        self.0 + 1
    }
}

impl fmt::Display for FlowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub src: NodeId,
    pub dst: NodeId,
    /// Packets per slot.
    pub capacity: u32,
}

/// Directed graph with integer link capacities and a controllable /
/// uncontrollable node partition.
///
/// Links are stored in `(src, dst)` order, so iterating `outgoing(i)` visits
/// neighbours by increasing id. Every routing rule that breaks ties "by lowest
/// index" relies on this.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    node_count: usize,
    links: Vec<Link>,
    outgoing: Vec<Vec<usize>>,
    controllable: Vec<bool>,
    bound: u32,
}

impl Topology {
    /// `bound` is the global per-slot limit `D` on arrivals and offered rates.
    pub fn new(
        node_count: usize,
        links: impl IntoIterator<Item = Link>,
        uncontrollable: &[NodeId],
        bound: u32,
    ) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::Topology("network needs at least one node".into()));
        }
        let mut links: Vec<Link> = links.into_iter().collect();
        links.sort_by_key(|l| (l.src, l.dst));
        for l in &links {
            for n in [l.src, l.dst] {
                if n.0 >= node_count {
                    return Err(Error::UnknownNode(n));
                }
            }
            if l.src == l.dst {
                return Err(Error::Topology(format!("self-loop at node {}", l.src)));
            }
            if l.capacity > bound {
                return Err(Error::Topology(format!(
                    "link {}->{} capacity {} exceeds bound D = {bound}",
                    l.src, l.dst, l.capacity
                )));
            }
        }
        if let Some(w) = links.windows(2).find(|w| (w[0].src, w[0].dst) == (w[1].src, w[1].dst)) {
            return Err(Error::Topology(format!("duplicate link {}->{}", w[0].src, w[0].dst)));
        }

        let mut controllable = vec![true; node_count];
        for &u in uncontrollable {
            if u.0 >= node_count {
                return Err(Error::UnknownNode(u));
            }
            if !controllable[u.0] {
                return Err(Error::Topology(format!("node {u} listed twice as uncontrollable")));
            }
            controllable[u.0] = false;
        }

        let mut outgoing = vec![Vec::new(); node_count];
        for (idx, l) in links.iter().enumerate() {
            outgoing[l.src.0].push(idx);
        }
        Ok(Topology {
            node_count,
            links,
            outgoing,
            controllable,
            bound,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count).map(NodeId)
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, idx: usize) -> &Link {
        &self.links[idx]
    }

    /// Indices into [`links`](Self::links) of the links leaving `node`.
    pub fn outgoing(&self, node: NodeId) -> &[usize] {
        &self.outgoing[node.0]
    }

    pub fn link_index(&self, src: NodeId, dst: NodeId) -> Option<usize> {
        self.links
            .binary_search_by_key(&(src, dst), |l| (l.src, l.dst))
            .ok()
    }

    pub fn capacity(&self, src: NodeId, dst: NodeId) -> Option<u32> {
        self.link_index(src, dst).map(|i| self.links[i].capacity)
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.0 < self.node_count
    }

    pub fn is_controllable(&self, node: NodeId) -> bool {
        self.controllable[node.0]
    }

    pub fn controllable_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().filter(|&n| self.controllable[n.0])
    }

    pub fn uncontrollable_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().filter(|&n| !self.controllable[n.0])
    }
}
