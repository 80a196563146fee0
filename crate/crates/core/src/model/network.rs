use serde::{Deserialize, Serialize};

use super::topology::{FlowId, NodeId, Topology};
use crate::error::{Error, Result};

/// A commodity entering at `source` and leaving at `destination`.
///
/// Arrivals per slot are `Binomial(burst, rate / burst)`: the mean is `rate`
/// and realizations never exceed `burst` (itself at most the network bound `D`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub source: NodeId,
    pub destination: NodeId,
    pub rate: f64,
    pub burst: u32,
}

impl FlowSpec {
    pub fn new(source: NodeId, destination: NodeId, rate: f64, burst: u32) -> Self {
        FlowSpec {
            source,
            destination,
            rate,
            burst,
        }
    }
}

/// Topology plus the flows routed over it.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    topology: Topology,
    flows: Vec<FlowSpec>,
}

impl Network {
    pub fn new(topology: Topology, flows: Vec<FlowSpec>) -> Result<Self> {
        for (k, f) in flows.iter().enumerate() {
            let err = |reason: String| Error::Flow {
                flow: k + 1,
                reason,
            };
            for n in [f.source, f.destination] {
                if !topology.contains(n) {
                    return Err(Error::UnknownNode(n));
                }
            }
            if f.source == f.destination {
                return Err(err("source equals destination".into()));
            }
            if !(f.rate.is_finite() && f.rate >= 0.0) {
                return Err(err(format!("rate {} is not a nonnegative number", f.rate)));
            }
            if f.burst > topology.bound() {
                return Err(err(format!(
                    "burst {} exceeds bound D = {}",
                    f.burst,
                    topology.bound()
                )));
            }
            if f.rate > f64::from(f.burst) {
                return Err(err(format!("rate {} exceeds burst {}", f.rate, f.burst)));
            }
        }
        Ok(Network { topology, flows })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn flows(&self) -> &[FlowSpec] {
        &self.flows
    }

    pub fn flow(&self, k: FlowId) -> &FlowSpec {
        &self.flows[k.0]
    }

    pub fn node_count(&self) -> usize {
        self.topology.node_count()
    }

    pub fn flow_count(&self) -> usize {
        self.flows.len()
    }

    pub fn flow_ids(&self) -> impl Iterator<Item = FlowId> {
        (0..self.flows.len()).map(FlowId)
    }

    /// Packets of flow `k` reaching `node` are delivered, not buffered.
    pub fn is_destination(&self, node: NodeId, k: FlowId) -> bool {
        self.flows[k.0].destination == node
    }

    /// Every `(node, flow)` pair that can hold a backlog, in row-major order.
    pub fn buffered_queues(&self) -> Vec<(NodeId, FlowId)> {
        self.topology
            .nodes()
            .flat_map(|i| self.flow_ids().map(move |k| (i, k)))
            .filter(|&(i, k)| !self.is_destination(i, k))
            .collect()
    }

    /// Same network with every flow rate replaced.
    pub fn with_rates(&self, rates: &[f64]) -> Result<Self> {
        let flows = self
            .flows
            .iter()
            .zip(rates)
            .map(|(f, &rate)| FlowSpec { rate, ..f.clone() })
            .collect();
        Network::new(self.topology.clone(), flows)
    }
}
