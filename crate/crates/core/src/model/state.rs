use super::topology::{FlowId, NodeId};

/// Backlog `Q_ik` of flow `k` at node `i`, stored row-major by node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QueueState {
    flows: usize,
    q: Vec<u64>,
}

impl QueueState {
    pub fn zeros(nodes: usize, flows: usize) -> Self {
        QueueState {
            flows,
            q: vec![0; nodes * flows],
        }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Self {
        let flows = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == flows), "ragged queue matrix");
        QueueState {
            flows,
            q: rows.concat(),
        }
    }

    pub fn nodes(&self) -> usize {
        if self.flows == 0 {
            0
        } else {
            self.q.len() / self.flows
        }
    }

    pub fn flows(&self) -> usize {
        self.flows
    }

    pub fn get(&self, i: NodeId, k: FlowId) -> u64 {
        self.q[i.0 * self.flows + k.0]
    }

    pub fn set(&mut self, i: NodeId, k: FlowId, value: u64) {
        self.q[i.0 * self.flows + k.0] = value;
    }

    pub fn total(&self) -> u64 {
        self.q.iter().sum()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.q
    }
}

/// What happened in one slot outside the operator's control: exogenous
/// arrivals `a_ik(t)`. Link capacities are fixed, so they are not part of it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkEvent {
    flows: usize,
    arrivals: Vec<u64>,
}

impl NetworkEvent {
    pub fn none(nodes: usize, flows: usize) -> Self {
        NetworkEvent {
            flows,
            arrivals: vec![0; nodes * flows],
        }
    }

    pub fn arrivals(&self, i: NodeId, k: FlowId) -> u64 {
        self.arrivals[i.0 * self.flows + k.0]
    }

    pub fn set_arrivals(&mut self, i: NodeId, k: FlowId, count: u64) {
        self.arrivals[i.0 * self.flows + k.0] = count;
    }

    pub fn total(&self) -> u64 {
        self.arrivals.iter().sum()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.arrivals
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [u64] {
        &mut self.arrivals
    }
}
