//! Controllers for the nodes the operator owns.
//!
//! Every controller implements [`Controller`]. The harness calls
//! [`Controller::admit`], then [`Controller::decide`], steps the network, and
//! reports the slot back through [`Controller::observe`].

mod maxweight;
mod tmw;

pub use maxweight::maxweight_decide;
pub use tmw::{
    tmw_decide, tmw_objective, tmw_rate, tmw_update, tmw_weight, tracking_gap, TmwDecision,
    VirtualQueues,
};

use crate::error::Result;
use crate::tucrl::EpisodeRecord;
use crate::model::{FlowId, Network, NetworkEvent, NodeId, QueueState, RoutingAction, StepOutcome};

/// Everything that happened in one slot, as seen by a controller.
#[derive(Debug, Clone, Copy)]
pub struct SlotRecord<'a> {
    pub slot: u64,
    pub before: &'a QueueState,
    /// Arrivals after admission control.
    pub event: &'a NetworkEvent,
    pub controllable: &'a RoutingAction,
    pub outcome: &'a StepOutcome,
}

/// Internal quantities exposed for metrics. Fields a controller does not track
/// stay at their defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Probe {
    pub virtual_x: f64,
    pub virtual_y_abs: f64,
    /// Running mean of the imagined rate per `(i, j, k)` of an uncontrollable
    /// node `i`.
    pub imagined_means: Vec<((NodeId, NodeId, FlowId), f64)>,
    pub bound_violations: u64,
    pub episodes: u64,
}

pub trait Controller: Send {
    fn name(&self) -> &'static str;

    /// Admission control. Returns the admitted arrivals and how many packets
    /// were dropped. The default admits everything.
    fn admit(&mut self, _q: &QueueState, event: &NetworkEvent) -> Result<(NetworkEvent, u64)> {
        Ok((event.clone(), 0))
    }

    /// Action for the controllable nodes in the current slot.
    fn decide(&mut self, q: &QueueState, event: &NetworkEvent) -> Result<RoutingAction>;

    fn observe(&mut self, _record: &SlotRecord<'_>) -> Result<()> {
        Ok(())
    }

    fn probe(&self) -> Probe {
        Probe::default()
    }

    /// Planning episodes so far, for learning controllers.
    fn episode_log(&self) -> &[EpisodeRecord] {
        &[]
    }

    /// Whether the episode count respects its logarithmic bound.
    fn within_episode_bound(&self) -> bool {
        true
    }
}

/// Backpressure on the physical queues.
#[derive(Debug, Clone)]
pub struct MaxWeightController {
    net: Network,
}

impl MaxWeightController {
    pub fn new(net: Network) -> Self {
        MaxWeightController { net }
    }
}

impl Controller for MaxWeightController {
    fn name(&self) -> &'static str {
        "maxweight"
    }

    fn decide(&mut self, q: &QueueState, _: &NetworkEvent) -> Result<RoutingAction> {
        Ok(maxweight_decide(&self.net, q))
    }
}

/// Tracking-MaxWeight with its virtual queues and bookkeeping.
#[derive(Debug, Clone)]
pub struct TmwController {
    net: Network,
    vq: VirtualQueues,
    pending: Option<TmwDecision>,
    /// `(node, link index, flow)` for every uncontrollable link and flow.
    tracked: Vec<(NodeId, usize, FlowId)>,
    imagined_sums: Vec<f64>,
    slots: u64,
    violations: u64,
}

impl TmwController {
    /// Starts with `X(0) = Q(0)` and `Y(0) = 0`.
    pub fn new(net: Network, q0: &QueueState) -> Self {
        let topo = net.topology();
        let mut tracked = Vec::new();
        for i in topo.uncontrollable_nodes() {
            for &l in topo.outgoing(i) {
                for k in net.flow_ids() {
                    tracked.push((i, l, k));
                }
            }
        }
        let vq = VirtualQueues::new(&net, q0);
        TmwController {
            imagined_sums: vec![0.0; tracked.len()],
            net,
            vq,
            pending: None,
            tracked,
            slots: 0,
            violations: 0,
        }
    }

    pub fn virtual_queues(&self) -> &VirtualQueues {
        &self.vq
    }

    pub fn violations(&self) -> u64 {
        self.violations
    }

    /// Running mean of the imagined rate on `i → j` for flow `k`.
    pub fn imagined_mean(&self, i: NodeId, j: NodeId, k: FlowId) -> Option<f64> {
        let l = self.net.topology().link_index(i, j)?;
        let idx = self.tracked.iter().position(|&(n, ll, kk)| n == i && ll == l && kk == k)?;
        Some(if self.slots == 0 {
            0.0
        } else {
            self.imagined_sums[idx] / self.slots as f64
        })
    }
}

impl Controller for TmwController {
    fn name(&self) -> &'static str {
        "tmw"
    }

    fn decide(&mut self, q: &QueueState, _: &NetworkEvent) -> Result<RoutingAction> {
        let d = tmw_decide(&self.net, &self.vq, q);
        let f = d.controllable.clone();
        self.pending = Some(d);
        Ok(f)
    }

    fn observe(&mut self, record: &SlotRecord<'_>) -> Result<()> {
        let topo = self.net.topology();
        let decision = match self.pending.take() {
            Some(d) => d,
            None => tmw_decide(&self.net, &self.vq, record.before),
        };
        let mut actual_u = RoutingAction::idle(self.net.node_count());
        for i in topo.uncontrollable_nodes() {
            actual_u.set(i, record.outcome.actual.get(i).copied());
        }
        tmw_update(&self.net, &mut self.vq, &decision, &actual_u, record.event)?;

        for (sum, &(i, l, k)) in self.imagined_sums.iter_mut().zip(&self.tracked) {
            *sum += f64::from(decision.imagined.rate(i, topo.link(l).dst, k));
        }
        self.slots += 1;

        let gap = tracking_gap(&self.net, &self.vq, &record.outcome.next);
        if gap < -1e-9 {
            self.violations += 1;
        }
        debug_assert!(gap >= -1e-9, "tracking bound violated at slot {}: {gap}", record.slot);
        Ok(())
    }

    fn probe(&self) -> Probe {
        let topo = self.net.topology();
        let imagined_means = self
            .tracked
            .iter()
            .zip(&self.imagined_sums)
            .map(|(&(i, l, k), s)| {
                let mean = if self.slots == 0 { 0.0 } else { s / self.slots as f64 };
                ((i, topo.link(l).dst, k), mean)
            })
            .collect();
        Probe {
            virtual_x: self.vq.total_x(),
            virtual_y_abs: self.vq.total_abs_y(),
            imagined_means,
            bound_violations: self.violations,
            episodes: 0,
        }
    }
}
