use serde::{Deserialize, Serialize};

use super::confidence::ConfidenceParams;
use super::evi::{evi_accuracy, extended_value_iteration, ConfidenceSet, EviResult};
use super::model::{episode_should_stop, MdpModel};
use super::space::{BoxNeighborhood, TruncatedStateSpace};
use crate::control::{Controller, Probe, SlotRecord};
use crate::error::{Error, Result};
use crate::model::{enumerate_node_actions, Network, NetworkEvent, NodeId, QueueState, RoutingAction, Transmission};

/// Product of the per-node choices of every controllable node.
///
/// Action indices are mixed-radix numbers with the lowest-numbered
/// controllable node as the most significant digit, so index 0 idles
/// everyone.
#[derive(Debug, Clone)]
pub struct JointActionSpace {
    nodes: usize,
    choices: Vec<(NodeId, Vec<Option<Transmission>>)>,
    len: usize,
}

impl JointActionSpace {
    pub fn new(net: &Network) -> Result<Self> {
        let topo = net.topology();
        let choices = topo
            .controllable_nodes()
            .map(|i| Ok((i, enumerate_node_actions(topo, i, net.flow_count())?)))
            .collect::<Result<Vec<_>>>()?;
        let len = choices
            .iter()
            .try_fold(1usize, |acc, (_, c)| acc.checked_mul(c.len()))
            .ok_or_else(|| Error::StateSpace("joint action space overflows".into()))?;
        Ok(JointActionSpace {
            nodes: net.node_count(),
            choices,
            len,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn action(&self, index: usize) -> RoutingAction {
        let mut f = RoutingAction::idle(self.nodes);
        let mut rest = index;
        for (node, options) in self.choices.iter().rev() {
            f.set(*node, options[rest % options.len()]);
            rest /= options.len();
        }
        f
    }
}

/// Admission control: drops `[Σ(Q + a) − V + 1]⁺` fresh arrivals, taking
/// them from the lowest (node, flow) entries first.
pub fn drop_packets(q: &QueueState, event: &NetworkEvent, truncation: u32) -> Result<(NetworkEvent, u64)> {
    let total = q.total() + event.total();
    let demand = (total + 1).saturating_sub(u64::from(truncation));
    if demand > event.total() {
        return Err(Error::DropDemand {
            demand,
            available: event.total(),
        });
    }
    let mut admitted = event.clone();
    let mut left = demand;
    for a in admitted.as_mut_slice() {
        if left == 0 {
            break;
        }
        let take = left.min(*a);
        *a -= take;
        left -= take;
    }
    Ok((admitted, demand))
}

fn default_max_iterations() -> usize {
    100_000
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TucrlConfig {
    /// `V`: admitted backlog never exceeds `V − 1`.
    pub truncation: u32,
    #[serde(default = "default_max_iterations")]
    pub max_evi_iterations: usize,
    /// Multiplies the confidence constant.
    #[serde(default = "default_scale")]
    pub confidence_scale: f64,
}

impl TucrlConfig {
    pub fn new(truncation: u32) -> Self {
        TucrlConfig {
            truncation,
            max_evi_iterations: default_max_iterations(),
            confidence_scale: default_scale(),
        }
    }
}

/// One row of the episode log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpisodeRecord {
    pub episode: u64,
    pub start_slot: u64,
    pub visited_pairs: usize,
    pub gain: f64,
    pub iterations: usize,
}

/// Largest number of episodes allowed after `horizon` slots:
/// `1 + |S|·|A|·(log₂ T + 1)`.
pub fn episode_bound(states: usize, actions: usize, horizon: u64) -> f64 {
    1.0 + (states * actions) as f64 * ((horizon.max(1) as f64).log2() + 1.0)
}

/// Optimistic learner over the truncated queue space.
#[derive(Debug, Clone)]
pub struct TucrlAgent {
    net: Network,
    config: TucrlConfig,
    space: TruncatedStateSpace,
    actions: JointActionSpace,
    params: ConfidenceParams,
    costs: Vec<f64>,
    model: MdpModel,
    policy: Vec<usize>,
    log: Vec<EpisodeRecord>,
    slot: u64,
    replan: bool,
    current: Option<(usize, usize)>,
    dropped: u64,
}

impl TucrlAgent {
    pub fn new(net: Network, config: TucrlConfig) -> Result<Self> {
        if !(config.confidence_scale > 0.0) {
            return Err(Error::Config("confidence scale must be positive".into()));
        }
        let space = TruncatedStateSpace::new(&net, config.truncation)?;
        let actions = JointActionSpace::new(&net)?;
        let params = ConfidenceParams::new(net.node_count(), net.topology().bound(), actions.len(), config.truncation)
            .with_scale(config.confidence_scale);
        Ok(TucrlAgent {
            costs: space.costs(),
            model: MdpModel::new(space.len(), actions.len()),
            policy: vec![0; space.len()],
            net,
            config,
            space,
            actions,
            params,
            log: Vec::new(),
            slot: 0,
            replan: true,
            current: None,
            dropped: 0,
        })
    }

    pub fn space(&self) -> &TruncatedStateSpace {
        &self.space
    }

    pub fn actions(&self) -> &JointActionSpace {
        &self.actions
    }

    pub fn model(&self) -> &MdpModel {
        &self.model
    }

    pub fn config(&self) -> &TucrlConfig {
        &self.config
    }

    pub fn confidence(&self) -> &ConfidenceParams {
        &self.params
    }

    pub fn policy(&self) -> &[usize] {
        &self.policy
    }

    pub fn episode_log(&self) -> &[EpisodeRecord] {
        &self.log
    }

    pub fn episodes(&self) -> u64 {
        self.model.episode()
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    /// Episodes so far against [`episode_bound`] for the slots played.
    pub fn within_episode_bound(&self) -> bool {
        self.episodes() as f64 <= episode_bound(self.space.len(), self.actions.len(), self.slot)
    }

    fn plan(&mut self) -> Result<EviResult> {
        self.model.start_episode(self.slot);
        let set = ConfidenceSet::from_model(&self.model, &self.params);
        let neighborhood = BoxNeighborhood::for_network(&self.space, &self.net);
        let accuracy = evi_accuracy(self.slot);
        let result = extended_value_iteration(&set, &self.costs, &neighborhood, accuracy, self.config.max_evi_iterations)?;
        self.policy.clone_from(&result.policy);
        self.log.push(EpisodeRecord {
            episode: self.model.episode(),
            start_slot: self.slot,
            visited_pairs: self.model.visited_pairs(),
            gain: result.gain,
            iterations: result.iterations,
        });
        self.replan = false;
        Ok(result)
    }
}

impl Controller for TucrlAgent {
    fn name(&self) -> &'static str {
        "tucrl"
    }

    fn admit(&mut self, q: &QueueState, event: &NetworkEvent) -> Result<(NetworkEvent, u64)> {
        let (admitted, dropped) = drop_packets(q, event, self.config.truncation)?;
        self.dropped += dropped;
        Ok((admitted, dropped))
    }

    fn decide(&mut self, q: &QueueState, _: &NetworkEvent) -> Result<RoutingAction> {
        let s = self.space.encode(q)?;
        if self.replan {
            self.plan()?;
        }
        let a = self.policy[s];
        self.current = Some((s, a));
        Ok(self.actions.action(a))
    }

    fn observe(&mut self, record: &SlotRecord<'_>) -> Result<()> {
        let (s, a) = self
            .current
            .take()
            .ok_or_else(|| Error::Policy("observe called without a decision".into()))?;
        let next = self.space.encode(&record.outcome.next)?;
        self.model.record(s, a, next);
        self.slot += 1;
        if episode_should_stop(&self.model, s, a) {
            self.replan = true;
        }
        Ok(())
    }

    fn probe(&self) -> Probe {
        Probe {
            episodes: self.episodes(),
            ..Probe::default()
        }
    }

    fn episode_log(&self) -> &[EpisodeRecord] {
        &self.log
    }

    fn within_episode_bound(&self) -> bool {
        TucrlAgent::within_episode_bound(self)
    }
}
