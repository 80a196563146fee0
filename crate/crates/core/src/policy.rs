//! Behaviour of the nodes the operator does not control.
//!
//! Two families exist. An [`PolicyKind::OmegaOnly`] rule looks only at the
//! current slot's randomness and never at queue lengths (static routes,
//! randomized splitting). A [`PolicyKind::QueueDependent`] rule may react to
//! the backlog vector.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FlowId, Network, NetworkEvent, NodeId, QueueState, RoutingAction, Transmission};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    OmegaOnly,
    QueueDependent,
}

pub trait UncontrollablePolicy: Send + Sync {
    fn kind(&self) -> PolicyKind;

    /// Offered action for the uncontrollable nodes this slot. Randomized rules
    /// draw from the policy's own stream.
    fn decide(&mut self, event: &NetworkEvent, q: &QueueState) -> RoutingAction;

    /// Exact distribution of [`decide`](Self::decide) given `q`, as
    /// `(probability, action)` pairs. Used to build ground-truth models.
    fn outcomes(&self, q: &QueueState) -> Vec<(f64, RoutingAction)>;
}

/// Leaves every uncontrollable node idle.
#[derive(Debug, Clone)]
pub struct IdlePolicy {
    nodes: usize,
}

impl IdlePolicy {
    pub fn new(nodes: usize) -> Self {
        IdlePolicy { nodes }
    }
}

impl UncontrollablePolicy for IdlePolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::OmegaOnly
    }

    fn decide(&mut self, _: &NetworkEvent, _: &QueueState) -> RoutingAction {
        RoutingAction::idle(self.nodes)
    }

    fn outcomes(&self, _: &QueueState) -> Vec<(f64, RoutingAction)> {
        vec![(1.0, RoutingAction::idle(self.nodes))]
    }
}

/// One uncontrollable node's randomized rule: each slot, pick at most one
/// transmission with the given probabilities (idle with the remainder).
#[derive(Debug, Clone, PartialEq)]
pub struct SplitRule {
    pub node: NodeId,
    pub choices: Vec<(Transmission, f64)>,
}

/// Queue-agnostic randomized routing/scheduling at a set of uncontrollable
/// nodes. Choices are resampled every slot, independently per node.
#[derive(Debug, Clone)]
pub struct RandomSplit {
    nodes: usize,
    rules: Vec<SplitRule>,
    rng: ChaCha8Rng,
}

impl RandomSplit {
    pub fn new(net: &Network, rules: Vec<SplitRule>, rng: ChaCha8Rng) -> Result<Self> {
        let topo = net.topology();
        let mut seen = vec![false; net.node_count()];
        for rule in &rules {
            if !topo.contains(rule.node) {
                return Err(Error::UnknownNode(rule.node));
            }
            if topo.is_controllable(rule.node) {
                return Err(Error::Policy(format!("node {} is controllable", rule.node)));
            }
            if std::mem::replace(&mut seen[rule.node.0], true) {
                return Err(Error::Policy(format!("node {} has two rules", rule.node)));
            }
            let mut total = 0.0;
            for (t, p) in &rule.choices {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::Policy(format!("probability {p} outside [0, 1]")));
                }
                total += p;
                let mut probe = RoutingAction::idle(net.node_count());
                probe.set(rule.node, Some(*t));
                probe.validate(topo, net.flow_count())?;
            }
            if total > 1.0 + 1e-9 {
                return Err(Error::Policy(format!(
                    "probabilities at node {} sum to {total}",
                    rule.node
                )));
            }
        }
        Ok(RandomSplit {
            nodes: net.node_count(),
            rules,
            rng,
        })
    }

    pub fn rules(&self) -> &[SplitRule] {
        &self.rules
    }
}

impl UncontrollablePolicy for RandomSplit {
    fn kind(&self) -> PolicyKind {
        PolicyKind::OmegaOnly
    }

    fn decide(&mut self, _: &NetworkEvent, _: &QueueState) -> RoutingAction {
        let mut f = RoutingAction::idle(self.nodes);
        for rule in &self.rules {
            let u: f64 = self.rng.random();
            let mut acc = 0.0;
            for (t, p) in &rule.choices {
                acc += p;
                if u < acc {
                    f.set(rule.node, Some(*t));
                    break;
                }
            }
        }
        f
    }

    fn outcomes(&self, _: &QueueState) -> Vec<(f64, RoutingAction)> {
        let mut out = vec![(1.0, RoutingAction::idle(self.nodes))];
        for rule in &self.rules {
            let idle = 1.0 - rule.choices.iter().map(|c| c.1).sum::<f64>();
            let mut next = Vec::new();
            for (p, f) in &out {
                if idle > 1e-15 {
                    next.push((p * idle, f.clone()));
                }
                for (t, q) in &rule.choices {
                    if *q > 0.0 {
                        let mut g = f.clone();
                        g.set(rule.node, Some(*t));
                        next.push((p * q, g));
                    }
                }
            }
            out = next;
        }
        out
    }
}

fn full_rate(net: &Network, from: usize, to: usize, flow: usize, relay: bool) -> Result<Transmission> {
    let (i, j) = (NodeId::from_label(from), NodeId::from_label(to));
    let rate = net
        .topology()
        .capacity(i, j)
        .ok_or_else(|| Error::Policy(format!("missing link {from}->{to}")))?;
    Ok(Transmission {
        to: j,
        flow: FlowId::from_label(flow),
        rate,
        relay,
    })
}

/// The counterexample underlay: node 2 forwards everything it receives to
/// node 3 at full rate, node 3 holds every packet.
pub fn fig2_policy(net: &Network, rng: ChaCha8Rng) -> Result<RandomSplit> {
    let rules = vec![SplitRule {
        node: NodeId::from_label(2),
        choices: vec![(full_rate(net, 2, 3, 1, true)?, 1.0)],
    }];
    RandomSplit::new(net, rules, rng)
}

/// Node 2 relays flow 1 to node 3 or node 5 with equal probability; node 3
/// serves flow 1 or flow 2 towards node 4 with equal probability.
pub fn scenario1_policy(net: &Network, rng: ChaCha8Rng) -> Result<RandomSplit> {
    let rules = vec![
        SplitRule {
            node: NodeId::from_label(2),
            choices: vec![
                (full_rate(net, 2, 3, 1, true)?, 0.5),
                (full_rate(net, 2, 5, 1, true)?, 0.5),
            ],
        },
        SplitRule {
            node: NodeId::from_label(3),
            choices: vec![
                (full_rate(net, 3, 4, 1, false)?, 0.5),
                (full_rate(net, 3, 4, 2, false)?, 0.5),
            ],
        },
    ];
    RandomSplit::new(net, rules, rng)
}

/// Queue-dependent underlay with a single throughput-optimal region.
///
/// With `Q₂`, `Q₃` the backlogs at the two relays, the service rates
/// `(μ₂, μ₃)` towards the destination are `(0.5, 0)` while `Q₃ ≤ θ`,
/// `(0, 1)` while `Q₂ ≤ θ < Q₃` and `(0.25, 0.25)` otherwise. Cases are
/// checked in that order. A fractional rate `μ` is realized by offering the
/// link's capacity with probability `μ`.
#[derive(Debug, Clone)]
pub struct ThresholdPolicy {
    nodes: usize,
    flow: FlowId,
    first: (NodeId, Transmission),
    second: (NodeId, Transmission),
    threshold: u64,
    rng: ChaCha8Rng,
}

impl ThresholdPolicy {
    pub fn new(net: &Network, threshold: u64, rng: ChaCha8Rng) -> Result<Self> {
        for n in [2, 3] {
            if net.topology().is_controllable(NodeId::from_label(n)) {
                return Err(Error::Policy(format!("node {n} must be uncontrollable")));
            }
        }
        Ok(ThresholdPolicy {
            nodes: net.node_count(),
            flow: FlowId(0),
            first: (NodeId::from_label(2), full_rate(net, 2, 4, 1, false)?),
            second: (NodeId::from_label(3), full_rate(net, 3, 4, 1, false)?),
            threshold,
            rng,
        })
    }

    pub fn service_rates(&self, q: &QueueState) -> (f64, f64) {
        let q2 = q.get(self.first.0, self.flow);
        let q3 = q.get(self.second.0, self.flow);
        if q3 <= self.threshold {
            (0.5, 0.0)
        } else if q2 <= self.threshold {
            (0.0, 1.0)
        } else {
            (0.25, 0.25)
        }
    }
}

impl UncontrollablePolicy for ThresholdPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::QueueDependent
    }

    fn decide(&mut self, _: &NetworkEvent, q: &QueueState) -> RoutingAction {
        let (m2, m3) = self.service_rates(q);
        let mut f = RoutingAction::idle(self.nodes);
        for ((node, t), mu) in [(self.first, m2), (self.second, m3)] {
            let u: f64 = self.rng.random();
            if u < mu {
                f.set(node, Some(t));
            }
        }
        f
    }

    fn outcomes(&self, q: &QueueState) -> Vec<(f64, RoutingAction)> {
        let (m2, m3) = self.service_rates(q);
        let mut out = Vec::with_capacity(4);
        for (on2, p2) in [(false, 1.0 - m2), (true, m2)] {
            for (on3, p3) in [(false, 1.0 - m3), (true, m3)] {
                if p2 * p3 > 0.0 {
                    let mut f = RoutingAction::idle(self.nodes);
                    if on2 {
                        f.set(self.first.0, Some(self.first.1));
                    }
                    if on3 {
                        f.set(self.second.0, Some(self.second.1));
                    }
                    out.push((p2 * p3, f));
                }
            }
        }
        out
    }
}

/// Policy selection as written in config files (node and flow ids one-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PolicySpec {
    Idle,
    Fig2,
    Scenario1,
    Scenario2 {
        #[serde(default = "default_threshold")]
        threshold: u64,
    },
    RandomSplit {
        rules: Vec<SplitRuleSpec>,
    },
}

fn default_threshold() -> u64 {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitRuleSpec {
    pub node: usize,
    /// Forward same-slot arrivals as well as the standing backlog.
    #[serde(default)]
    pub relay: bool,
    pub options: Vec<SplitOptionSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitOptionSpec {
    pub to: usize,
    #[serde(default = "first_flow")]
    pub flow: usize,
    pub prob: f64,
}

fn first_flow() -> usize {
    1
}

impl PolicySpec {
    pub fn build(&self, net: &Network, seed: u64) -> Result<Box<dyn UncontrollablePolicy>> {
        let rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(match self {
            PolicySpec::Idle => Box::new(IdlePolicy::new(net.node_count())),
            PolicySpec::Fig2 => Box::new(fig2_policy(net, rng)?),
            PolicySpec::Scenario1 => Box::new(scenario1_policy(net, rng)?),
            PolicySpec::Scenario2 { threshold } => Box::new(ThresholdPolicy::new(net, *threshold, rng)?),
            PolicySpec::RandomSplit { rules } => {
                let rules = rules
                    .iter()
                    .map(|r| {
                        if r.node == 0 {
                            return Err(Error::Policy("node ids are one-based".into()));
                        }
                        let choices = r
                            .options
                            .iter()
                            .map(|o| {
                                if o.to == 0 || o.flow == 0 {
                                    return Err(Error::Policy("ids are one-based".into()));
                                }
                                Ok((full_rate(net, r.node, o.to, o.flow, r.relay)?, o.prob))
                            })
                            .collect::<Result<_>>()?;
                        Ok(SplitRule {
                            node: NodeId::from_label(r.node),
                            choices,
                        })
                    })
                    .collect::<Result<_>>()?;
                Box::new(RandomSplit::new(net, rules, rng)?)
            }
        })
    }
}
