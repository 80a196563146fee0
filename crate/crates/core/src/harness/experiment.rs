use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{self, MetricsSeries, Totals};
use crate::config::NetworkConfig;
use crate::control::{Controller, MaxWeightController, Probe, SlotRecord, TmwController};
use crate::error::{Error, Result};
use crate::model::{step, ArrivalSampler, Network, QueueState, StepOutcome};
use crate::policy::{PolicyKind, PolicySpec, UncontrollablePolicy};
use crate::tucrl::{EpisodeRecord, TucrlAgent, TucrlConfig};

/// Which controller drives the controllable nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "lowercase", deny_unknown_fields)]
pub enum ControllerSpec {
    MaxWeight,
    Tmw,
    Tucrl(TucrlConfig),
}

impl ControllerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ControllerSpec::MaxWeight => "maxweight",
            ControllerSpec::Tmw => "tmw",
            ControllerSpec::Tucrl(_) => "tucrl",
        }
    }

    pub fn build(&self, net: &Network, q0: &QueueState) -> Result<Box<dyn Controller>> {
        Ok(match self {
            ControllerSpec::MaxWeight => Box::new(MaxWeightController::new(net.clone())),
            ControllerSpec::Tmw => Box::new(TmwController::new(net.clone(), q0)),
            ControllerSpec::Tucrl(cfg) => Box::new(TucrlAgent::new(net.clone(), *cfg)?),
        })
    }
}

/// A network, its underlay policy and a controller, advanced one slot at a
/// time.
///
/// Arrivals and the underlay's own randomness come from separate streams of
/// the same seed.
pub struct Simulation {
    net: Network,
    policy: Box<dyn UncontrollablePolicy>,
    controller: Box<dyn Controller>,
    sampler: ArrivalSampler,
    rng: ChaCha8Rng,
    q: QueueState,
    slot: u64,
    totals: Totals,
}

/// What one call to [`Simulation::step`] did.
#[derive(Debug, Clone)]
pub struct SlotReport {
    pub arrivals: u64,
    pub dropped: u64,
    pub outcome: StepOutcome,
}

impl Simulation {
    pub fn new(net: Network, policy: &PolicySpec, controller: &ControllerSpec, seed: u64) -> Result<Self> {
        let q = QueueState::zeros(net.node_count(), net.flow_count());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        Ok(Simulation {
            sampler: ArrivalSampler::for_network(&net)?,
            policy: policy.build(&net, seed)?,
            controller: controller.build(&net, &q)?,
            net,
            rng,
            q,
            slot: 0,
            totals: Totals::default(),
        })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn queues(&self) -> &QueueState {
        &self.q
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn totals(&self) -> Totals {
        self.totals
    }

    pub fn policy_kind(&self) -> PolicyKind {
        self.policy.kind()
    }

    pub fn controller(&self) -> &dyn Controller {
        self.controller.as_ref()
    }

    pub fn probe(&self) -> Probe {
        self.controller.probe()
    }

    pub fn step(&mut self) -> Result<SlotReport> {
        let event = self.sampler.sample(&mut self.rng);
        let (admitted, dropped) = self.controller.admit(&self.q, &event)?;
        let f_u = self.policy.decide(&admitted, &self.q);
        let f_c = self.controller.decide(&self.q, &admitted)?;
        let outcome = step(&self.net, &self.q, &f_c, &f_u, &admitted)?;
        self.controller.observe(&SlotRecord {
            slot: self.slot,
            before: &self.q,
            event: &admitted,
            controllable: &f_c,
            outcome: &outcome,
        })?;
        self.q = outcome.next.clone();
        self.slot += 1;
        self.totals.arrivals += event.total();
        self.totals.dropped += dropped;
        self.totals.delivered += outcome.delivered_total();
        Ok(SlotReport {
            arrivals: event.total(),
            dropped,
            outcome,
        })
    }

    /// Arrivals equal deliveries plus backlog plus drops.
    pub fn conserved(&self) -> bool {
        self.totals.arrivals == self.totals.delivered + self.q.total() + self.totals.dropped
    }
}

fn default_replications() -> u32 {
    1
}

fn default_stride() -> u64 {
    1
}

fn default_warmup() -> f64 {
    0.1
}

/// A complete, serializable description of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub load: f64,
    pub slots: u64,
    pub seed: u64,
    #[serde(default = "default_replications")]
    pub replications: u32,
    /// Sample metrics every `stride` slots.
    #[serde(default = "default_stride")]
    pub stride: u64,
    /// Leading fraction of the run left out of steady-state statistics.
    #[serde(default = "default_warmup")]
    pub warmup_fraction: f64,
    pub controller: ControllerSpec,
    pub network: NetworkConfig,
}

impl ExperimentConfig {
    pub fn new(network: NetworkConfig, controller: ControllerSpec, load: f64, slots: u64, seed: u64) -> Self {
        ExperimentConfig {
            load,
            slots,
            seed,
            replications: default_replications(),
            stride: default_stride(),
            warmup_fraction: default_warmup(),
            controller,
            network,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.load > 0.0) || !self.load.is_finite() {
            return Err(Error::Config(format!("load must be positive, got {}", self.load)));
        }
        if self.slots == 0 {
            return Err(Error::Config("at least one slot is required".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("at least one replication is required".into()));
        }
        if self.stride == 0 {
            return Err(Error::Config("stride must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(Error::Config("warm-up fraction must lie in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config is always serializable")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }
}

/// Scalar results of one replication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub replication: u32,
    pub seed: u64,
    pub slots: u64,
    pub arrivals: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub backlog: u64,
    /// `arrivals == delivered + backlog + dropped`.
    pub conserved: bool,
    pub delivered_fraction: f64,
    pub drop_fraction: f64,
    /// Least-squares slope of the total backlog after the warm-up.
    pub queue_slope: f64,
    /// Mean total backlog after the warm-up.
    pub mean_queue: f64,
    /// Deliveries per slot after the warm-up.
    pub steady_delivery_rate: f64,
    /// `max_ik Q_ik(T) / T`.
    pub max_queue_over_time: f64,
    pub virtual_x: f64,
    pub virtual_y_abs: f64,
    pub bound_violations: u64,
    pub episodes: u64,
    pub episode_bound_ok: bool,
}

/// Everything one replication produced.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub summary: RunSummary,
    pub series: MetricsSeries,
    /// Total backlog after every slot.
    pub total_queue: Vec<u64>,
    /// Packets delivered in every slot.
    pub delivered: Vec<u64>,
    /// Exogenous arrivals in every slot, dropped ones included.
    pub arrivals: Vec<u64>,
    pub episode_log: Vec<EpisodeRecord>,
    pub probe: Probe,
}

impl RunResult {
    /// Deliveries per slot over the trailing `fraction` of the run.
    pub fn tail_delivery_rate(&self, fraction: f64) -> f64 {
        let n = self.delivered.len();
        let start = n - ((n as f64 * fraction).round() as usize).clamp(1, n);
        let tail = &self.delivered[start..];
        tail.iter().sum::<u64>() as f64 / tail.len() as f64
    }

    /// Deliveries over arrivals in the last `fraction` of the slots.
    pub fn tail_delivered_fraction(&self, fraction: f64) -> f64 {
        let n = self.delivered.len();
        let start = n - ((n as f64 * fraction).round() as usize).clamp(1, n);
        ratio(
            self.delivered[start..].iter().sum(),
            self.arrivals[start..].iter().sum(),
        )
    }
}

/// Ordinary least-squares slope of `y` against its index.
pub fn regression_slope(y: &[u64]) -> f64 {
    let n = y.len() as f64;
    if y.len() < 2 {
        return 0.0;
    }
    let mean_x = (n - 1.0) / 2.0;
    let mean_y = y.iter().map(|&v| v as f64).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, &v) in y.iter().enumerate() {
        let dx = x as f64 - mean_x;
        sxy += dx * (v as f64 - mean_y);
        sxx += dx * dx;
    }
    sxy / sxx
}

/// Runs replication `replication` of `cfg` with seed `cfg.seed + replication`.
pub fn run_replication(cfg: &ExperimentConfig, replication: u32) -> Result<RunResult> {
    cfg.validate()?;
    let net = cfg.network.build(cfg.load)?;
    let seed = cfg.seed.wrapping_add(u64::from(replication));
    let mut sim = Simulation::new(net.clone(), &cfg.network.policy, &cfg.controller, seed)?;

    let imagined: Vec<_> = sim.probe().imagined_means.iter().map(|&(key, _)| key).collect();
    let mut series = MetricsSeries::new(metrics::columns(&net, &imagined));
    let mut total_queue = Vec::with_capacity(cfg.slots as usize);
    let mut delivered = Vec::with_capacity(cfg.slots as usize);
    let mut arrivals = Vec::with_capacity(cfg.slots as usize);
    for _ in 0..cfg.slots {
        let report = sim.step()?;
        total_queue.push(sim.queues().total());
        delivered.push(report.outcome.delivered_total());
        arrivals.push(report.arrivals);
        if sim.slot() % cfg.stride == 0 {
            let probe = sim.probe();
            series.rows.push(metrics::row(&net, sim.slot(), sim.queues(), &sim.totals(), &probe));
        }
    }

    let probe = sim.probe();
    let totals = sim.totals();
    let warm = ((cfg.slots as f64 * cfg.warmup_fraction) as usize).min(total_queue.len() - 1);
    let steady_q = &total_queue[warm..];
    let steady_d = &delivered[warm..];
    let max_q = net
        .buffered_queues()
        .into_iter()
        .map(|(i, k)| sim.queues().get(i, k))
        .max()
        .unwrap_or(0);
    let episode_log = sim.controller().episode_log().to_vec();
    let episode_bound_ok = sim.controller().within_episode_bound();
    let summary = RunSummary {
        replication,
        seed,
        slots: cfg.slots,
        arrivals: totals.arrivals,
        delivered: totals.delivered,
        dropped: totals.dropped,
        backlog: sim.queues().total(),
        conserved: sim.conserved(),
        delivered_fraction: ratio(totals.delivered, totals.arrivals),
        drop_fraction: totals.drop_fraction(),
        queue_slope: regression_slope(steady_q),
        mean_queue: steady_q.iter().sum::<u64>() as f64 / steady_q.len() as f64,
        steady_delivery_rate: steady_d.iter().sum::<u64>() as f64 / steady_d.len() as f64,
        max_queue_over_time: max_q as f64 / cfg.slots as f64,
        virtual_x: probe.virtual_x,
        virtual_y_abs: probe.virtual_y_abs,
        bound_violations: probe.bound_violations,
        episodes: probe.episodes,
        episode_bound_ok,
    };
    Ok(RunResult {
        summary,
        series,
        total_queue,
        delivered,
        arrivals,
        episode_log,
        probe,
    })
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// All replications plus their entrywise mean series.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub runs: Vec<RunResult>,
    pub mean: MetricsSeries,
}

/// Runs every replication in parallel; results are in replication order and
/// do not depend on scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let runs = (0..cfg.replications)
        .into_par_iter()
        .map(|r| run_replication(cfg, r))
        .collect::<Result<Vec<_>>>()?;
    let mean = MetricsSeries::mean(&runs.iter().map(|r| r.series.clone()).collect::<Vec<_>>())?;
    Ok(ExperimentResult { runs, mean })
}
