use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pcnet::config::NetworkConfig;
use pcnet::harness::{build_scenario, run_replication, scenario_config, ControllerSpec, ExperimentConfig};
use pcnet::model::{step, ArrivalSampler, FlowId, NetworkEvent, NodeId, QueueState};
use pcnet::tucrl::{
    drop_packets, episode_bound, exact_transition_table, extended_value_iteration, oracle_average_cost,
    ConfidenceEntry, ConfidenceSet, JointActionSpace, MdpModel, TruncatedStateSpace, TucrlConfig, Unrestricted,
    ORACLE_TOLERANCE,
};

proptest! {
    #[test]
    fn counts_stay_consistent(
        states in 1usize..20,
        actions in 1usize..4,
        events in prop::collection::vec((any::<u32>(), any::<u32>(), any::<u32>(), any::<bool>()), 0..300),
    ) {
        let mut model = MdpModel::new(states, actions);
        let mut cumulative = vec![0u64; states * actions];
        let mut current = vec![0u64; states * actions];
        let mut slot = 0;
        for (s, a, next, new_episode) in events {
            if new_episode {
                model.start_episode(slot);
                for (c, v) in cumulative.iter_mut().zip(current.iter_mut()) {
                    *c += std::mem::take(v);
                }
            }
            let (s, a, next) = (s as usize % states, a as usize % actions, next as usize % states);
            model.record(s, a, next);
            current[s * actions + a] += 1;
            slot += 1;
            prop_assert!(model.is_consistent());
        }
        for s in 0..states {
            for a in 0..actions {
                prop_assert_eq!(model.visits(s, a), cumulative[s * actions + a]);
                prop_assert_eq!(model.episode_visits(s, a), current[s * actions + a]);
                let counted: u64 = model.transition_counts(s, a).iter().map(|&(_, c)| c).sum();
                prop_assert_eq!(counted, model.visits(s, a));
                let p: f64 = model.estimate_sparse(s, a).iter().map(|&(_, m)| m).sum();
                prop_assert!(model.visits(s, a) == 0 || (p - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn admission_keeps_the_state_truncated(
        state_seed in any::<u64>(),
        truncation in 1u32..40,
        arrivals in 0u64..=1,
    ) {
        let net = build_scenario("scenario2", 0.95).unwrap().network;
        let space = TruncatedStateSpace::new(&net, truncation).unwrap();
        let s = (state_seed % space.len() as u64) as usize;
        let q = space.decode(s);
        prop_assert_eq!(space.encode(&q).unwrap(), s);
        let mut event = NetworkEvent::none(4, 1);
        event.set_arrivals(NodeId(0), FlowId(0), arrivals);
        let (admitted, dropped) = drop_packets(&q, &event, truncation).unwrap();
        let demand = (q.total() + arrivals).saturating_sub(u64::from(truncation) - 1);
        prop_assert_eq!(dropped, demand);
        prop_assert_eq!(admitted.total() + dropped, arrivals);
        prop_assert!(q.total() + admitted.total() < u64::from(truncation));
    }

    #[test]
    fn learner_never_leaves_the_truncated_space(seed in any::<u64>(), truncation in 2u32..12) {
        let mut cfg = ExperimentConfig::new(
            scenario_config("scenario2").unwrap(),
            ControllerSpec::Tucrl(TucrlConfig::new(truncation)),
            0.95,
            300,
            seed,
        );
        cfg.stride = 1;
        let run = run_replication(&cfg, 0).unwrap();
        prop_assert!(run.total_queue.iter().all(|&q| q < u64::from(truncation)));
        prop_assert!(run.summary.conserved);
        prop_assert!(run.summary.episode_bound_ok);
    }
}

/// One queue served at one packet per slot or left idle, with Bernoulli(1/2)
/// arrivals. Serving always keeps `Q(t+1) = a(t)`, so the optimal average
/// backlog is exactly 1/2.
const SERVE_OR_IDLE: &str = r#"
nodes = 2
bound = 1

[[links]]
from = 1
to = 2
capacity = 1

[[flows]]
source = 1
destination = 2
rate = 0.5
burst = 1

[policy]
kind = "idle"
"#;

#[test]
fn oracle_matches_simulation_on_serve_or_idle() {
    let cfg = NetworkConfig::from_toml(SERVE_OR_IDLE).unwrap();
    let net = cfg.build(1.0).unwrap();
    let policy = cfg.policy.build(&net, 0).unwrap();
    let space = TruncatedStateSpace::new(&net, 10).unwrap();
    let actions = JointActionSpace::new(&net).unwrap();
    let table = exact_transition_table(&net, policy.as_ref(), &space, &actions).unwrap();
    let sol = oracle_average_cost(&table, &space.costs(), ORACLE_TOLERANCE, 1_000_000).unwrap();
    assert!((sol.gain - 0.5).abs() < 1e-6, "{}", sol.gain);

    let sampler = ArrivalSampler::for_network(&net).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut q = QueueState::zeros(2, 1);
    let slots = 200_000;
    let mut backlog = 0u64;
    for _ in 0..slots {
        backlog += q.total();
        let (event, _) = drop_packets(&q, &sampler.sample(&mut rng), 10).unwrap();
        let f_c = actions.action(sol.policy[space.encode(&q).unwrap()]);
        let f_u = pcnet::model::RoutingAction::idle(2);
        q = step(&net, &q, &f_c, &f_u, &event).unwrap().next;
    }
    let simulated = backlog as f64 / slots as f64;
    assert!((simulated - sol.gain).abs() <= 0.01 * sol.gain, "{simulated} vs {}", sol.gain);
}

#[test]
fn scenario2_oracle_holds_the_good_region() {
    let cfg = scenario_config("scenario2").unwrap();
    let net = cfg.build(0.95).unwrap();
    let underlay = cfg.policy.build(&net, 0).unwrap();
    let space = TruncatedStateSpace::new(&net, 30).unwrap();
    let actions = JointActionSpace::new(&net).unwrap();
    let table = exact_transition_table(&net, underlay.as_ref(), &space, &actions).unwrap();
    let sol = oracle_average_cost(&table, &space.costs(), ORACLE_TOLERANCE, 1_000_000).unwrap();
    assert!(sol.gain.is_finite() && sol.gain > 0.0 && sol.gain < 29.0);

    let mut policy = cfg.policy.build(&net, 1).unwrap();
    let sampler = ArrivalSampler::for_network(&net).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut q = QueueState::zeros(4, 1);
    let (n2, n3, k) = (NodeId::from_label(2), NodeId::from_label(3), FlowId(0));
    let slots = 100_000;
    let (mut inside, mut counted, mut arrived, mut delivered) = (0u32, 0u32, 0u64, 0u64);
    for t in 0..slots {
        let raw = sampler.sample(&mut rng);
        let (event, _) = drop_packets(&q, &raw, 30).unwrap();
        let f_u = policy.decide(&event, &q);
        let f_c = actions.action(sol.policy[space.encode(&q).unwrap()]);
        let out = step(&net, &q, &f_c, &f_u, &event).unwrap();
        q = out.next;
        if t >= slots / 10 {
            counted += 1;
            inside += u32::from(q.get(n2, k) <= 10 && q.get(n3, k) > 10);
            arrived += raw.total();
            delivered += out.delivered.iter().sum::<u64>();
        }
    }
    assert!(f64::from(inside) / f64::from(counted) > 0.9);
    assert!(delivered as f64 / arrived as f64 > 0.99);
}

#[test]
fn planning_with_the_true_model_recovers_the_oracle_gain() {
    let cfg = scenario_config("scenario2").unwrap();
    let net = cfg.build(0.95).unwrap();
    let underlay = cfg.policy.build(&net, 0).unwrap();
    let space = TruncatedStateSpace::new(&net, 20).unwrap();
    let actions = JointActionSpace::new(&net).unwrap();
    let table = exact_transition_table(&net, underlay.as_ref(), &space, &actions).unwrap();
    let costs = space.costs();
    let oracle = oracle_average_cost(&table, &costs, ORACLE_TOLERANCE, 1_000_000).unwrap();
    let entries = (0..space.len())
        .flat_map(|s| (0..actions.len()).map(move |a| (s, a)))
        .map(|(s, a)| ConfidenceEntry {
            estimate: table.row(s, a).to_vec(),
            radius: 0.0,
        })
        .collect();
    let set = ConfidenceSet::new(space.len(), actions.len(), entries).unwrap();
    let evi = extended_value_iteration(&set, &costs, &Unrestricted, 1e-6, 1_000_000).unwrap();
    assert!((evi.gain - oracle.gain).abs() < 1e-5, "{} {}", evi.gain, oracle.gain);
}

#[test]
fn planning_is_independent_of_the_thread_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (states, actions) = (300, 3);
    let entries: Vec<ConfidenceEntry> = (0..states * actions)
        .map(|_| {
            let mut support: Vec<(u32, f64)> = (0..4).map(|_| (rng.random_range(0..states as u32), 1.0)).collect();
            support.sort_by_key(|&(s, _)| s);
            support.dedup_by_key(|(s, _)| *s);
            let n = support.len() as f64;
            support.iter_mut().for_each(|(_, p)| *p = 1.0 / n);
            ConfidenceEntry {
                estimate: support,
                radius: rng.random_range(0.0..0.5),
            }
        })
        .collect();
    let costs: Vec<f64> = (0..states).map(|_| rng.random_range(0.0..5.0)).collect();
    let set = ConfidenceSet::new(states, actions, entries).unwrap();
    let solve = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| extended_value_iteration(&set, &costs, &Unrestricted, 1e-4, 100_000).unwrap())
    };
    assert_eq!(solve(1), solve(4));
}

#[test]
fn episode_log_is_ordered_and_bounded() {
    let mut cfg = ExperimentConfig::new(
        scenario_config("scenario2").unwrap(),
        ControllerSpec::Tucrl(TucrlConfig::new(8)),
        0.95,
        5_000,
        3,
    );
    cfg.stride = 5_000;
    let run = run_replication(&cfg, 0).unwrap();
    let log = &run.episode_log;
    assert!(!log.is_empty());
    assert_eq!(log[0].start_slot, 0);
    for (n, e) in log.iter().enumerate() {
        assert_eq!(e.episode, n as u64 + 1);
        assert!(e.gain >= 0.0);
    }
    assert!(log.windows(2).all(|w| w[0].start_slot < w[1].start_slot && w[0].visited_pairs <= w[1].visited_pairs));
    let space = TruncatedStateSpace::new(&cfg.network.build(0.95).unwrap(), 8).unwrap();
    assert!(log.len() as f64 <= episode_bound(space.len(), 3, 5_000));
    assert_eq!(run.summary.episodes, log.len() as u64);
}
