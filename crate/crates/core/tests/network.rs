use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pcnet::harness::build_scenario;
use pcnet::model::{
    enumerate_node_actions, step, ArrivalSampler, FlowId, FlowSpec, Link, Network, NetworkEvent, NodeId, QueueState,
    RoutingAction, Topology, Transmission,
};
use pcnet::policy::fig2_policy;
use pcnet::policy::UncontrollablePolicy;

#[derive(Debug, Clone)]
struct Instance {
    net: Network,
    q: QueueState,
    event: NetworkEvent,
    f_c: RoutingAction,
    f_u: RoutingAction,
}

/// Random network, state, arrivals and per-node actions drawn from the
/// feasible choices. Uncontrollable nodes may relay when `relays` is set.
fn instance(relays: bool) -> impl Strategy<Value = Instance> {
    (2usize..=5, 1usize..=2, 1u32..=6, any::<u64>()).prop_map(move |(nodes, flows, bound, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut links = Vec::new();
        for s in 0..nodes {
            for d in 0..nodes {
                if s != d && rng.random_bool(0.5) {
                    links.push(Link {
                        src: NodeId(s),
                        dst: NodeId(d),
                        capacity: rng.random_range(0..=bound),
                    });
                }
            }
        }
        let uncontrollable: Vec<NodeId> = (0..nodes).filter(|_| rng.random_bool(0.4)).map(NodeId).collect();
        let topo = Topology::new(nodes, links, &uncontrollable, bound).unwrap();
        let specs: Vec<FlowSpec> = (0..flows)
            .map(|_| {
                let src = rng.random_range(0..nodes);
                let dst = (src + rng.random_range(1..nodes)) % nodes;
                FlowSpec::new(NodeId(src), NodeId(dst), 0.0, bound)
            })
            .collect();
        let net = Network::new(topo, specs.clone()).unwrap();
        let mut q = QueueState::zeros(nodes, flows);
        for (i, k) in net.buffered_queues() {
            q.set(i, k, rng.random_range(0..12));
        }
        let mut event = NetworkEvent::none(nodes, flows);
        for (k, f) in specs.iter().enumerate() {
            event.set_arrivals(f.source, FlowId(k), rng.random_range(0..=u64::from(bound)));
        }
        let mut f_c = RoutingAction::idle(nodes);
        let mut f_u = RoutingAction::idle(nodes);
        for i in net.topology().nodes() {
            let options = enumerate_node_actions(net.topology(), i, flows).unwrap();
            let mut pick = options[rng.random_range(0..options.len())];
            if net.topology().is_controllable(i) {
                f_c.set(i, pick);
            } else {
                if let Some(t) = pick.as_mut() {
                    t.relay = relays && rng.random_bool(0.5);
                }
                f_u.set(i, pick);
            }
        }
        Instance { net, q, event, f_c, f_u }
    })
}

/// The queue recursion written out directly, for actions without relays.
fn recursion(inst: &Instance) -> (Vec<u64>, u64) {
    let n = inst.net.node_count();
    let kf = inst.net.flow_count();
    let mut next: Vec<i64> = inst.q.as_slice().iter().map(|&v| v as i64).collect();
    for i in 0..n {
        for k in 0..kf {
            next[i * kf + k] += inst.event.arrivals(NodeId(i), FlowId(k)) as i64;
        }
    }
    let mut delivered = 0;
    for f in [&inst.f_c, &inst.f_u] {
        for (i, t) in f.iter() {
            let moved = u64::from(t.rate).min(inst.q.get(i, t.flow));
            next[i.0 * kf + t.flow.0] -= moved as i64;
            if inst.net.is_destination(t.to, t.flow) {
                delivered += moved;
            } else {
                next[t.to.0 * kf + t.flow.0] += moved as i64;
            }
        }
    }
    for (i, row) in next.chunks(kf).enumerate() {
        for (k, v) in row.iter().enumerate() {
            assert!(*v >= 0 || inst.net.is_destination(NodeId(i), FlowId(k)));
        }
    }
    (next.into_iter().map(|v| v.max(0) as u64).collect(), delivered)
}

proptest! {
    #[test]
    fn step_follows_the_recursion(inst in instance(false)) {
        let out = step(&inst.net, &inst.q, &inst.f_c, &inst.f_u, &inst.event).unwrap();
        let (expected, delivered) = recursion(&inst);
        prop_assert_eq!(out.next.as_slice(), expected.as_slice());
        prop_assert_eq!(out.delivered_total(), delivered);
    }

    #[test]
    fn step_conserves_packets(inst in instance(true)) {
        let out = step(&inst.net, &inst.q, &inst.f_c, &inst.f_u, &inst.event).unwrap();
        prop_assert_eq!(inst.q.total() + inst.event.total(), out.next.total() + out.delivered_total());
        let n = inst.net.node_count() as i64;
        let bound = i64::from(inst.net.topology().bound());
        for (i, k) in inst.net.buffered_queues() {
            let change = out.next.get(i, k) as i64 - inst.q.get(i, k) as i64;
            prop_assert!(change.abs() <= (n + 1) * bound);
        }
        for k in inst.net.flow_ids() {
            let d = inst.net.flow(k).destination;
            prop_assert_eq!(out.next.get(d, k), 0);
        }
        for (i, t) in out.actual.iter() {
            let offered = inst.f_c.get(i).or(inst.f_u.get(i)).unwrap();
            prop_assert!(t.rate <= offered.rate);
        }
    }

    #[test]
    fn sampling_is_reproducible(seed in any::<u64>()) {
        let net = build_scenario("scenario1", 0.7).unwrap().network;
        let sampler = ArrivalSampler::for_network(&net).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20).map(|_| sampler.sample(&mut rng)).collect::<Vec<_>>()
        };
        let a = draw(seed);
        prop_assert_eq!(&a, &draw(seed));
        for e in &a {
            for k in net.flow_ids() {
                let f = net.flow(k);
                prop_assert!(e.arrivals(f.source, k) <= u64::from(f.burst));
            }
        }
    }
}

#[test]
fn sampler_mean_matches_the_rate() {
    let net = Network::new(
        Topology::new(2, [Link { src: NodeId(0), dst: NodeId(1), capacity: 40 }], &[], 40).unwrap(),
        vec![FlowSpec::new(NodeId(0), NodeId(1), 20.0, 40)],
    )
    .unwrap();
    let sampler = ArrivalSampler::for_network(&net).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let total: u64 = (0..100_000).map(|_| sampler.sample(&mut rng).total()).sum();
    assert!((total as f64 / 1e5 - 20.0).abs() < 0.2);
}

#[test]
fn fig2_relay_keeps_node_two_empty() {
    let s = build_scenario("fig2", 1.0).unwrap();
    let net = s.network;
    let mut policy = fig2_policy(&net, ChaCha8Rng::seed_from_u64(0)).unwrap();
    let sampler = ArrivalSampler::for_network(&net).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (n1, n2, n3, n4) = (NodeId(0), NodeId(1), NodeId(2), NodeId(3));
    let k = FlowId(0);
    let mut q = QueueState::zeros(net.node_count(), 1);
    for t in 0..500u64 {
        let event = sampler.sample(&mut rng);
        assert_eq!(event.total(), 20);
        let f_u = policy.decide(&event, &q);
        // node 1 always pushes to node 2, as backpressure would with node 2 empty
        let mut f_c = RoutingAction::idle(net.node_count());
        f_c.set(n1, Some(Transmission::new(n2, k, 20)));
        let out = step(&net, &q, &f_c, &f_u, &event).unwrap();
        assert_eq!(out.delivered_total(), 0);
        q = out.next;
        assert_eq!(q.get(n2, k), 0);
        assert_eq!(q.get(n3, k), 20 * t);
        assert_eq!(q.get(n4, k), 0);
    }
}
