use crate::model::{Network, QueueState, RoutingAction, Transmission};

/// Backpressure for the controllable nodes.
///
/// Each controllable node independently picks the `(j, k)` maximizing
/// `capacity(i, j) · (Q_ik − Q_jk)`, offering full capacity. It idles when no
/// weight is positive. Ties go to the lowest `(j, k)`.
pub fn maxweight_decide(net: &Network, q: &QueueState) -> RoutingAction {
    let topo = net.topology();
    let mut f = RoutingAction::idle(net.node_count());
    for i in topo.controllable_nodes() {
        let mut best: (i128, Option<Transmission>) = (0, None);
        for &l in topo.outgoing(i) {
            let link = topo.link(l);
            for k in net.flow_ids() {
                let diff = i128::from(q.get(i, k)) - i128::from(q.get(link.dst, k));
                let w = i128::from(link.capacity) * diff;
                if w > best.0 {
                    best = (w, Some(Transmission::new(link.dst, k, link.capacity)));
                }
            }
        }
        f.set(i, best.1);
    }
    f
}
