use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::network::{FlowSpec, Network};
use super::state::NetworkEvent;
use super::topology::FlowId;
use crate::error::{Error, Result};

/// I.i.d. per-slot exogenous arrivals, `Binomial(burst, rate / burst)` per flow.
#[derive(Debug, Clone)]
pub struct ArrivalSampler {
    nodes: usize,
    flows: Vec<(usize, Option<Binomial>)>,
}

impl ArrivalSampler {
    pub fn new(nodes: usize, flows: &[FlowSpec]) -> Result<Self> {
        let flows = flows
            .iter()
            .enumerate()
            .map(|(k, f)| {
                if f.rate > f64::from(f.burst) || f.rate < 0.0 {
                    return Err(Error::Flow {
                        flow: k + 1,
                        reason: format!("rate {} outside [0, {}]", f.rate, f.burst),
                    });
                }
                let dist = if f.burst == 0 || f.rate == 0.0 {
                    None
                } else {
                    let p = (f.rate / f64::from(f.burst)).min(1.0);
                    Some(Binomial::new(u64::from(f.burst), p).map_err(|e| Error::Flow {
                        flow: k + 1,
                        reason: e.to_string(),
                    })?)
                };
                Ok((f.source.0, dist))
            })
            .collect::<Result<_>>()?;
        Ok(ArrivalSampler { nodes, flows })
    }

    pub fn for_network(net: &Network) -> Result<Self> {
        Self::new(net.node_count(), net.flows())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> NetworkEvent {
        let mut ev = NetworkEvent::none(self.nodes, self.flows.len());
        for (k, (src, dist)) in self.flows.iter().enumerate() {
            if let Some(d) = dist {
                ev.set_arrivals(super::NodeId(*src), FlowId(k), d.sample(rng));
            }
        }
        ev
    }
}

/// Draws one slot of arrivals for `flows`.
pub fn sample_arrivals<R: Rng + ?Sized>(
    nodes: usize,
    flows: &[FlowSpec],
    rng: &mut R,
) -> Result<NetworkEvent> {
    Ok(ArrivalSampler::new(nodes, flows)?.sample(rng))
}

/// Exact per-flow arrival distribution: `(count, probability)` pairs with
/// nonzero mass.
pub fn arrival_pmf(flow: &FlowSpec) -> Vec<(u64, f64)> {
    let n = u64::from(flow.burst);
    if n == 0 || flow.rate == 0.0 {
        return vec![(0, 1.0)];
    }
    let p = (flow.rate / f64::from(flow.burst)).min(1.0);
    if p >= 1.0 {
        return vec![(n, 1.0)];
    }
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut coeff = 1.0_f64;
    for x in 0..=n {
        if x > 0 {
            coeff *= (n - x + 1) as f64 / x as f64;
        }
        let mass = coeff * p.powi(x as i32) * (1.0 - p).powi((n - x) as i32);
        if mass > 0.0 {
            out.push((x, mass));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NodeId;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn flow(rate: f64, burst: u32) -> FlowSpec {
        FlowSpec::new(NodeId(0), NodeId(1), rate, burst)
    }

    #[test]
    fn degenerate_rates() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let zero = ArrivalSampler::new(2, &[flow(0.0, 40)]).unwrap();
        let full = ArrivalSampler::new(2, &[flow(40.0, 40)]).unwrap();
        for _ in 0..100 {
            assert_eq!(zero.sample(&mut rng).total(), 0);
            assert_eq!(full.sample(&mut rng).arrivals(NodeId(0), FlowId(0)), 40);
        }
    }

    #[test]
    fn mean_matches_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = ArrivalSampler::new(2, &[flow(20.0, 40)]).unwrap();
        let slots = 100_000;
        let mut sum = 0u64;
        for _ in 0..slots {
            let a = s.sample(&mut rng).arrivals(NodeId(0), FlowId(0));
            assert!(a <= 40);
            sum += a;
        }
        let mean = sum as f64 / slots as f64;
        assert!((mean - 20.0).abs() < 0.2, "mean {mean}");
    }

    #[test]
    fn rate_above_burst_is_rejected() {
        assert!(ArrivalSampler::new(2, &[flow(2.0, 1)]).is_err());
    }

    #[test]
    fn pmf_sums_to_one_with_correct_mean() {
        let pmf = arrival_pmf(&flow(3.0, 8));
        let total: f64 = pmf.iter().map(|p| p.1).sum();
        let mean: f64 = pmf.iter().map(|&(x, p)| x as f64 * p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((mean - 3.0).abs() < 1e-12);
        assert_eq!(arrival_pmf(&flow(1.0, 1)), vec![(1, 1.0)]);
    }
}
