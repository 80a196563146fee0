//! Network description files.
//!
//! A network file is TOML with one-based node ids:
//!
//! ```toml
//! nodes = 4
//! bound = 1                 # largest link capacity and per-slot arrival burst
//! uncontrollable = [2, 3]
//!
//! [[links]]
//! from = 1
//! to = 2
//! capacity = 1
//!
//! [[flows]]
//! source = 1
//! destination = 4
//! rate = 1.0                # mean arrivals per slot at load 1
//! burst = 1                 # arrivals are Binomial(burst, rate / burst)
//! load_scaled = true        # multiply `rate` by the experiment load
//!
//! [policy]
//! kind = "scenario2"        # idle | fig2 | scenario1 | scenario2 | random-split
//! threshold = 10
//! ```
//!
//! A `random-split` policy lists, per uncontrollable node, the neighbours it
//! picks from each slot:
//!
//! ```toml
//! [policy]
//! kind = "random-split"
//!
//! [[policy.rules]]
//! node = 2
//! relay = true              # may forward packets received in the same slot
//! options = [{ to = 3, prob = 0.5 }, { to = 5, flow = 1, prob = 0.5 }]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FlowId, FlowSpec, Link, Network, NodeId, Topology};
use crate::policy::PolicySpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub from: usize,
    pub to: usize,
    pub capacity: u32,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub source: usize,
    pub destination: usize,
    pub rate: f64,
    pub burst: u32,
    #[serde(default = "yes")]
    pub load_scaled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub nodes: usize,
    pub bound: u32,
    #[serde(default)]
    pub uncontrollable: Vec<usize>,
    pub links: Vec<LinkConfig>,
    pub flows: Vec<FlowConfig>,
    pub policy: PolicySpec,
}

fn node(label: usize, what: &str) -> Result<NodeId> {
    if label == 0 {
        return Err(Error::Config(format!("{what}: node ids start at 1")));
    }
    Ok(NodeId::from_label(label))
}

impl NetworkConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("network config is always serializable")
    }

    /// The network with every load-scaled flow rate multiplied by `load`.
    pub fn build(&self, load: f64) -> Result<Network> {
        if !(load > 0.0) || !load.is_finite() {
            return Err(Error::Config(format!("load must be positive, got {load}")));
        }
        let links = self
            .links
            .iter()
            .map(|l| {
                Ok(Link {
                    src: node(l.from, "link")?,
                    dst: node(l.to, "link")?,
                    capacity: l.capacity,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let uncontrollable = self
            .uncontrollable
            .iter()
            .map(|&n| node(n, "uncontrollable"))
            .collect::<Result<Vec<_>>>()?;
        let topology = Topology::new(self.nodes, links, &uncontrollable, self.bound)?;
        let flows = self
            .flows
            .iter()
            .enumerate()
            .map(|(k, f)| {
                if f.burst > self.bound {
                    return Err(Error::Flow {
                        flow: FlowId(k).label(),
                        reason: format!("burst {} exceeds the bound {}", f.burst, self.bound),
                    });
                }
                let rate = if f.load_scaled { f.rate * load } else { f.rate };
                Ok(FlowSpec::new(node(f.source, "flow")?, node(f.destination, "flow")?, rate, f.burst))
            })
            .collect::<Result<Vec<_>>>()?;
        Network::new(topology, flows)
    }
}
