//! Slotted-time network model shared by every controller.

mod action;
mod arrivals;
mod dynamics;
mod network;
mod state;
mod topology;

pub use action::{actual_transmissions, enumerate_node_actions, RoutingAction, Transmission};
pub use arrivals::{arrival_pmf, sample_arrivals, ArrivalSampler};
pub use dynamics::{combine_actions, step, StepOutcome};
pub use network::{FlowSpec, Network};
pub use state::{NetworkEvent, QueueState};
pub use topology::{FlowId, Link, NodeId, Topology};

pub(crate) use dynamics::apply;
