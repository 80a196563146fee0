//! Optimistic reinforcement learning for queue-dependent uncontrollable
//! nodes.
//!
//! The queue process is truncated to total backlog below `V` by dropping
//! arrivals, which makes it a finite MDP with cost equal to the total
//! backlog. [`TucrlAgent`] learns that MDP in episodes: at the start of each
//! it builds an L1 confidence set around the empirical transition law,
//! plans with [`extended_value_iteration`], and follows the resulting policy
//! until some state-action count doubles.

mod agent;
mod confidence;
mod evi;
mod exact;
mod model;
mod oracle;
mod space;

pub use agent::{drop_packets, episode_bound, EpisodeRecord, JointActionSpace, TucrlAgent, TucrlConfig};
pub use confidence::{confidence_constant, confidence_radius, ConfidenceParams};
pub use evi::{
    evi_accuracy, extended_value_iteration, optimistic_distribution, optimistic_sparse, ConfidenceEntry,
    ConfidenceSet, EviResult,
};
pub use exact::exact_transition_table;
pub use model::{episode_should_stop, estimate_transitions, MdpModel};
pub use oracle::{oracle_average_cost, OracleSolution, TransitionTable, ORACLE_TOLERANCE};
pub use space::{BoxNeighborhood, Neighborhood, TruncatedStateSpace, Unrestricted};
