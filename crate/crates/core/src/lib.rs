//! Simulation and control of partially-controllable queueing networks.
//!
//! Some nodes in the network follow routing rules the operator cannot change.
//! This crate models such networks in slotted time and provides three
//! controllers for the nodes the operator does own:
//!
//! * [`control::maxweight_decide`]: classic backpressure, the baseline.
//! * [`control::TmwController`]: Tracking-MaxWeight, which learns what the
//!   uncontrollable nodes actually do through two virtual queues.
//! * [`tucrl::TucrlAgent`]: an optimistic model-based learner for uncontrollable
//!   nodes whose behaviour depends on queue lengths, with admission control.
//!
//! The [`harness`] module wires these into reproducible experiments.

pub mod config;
pub mod control;
pub mod error;
pub mod harness;
pub mod model;
pub mod policy;
pub mod tucrl;

pub use error::{Error, Result};

/// Chapters of the guide under `book/`, compiled here so their code blocks run
/// as doctests and cannot drift from the API.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    pub mod model {}
    #[doc = include_str!("../../../book/src/tracking.md")]
    pub mod tracking {}
    #[doc = include_str!("../../../book/src/tucrl.md")]
    pub mod tucrl {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    pub mod experiments {}
    #[doc = include_str!("../../../book/src/config.md")]
    pub mod config {}
}
