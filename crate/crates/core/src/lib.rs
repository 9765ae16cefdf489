//! Joint route balancing and departure-time staggering for a centrally
//! controlled fleet on a congested road network.
//!
//! The crate is `no_std` and only needs an allocator. Everything that touches
//! files, clocks or threads lives in the `balstag` companion crate.
//!
//! Layout, bottom-up:
//!
//! - [`network`] and [`delay`]: the road graph, free-flow shortest paths and
//!   the flow-dependent arc delay functions.
//! - [`route`]: alternative routes with limited pairwise overlap.
//! - [`instance`] and [`generate`]: trips, instances and seeded synthetic
//!   instance families.
//! - [`schedule`]: from-scratch schedule construction and cost evaluation.
//! - [`incremental`]: the incremental schedule engine used inside the search.
//! - [`moves`]: the routing operator and the insert / remove / local-search
//!   operators built on it.
//! - [`solver`]: reactive user-optimum baseline, greedy assignment and the
//!   large neighborhood search.
//! - [`vickrey`]: bottleneck-queue validation of the linear congestion model.
//! - [`oracle`]: exhaustive optimizer for tiny instances.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod delay;
pub mod error;
pub mod generate;
pub mod incremental;
pub mod instance;
pub mod moves;
pub mod network;
pub mod oracle;
pub mod route;
pub mod schedule;
pub mod solver;
pub mod time;
pub mod vickrey;

pub use crate::error::{Error, Result};
pub use crate::instance::TripId;
pub use crate::network::{ArcId, NodeId};
