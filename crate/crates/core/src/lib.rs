//! Route-discovery simulator for dense mobile ad hoc networks.
//!
//! Nodes learn farthest-first neighbor tables from periodic HELLO beacons
//! (distances estimated from RSSI through the free-space path-loss formula).
//! A route request is then rebroadcast only by the `n / K` farthest neighbors
//! of each forwarder, where `K` is the reachability parameter; the rest of the
//! receivers are blocked. Blind flooding is provided as the baseline.
//!
//! The [`experiment`] module runs parameter sweeps and renders CSV.

pub mod experiment;
pub mod metrics;
pub mod mobility;
pub mod protocol;
pub mod radio;
pub mod sim;
pub mod sim_core;

pub use sim::{RunOutput, RunStats, Simulation};
pub use sim_core::{KPolicy, MobilityModel, Protocol, ScenarioConfig};
