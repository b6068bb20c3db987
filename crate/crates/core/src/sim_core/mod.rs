//! Deterministic discrete-event engine: clock, event queue, seeded streams
//! and scenario configuration.

pub mod config;
pub mod queue;
pub mod rng;
pub mod time;

pub use config::{ConfigError, KPolicy, MapConfig, MobilityModel, Protocol, RadioConfig, ScenarioConfig};
pub use queue::{Event, EventQueue};
pub use rng::{rng_stream, rng_stream_named, RngStreams, SimRng, StreamLabel};
pub use time::SimTime;
