//! LoRa uplink connectivity from ground end devices to a LEO satellite
//! gateway: beam geometry, link budget, spreading-factor assignment,
//! periodic ALOHA traffic and gateway-side reception, with seeded
//! Monte Carlo replication and parameter sweeps.
//!
//! ```
//! use leo_lora::engine::{replicate, Scenario};
//!
//! let scenario = Scenario { replications: 2, ..Scenario::default() };
//! let result = replicate(&scenario).unwrap();
//! assert_eq!(result.device_count, 60);
//! ```

pub mod channel;
pub mod config;
pub mod engine;
pub mod error;
pub mod gateway;
pub mod geometry;
pub mod metrics;
pub mod oracle;
pub mod phy;
pub mod sweep;
pub mod traffic;

pub use engine::{replicate, AggregateResult, Scenario};
pub use error::{Error, Result};
