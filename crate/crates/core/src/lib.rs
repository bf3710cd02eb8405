//! Context-aware power consumption model for LTE user equipment, extended to
//! downlink traffic with carrier aggregation (CA).
//!
//! * [`power_model`]: Markov power states, time partition and mixed powers.
//! * [`context`]: active-state probabilities from cell geometry and mobility.
//! * [`device_lab`]: device parameters from TX-power and RB-sweep traces.
//! * [`scenario`]: sweeps, savings curves and the CA breakeven boost.
//!
//! Powers are in mW, transmit powers in dBm, data sizes in bit and rates in
//! bit/s throughout.

pub mod context;
pub mod device_lab;
pub mod error;
pub mod par;
pub mod power_model;
pub mod scenario;

pub use error::{Error, Result};
pub use par::Execution;
pub use power_model::{
    ContextProfile, DeviceBandProfile, PowerReport, StationaryDistribution, TimePartition,
    TrafficScenario,
};
