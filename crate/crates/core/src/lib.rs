//! Slot-level simulator of adversarial machine learning against
//! spectrum-sensing dynamic spectrum access.
//!
//! A transmitter learns idle/busy slots from sensed power, an adversary
//! infers the protocol and poisons sensing (evasion/causative) or jams
//! under an energy budget, and a confidence-score defense misleads the
//! adversary's surrogate classifier.

pub mod adversary;
pub mod channel;
pub mod config;
pub mod harness;
pub mod hyperopt;
pub mod neural;
pub mod traffic;
pub mod transmitter;

pub use config::ScenarioConfig;
pub use harness::{AttackKind, ExperimentSpec, RunMetrics};
