//! Three-party quantum digital signature toolkit.
//!
//! Analytic channel and detector model, finite-statistics decoy-state
//! estimators, composable attack bounds, a Monte Carlo protocol engine and
//! a signature-rate optimizer for SARG04-style six-state and four-state
//! signature protocols over fiber.
//!
//! The closed-form kernels are generic over the scalar type (`f32` or
//! `f64`); the protocol engine and optimizer run on `f64`.

pub mod channel;
pub mod config;
pub mod decoy;
pub mod engine;
pub mod entropy;
pub mod error;
pub mod num;
pub mod rate;
pub mod report;
pub mod security;

pub use channel::{ChannelParams, GainTable, StateFamily};
pub use config::{preset, RunConfig, PRESET_NAMES};
pub use engine::{AdversaryStrategy, EngineConfig, TrialRecord};
pub use entropy::{EncodingVariant, ErrorRates};
pub use error::{Error, Result};
pub use num::Real;
pub use rate::{min_n, sweep, PipelineConfig, RatePoint, RateTarget};
pub use security::{ProtocolCounts, ProtocolVariant, SecurityReport, Thresholds};

/// Concrete double-precision aliases for the generic kernels.
pub type ChannelParamsF64 = ChannelParams<f64>;
pub type GainTableF64 = GainTable<f64>;
pub type ErrorRatesF64 = ErrorRates<f64>;
pub type ThresholdsF64 = Thresholds<f64>;
pub type SecurityReportF64 = SecurityReport<f64>;
