//! Secure transmission with frequency diverse arrays.
//!
//! Joint design of per-element frequency offsets and transmit beamformers for
//! a single-Eve wiretap channel: minimize transmit power under a secrecy-rate
//! target, or maximize the secrecy rate under a power budget.
//!
//! - [`scenario`]: geometry and free-space channel synthesis
//! - [`coupling`]: Bob–Eve coupling objective and offset optimizer
//! - [`beamforming`]: closed-form beamformers and eigenvalue formulas
//! - [`experiments`]: baselines and Monte Carlo sweeps

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod beamforming;
pub mod coupling;
pub mod error;
pub mod experiments;
pub mod scenario;

pub use error::{Error, Result};
pub use scenario::{
    ArrayGeometry, ChannelPair, FrequencyPlan, Node, NodePlacement, RfParams, Scenario,
};
