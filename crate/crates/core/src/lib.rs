//! Link-level simulator core for a wireless-powered secondary pair that
//! communicates through a two-way decode-and-forward relay while sharing
//! spectrum (underlay) with a primary pair and its own relay.
//!
//! The crate is organised bottom-up:
//!
//! - [`params`] / [`topology`]: scalar system constants, node geometry and
//!   unit conversions.
//! - [`channel`]: Rayleigh block-fading draws for the sixteen directed links
//!   of the six-node network, with reciprocal-network queries.
//! - [`beamformer`]: the per-node precoder/decoder set, random initialisation
//!   and the MRT-MRC benchmark construction.
//! - [`ia`]: iterative MMSE interference-alignment filter design over the
//!   forward and reciprocal networks.
//! - [`power`]: closed-form power-splitting ratios, harvested power, the
//!   relay power-control factor, and a brute-force grid oracle.
//! - [`metrics`]: per-trial SINR evaluation and the outage decision.
//! - [`montecarlo`]: per-trial orchestration, outage-probability estimation
//!   and parameter sweeps with common random numbers.

pub mod beamformer;
pub mod channel;
pub mod error;
pub mod ia;
pub mod metrics;
pub mod montecarlo;
pub mod params;
pub mod power;
pub mod topology;

pub use beamformer::BeamformerSet;
pub use channel::ChannelRealization;
pub use error::ModelError;
pub use ia::{IaDiagnostics, ReceiverDiag, UpdateAudit};
pub use metrics::TrialOutcome;
pub use montecarlo::{OutageEstimate, Scheme, SweepSpec, SweepVariable};
pub use params::{Node, Su, SystemParameters};
pub use power::{EffectiveGains, PowerAllocation};
pub use topology::Topology;

/// Complex scalar used throughout the crate.
pub type C64 = nalgebra::Complex<f64>;
/// Dense complex matrix (channel matrices).
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex vector (single-stream precoders/decoders).
pub type CVec = nalgebra::DVector<C64>;
